#include "gcl/hetgraph.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

#include "gcl/kernels.hpp"
#include "gcl/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gcl {

bool MetaPathSubgraph::has_edge(int u, int v) const {
    const auto beg = indices.begin() + indptr[u];
    const auto end = indices.begin() + indptr[u + 1];
    return std::binary_search(beg, end, v);
}

bool HeteroGraph::has_labels() const {
    for (int l : labels)
        if (l >= 0) return true;
    return false;
}

int HeteroGraph::num_classes() const {
    int mx = -1;
    for (int l : labels) mx = std::max(mx, l);
    return mx + 1;
}

void HeteroGraph::validate() const {
    if (features.defined() &&
        (features.rows() != num_nodes || features.cols() != feature_dim))
        throw std::runtime_error("hetgraph: feature matrix shape mismatch");
    if (features.defined())
        for (std::size_t i = 0; i < features.size(); ++i)
            if (!std::isfinite(features.data()[i]))
                throw std::runtime_error("hetgraph: non-finite feature entry");
    std::vector<int> rel_seen;
    for (const auto& mp : metapaths) {
        if (mp.num_nodes() != num_nodes)
            throw std::runtime_error("hetgraph: subgraph " + mp.name + " node count mismatch");
        rel_seen.push_back(mp.relation_id);
        for (std::size_t u = 0; u < num_nodes; ++u) {
            for (int e = mp.indptr[u]; e < mp.indptr[u + 1]; ++e) {
                const int v = mp.indices[e];
                if (v < 0 || static_cast<std::size_t>(v) >= num_nodes)
                    throw std::runtime_error("hetgraph: endpoint out of range in " + mp.name);
                if (v == static_cast<int>(u))
                    throw std::runtime_error("hetgraph: self loop stored in " + mp.name);
                if (e > mp.indptr[u] && mp.indices[e - 1] >= v)
                    throw std::runtime_error("hetgraph: unsorted/duplicate neighbors in " +
                                             mp.name);
                if (!mp.has_edge(v, static_cast<int>(u)))
                    throw std::runtime_error("hetgraph: asymmetric adjacency in " + mp.name);
            }
        }
    }
    std::sort(rel_seen.begin(), rel_seen.end());
    for (std::size_t r = 0; r < rel_seen.size(); ++r)
        if (rel_seen[r] != static_cast<int>(r))
            throw std::runtime_error("hetgraph: relation ids are not dense 0..R-1");
}

MetaPathSubgraph build_subgraph(std::string name, int relation_id, std::size_t num_nodes,
                                const std::vector<std::pair<int, int>>& edges,
                                std::vector<std::string>* warnings) {
    std::vector<std::pair<int, int>> sym;
    sym.reserve(edges.size() * 2);
    std::size_t self_loops = 0;
    for (auto [u, v] : edges) {
        if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= num_nodes ||
            static_cast<std::size_t>(v) >= num_nodes)
            throw std::runtime_error("build_subgraph: endpoint >= num_nodes in " + name);
        if (u == v) {
            ++self_loops;
            continue;
        }
        sym.emplace_back(u, v);
        sym.emplace_back(v, u);
    }
    if (self_loops && warnings)
        warnings->push_back("subgraph " + name + ": dropped " + std::to_string(self_loops) +
                            " self loop(s)");
    std::sort(sym.begin(), sym.end());
    sym.erase(std::unique(sym.begin(), sym.end()), sym.end());

    MetaPathSubgraph sub;
    sub.name = std::move(name);
    sub.relation_id = relation_id;
    sub.indptr.assign(num_nodes + 1, 0);
    for (auto& [u, v] : sym) sub.indptr[u + 1]++;
    for (std::size_t i = 0; i < num_nodes; ++i) sub.indptr[i + 1] += sub.indptr[i];
    sub.indices.resize(sym.size());
    std::vector<int> cursor(sub.indptr.begin(), sub.indptr.end() - 1);
    for (auto& [u, v] : sym) sub.indices[cursor[u]++] = v;
    return sub;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

[[noreturn]] void malformed(const std::string& file, std::size_t lineno, const std::string& why) {
    throw std::runtime_error("malformed line in " + file + ":" + std::to_string(lineno) + ": " +
                             why);
}

long parse_id(const std::string& s, const std::string& file, std::size_t lineno) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size() || v < 0) malformed(file, lineno, "bad node id '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        malformed(file, lineno, "bad node id '" + s + "'");
    } catch (const std::out_of_range&) {
        malformed(file, lineno, "node id out of range '" + s + "'");
    }
}

struct RawEdgeFile {
    std::string name;
    int relation_id;
    std::vector<std::pair<long, long>> pairs;
};

}  // namespace

HeteroGraph load_dataset(const std::string& dir_path) {
    const fs::path dir(dir_path);
    const fs::path meta_path = dir / "graph.meta";
    std::ifstream meta_in(meta_path);
    if (!meta_in) throw std::runtime_error("load_dataset: missing file " + meta_path.string());
    json meta;
    try {
        meta_in >> meta;
    } catch (const json::exception& e) {
        throw std::runtime_error("load_dataset: bad graph.meta: " + std::string(e.what()));
    }

    HeteroGraph g;
    g.num_nodes = meta.at("num_nodes").get<std::size_t>();
    g.feature_dim = meta.at("feature_dim").get<std::size_t>();

    // ---- gather raw ids from all files, then decide on densification ----
    std::vector<RawEdgeFile> raw_edges;
    for (const auto& mp : meta.at("metapaths")) {
        RawEdgeFile ref;
        ref.name = mp.at("name").get<std::string>();
        ref.relation_id = mp.at("relation_id").get<int>();
        const fs::path epath = dir / mp.at("edges").get<std::string>();
        std::ifstream in(epath);
        if (!in) throw std::runtime_error("load_dataset: missing file " + epath.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto toks = split_ws(line);
            if (toks.empty()) continue;
            if (toks.size() != 2) malformed(epath.string(), lineno, "expected 'u v'");
            ref.pairs.emplace_back(parse_id(toks[0], epath.string(), lineno),
                                   parse_id(toks[1], epath.string(), lineno));
        }
        raw_edges.push_back(std::move(ref));
    }

    std::vector<std::pair<long, int>> raw_labels;
    if (meta.contains("labels") && !meta.at("labels").is_null()) {
        const fs::path lpath = dir / meta.at("labels").get<std::string>();
        std::ifstream in(lpath);
        if (!in) throw std::runtime_error("load_dataset: missing file " + lpath.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto toks = split_ws(line);
            if (toks.empty()) continue;
            if (toks.size() != 2) malformed(lpath.string(), lineno, "expected 'node class'");
            raw_labels.emplace_back(parse_id(toks[0], lpath.string(), lineno),
                                    static_cast<int>(parse_id(toks[1], lpath.string(), lineno)));
        }
    }

    std::vector<std::pair<long, Split>> raw_splits;
    if (meta.contains("splits") && !meta.at("splits").is_null()) {
        const fs::path spath = dir / meta.at("splits").get<std::string>();
        std::ifstream in(spath);
        if (!in) throw std::runtime_error("load_dataset: missing file " + spath.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto toks = split_ws(line);
            if (toks.empty()) continue;
            if (toks.size() != 2) malformed(spath.string(), lineno, "expected 'node split'");
            Split s;
            if (toks[1] == "train")
                s = Split::kTrain;
            else if (toks[1] == "val")
                s = Split::kVal;
            else if (toks[1] == "test")
                s = Split::kTest;
            else
                malformed(spath.string(), lineno, "unknown split '" + toks[1] + "'");
            raw_splits.emplace_back(parse_id(toks[0], spath.string(), lineno), s);
        }
    }

    bool needs_remap = false;
    for (const auto& ref : raw_edges)
        for (auto [u, v] : ref.pairs)
            if (u >= static_cast<long>(g.num_nodes) || v >= static_cast<long>(g.num_nodes))
                needs_remap = true;
    for (const auto& [raw, cls] : raw_labels)
        if (raw >= static_cast<long>(g.num_nodes)) needs_remap = true;
    for (const auto& [raw, s] : raw_splits)
        if (raw >= static_cast<long>(g.num_nodes)) needs_remap = true;

    std::unordered_map<long, int> remap;
    auto map_id = [&](long raw) -> int {
        if (!needs_remap) return static_cast<int>(raw);
        auto it = remap.find(raw);
        if (it != remap.end()) return it->second;
        const int dense = static_cast<int>(remap.size());
        if (static_cast<std::size_t>(dense) >= g.num_nodes)
            throw std::runtime_error("load_dataset: endpoint >= num_nodes (more distinct ids than num_nodes)");
        remap.emplace(raw, dense);
        return dense;
    };

    for (const auto& ref : raw_edges) {
        std::vector<std::pair<int, int>> pairs;
        pairs.reserve(ref.pairs.size());
        for (auto [u, v] : ref.pairs) {
            const int du = map_id(u);  // sequenced: u takes the next dense id first
            const int dv = map_id(v);
            pairs.emplace_back(du, dv);
        }
        for (auto [u, v] : pairs)
            if (static_cast<std::size_t>(u) >= g.num_nodes ||
                static_cast<std::size_t>(v) >= g.num_nodes)
                throw std::runtime_error("load_dataset: endpoint >= num_nodes in edges_" +
                                         ref.name);
        g.metapaths.push_back(
            build_subgraph(ref.name, ref.relation_id, g.num_nodes, pairs, &g.load_warnings));
    }

    // ---- features ----
    const fs::path fpath = dir / meta.at("features").get<std::string>();
    std::ifstream fin(fpath);
    if (!fin) throw std::runtime_error("load_dataset: missing file " + fpath.string());
    std::vector<double> feat;
    feat.reserve(g.num_nodes * g.feature_dim);
    std::string line;
    std::size_t lineno = 0, rows = 0;
    while (std::getline(fin, line)) {
        ++lineno;
        const auto toks = split_ws(line);
        if (toks.empty()) continue;
        if (toks.size() != g.feature_dim)
            malformed(fpath.string(), lineno,
                      "expected " + std::to_string(g.feature_dim) + " values, got " +
                          std::to_string(toks.size()));
        for (const auto& t : toks) {
            try {
                feat.push_back(std::stod(t));
            } catch (const std::exception&) {
                malformed(fpath.string(), lineno, "bad real '" + t + "'");
            }
        }
        ++rows;
    }
    if (rows != g.num_nodes)
        throw std::runtime_error("load_dataset: feature row count mismatch (" +
                                 std::to_string(rows) + " rows for " +
                                 std::to_string(g.num_nodes) + " nodes)");
    g.features = Tensor::from_data({g.num_nodes, g.feature_dim}, std::move(feat));

    if (!raw_labels.empty()) {
        g.labels.assign(g.num_nodes, -1);
        for (auto [raw, cls] : raw_labels) g.labels[map_id(raw)] = cls;
    }
    if (!raw_splits.empty()) {
        g.splits.assign(g.num_nodes, Split::kNone);
        for (auto [raw, s] : raw_splits) g.splits[map_id(raw)] = s;
    }

    if (needs_remap) {
        g.id_map.assign(g.num_nodes, -1);
        for (const auto& [raw, dense] : remap) g.id_map[dense] = static_cast<int>(raw);
        g.load_warnings.push_back("sparse node ids densified by first appearance");
    }
    for (const auto& w : g.load_warnings) std::cerr << "warning: " << w << "\n";

    g.validate();
    return g;
}

void save_dataset(const std::string& dir_path, const HeteroGraph& g) {
    const fs::path dir(dir_path);
    fs::create_directories(dir);

    json meta;
    meta["num_nodes"] = g.num_nodes;
    meta["feature_dim"] = g.feature_dim;
    meta["features"] = "features.tsv";
    meta["labels"] = g.labels.empty() ? json() : json("labels.tsv");
    meta["splits"] = g.splits.empty() ? json() : json("splits.tsv");
    meta["metapaths"] = json::array();
    for (const auto& mp : g.metapaths)
        meta["metapaths"].push_back(
            {{"name", mp.name}, {"relation_id", mp.relation_id}, {"edges", "edges_" + mp.name + ".tsv"}});
    std::ofstream(dir / "graph.meta") << meta.dump(2) << "\n";

    {
        std::ofstream out(dir / "features.tsv");
        out.precision(17);
        for (std::size_t i = 0; i < g.num_nodes; ++i) {
            for (std::size_t j = 0; j < g.feature_dim; ++j)
                out << (j ? "\t" : "") << g.features.at(i, j);
            out << "\n";
        }
    }
    for (const auto& mp : g.metapaths) {
        std::ofstream out(dir / ("edges_" + mp.name + ".tsv"));
        for (std::size_t u = 0; u < g.num_nodes; ++u)
            for (int e = mp.indptr[u]; e < mp.indptr[u + 1]; ++e)
                if (static_cast<int>(u) < mp.indices[e])
                    out << u << "\t" << mp.indices[e] << "\n";
    }
    if (!g.labels.empty()) {
        std::ofstream out(dir / "labels.tsv");
        for (std::size_t i = 0; i < g.num_nodes; ++i)
            if (g.labels[i] >= 0) out << i << "\t" << g.labels[i] << "\n";
    }
    if (!g.splits.empty()) {
        std::ofstream out(dir / "splits.tsv");
        static const char* names[] = {"train", "val", "test"};
        for (std::size_t i = 0; i < g.num_nodes; ++i)
            if (g.splits[i] != Split::kNone)
                out << i << "\t" << names[static_cast<int>(g.splits[i])] << "\n";
    }
}

SynthSpec parse_synth_spec(const std::string& json_path) {
    std::ifstream in(json_path);
    if (!in) throw std::runtime_error("synth spec: cannot open " + json_path);
    json j;
    in >> j;
    SynthSpec s;
    s.num_nodes = j.at("num_nodes").get<std::size_t>();
    s.num_classes = j.at("num_classes").get<std::size_t>();
    s.feature_dim = j.value("feature_dim", s.feature_dim);
    s.seed = j.value("seed", s.seed);
    s.mean_scale = j.value("mean_scale", s.mean_scale);
    s.noise_std = j.value("noise_std", s.noise_std);
    s.train_frac = j.value("train_frac", s.train_frac);
    s.val_frac = j.value("val_frac", s.val_frac);
    for (const auto& m : j.at("metapaths")) {
        MetaPathSpec mp;
        mp.name = m.at("name").get<std::string>();
        mp.tree = m.value("tree", false);
        mp.p_intra = m.value("p_intra", 0.0);
        mp.p_inter = m.value("p_inter", 0.0);
        mp.noise_p = m.value("noise_p", 0.0);
        s.metapaths.push_back(std::move(mp));
    }
    return s;
}

HeteroGraph generate_synthetic(const SynthSpec& spec) {
    if (spec.num_classes < 2 || spec.num_nodes < spec.num_classes)
        throw std::invalid_argument("generate_synthetic: need num_nodes >= num_classes >= 2");
    for (const auto& mp : spec.metapaths)
        if (mp.p_intra < 0 || mp.p_intra > 1 || mp.p_inter < 0 || mp.p_inter > 1 ||
            mp.noise_p < 0 || mp.noise_p > 1)
            throw std::invalid_argument("generate_synthetic: probabilities must be in [0,1]");

    const std::size_t n = spec.num_nodes;
    HeteroGraph g;
    g.num_nodes = n;
    g.feature_dim = spec.feature_dim;

    auto class_of = [&](std::size_t i) {
        return static_cast<int>(i * spec.num_classes / n);
    };

    for (std::size_t mi = 0; mi < spec.metapaths.size(); ++mi) {
        const auto& mp = spec.metapaths[mi];
        auto rng = make_rng(derive_seed(spec.seed, rngtag::kSynth, 1, mi));
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        std::vector<std::pair<int, int>> edges;
        if (mp.tree) {
            for (std::size_t i = 1; i < n; ++i)
                edges.emplace_back(static_cast<int>(i), static_cast<int>((i - 1) / 2));
            if (mp.noise_p > 0.0)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j)
                        if (coin(rng) < mp.noise_p)
                            edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
        } else {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double p = class_of(i) == class_of(j) ? mp.p_intra : mp.p_inter;
                    if (p > 0.0 && coin(rng) < p)
                        edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
                }
        }
        g.metapaths.push_back(build_subgraph(mp.name, static_cast<int>(mi), n, edges));
    }

    {
        auto rng = make_rng(derive_seed(spec.seed, rngtag::kSynth, 2));
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> means(spec.num_classes * spec.feature_dim);
        for (double& v : means) v = spec.mean_scale * gauss(rng);
        std::vector<double> feat(n * spec.feature_dim);
        for (std::size_t i = 0; i < n; ++i) {
            const double* mu = means.data() + class_of(i) * spec.feature_dim;
            for (std::size_t f = 0; f < spec.feature_dim; ++f)
                feat[i * spec.feature_dim + f] = mu[f] + spec.noise_std * gauss(rng);
        }
        g.features = Tensor::from_data({n, spec.feature_dim}, std::move(feat));
    }

    g.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) g.labels[i] = class_of(i);

    {
        // stratified splits, deterministic per seed
        auto rng = make_rng(derive_seed(spec.seed, rngtag::kSynth, 3));
        g.splits.assign(n, Split::kTest);
        for (std::size_t c = 0; c < spec.num_classes; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < n; ++i)
                if (g.labels[i] == static_cast<int>(c)) members.push_back(i);
            std::shuffle(members.begin(), members.end(), rng);
            const std::size_t ntr = static_cast<std::size_t>(
                std::ceil(spec.train_frac * static_cast<double>(members.size())));
            const std::size_t nva = static_cast<std::size_t>(
                std::ceil(spec.val_frac * static_cast<double>(members.size())));
            for (std::size_t k = 0; k < members.size(); ++k)
                g.splits[members[k]] =
                    k < ntr ? Split::kTrain : (k < ntr + nva ? Split::kVal : Split::kTest);
        }
    }

    g.validate();
    return g;
}

HyperbolicityResult gromov_hyperbolicity(const MetaPathSubgraph& sub, std::size_t cap) {
    const std::size_t n = sub.num_nodes();
    HyperbolicityResult res;
    if (n == 0) {
        res.degenerate = true;
        return res;
    }

    // largest connected component (first one wins ties, scanning ascending)
    std::vector<int> comp(n, -1);
    int ncomp = 0;
    std::vector<int> queue;
    for (std::size_t s = 0; s < n; ++s) {
        if (comp[s] >= 0) continue;
        queue.clear();
        queue.push_back(static_cast<int>(s));
        comp[s] = ncomp;
        for (std::size_t h = 0; h < queue.size(); ++h) {
            const int u = queue[h];
            for (int e = sub.indptr[u]; e < sub.indptr[u + 1]; ++e) {
                const int v = sub.indices[e];
                if (comp[v] < 0) {
                    comp[v] = ncomp;
                    queue.push_back(v);
                }
            }
        }
        ++ncomp;
    }
    std::vector<std::size_t> sizes(ncomp, 0);
    for (std::size_t i = 0; i < n; ++i) sizes[comp[i]]++;
    int best = 0;
    for (int c = 1; c < ncomp; ++c)
        if (sizes[c] > sizes[best]) best = c;

    res.component_size = sizes[best];
    if (res.component_size < 4) {
        res.degenerate = true;
        return res;
    }
    if (res.component_size > cap)
        throw std::runtime_error(
            "gromov_hyperbolicity: component of " + std::to_string(res.component_size) +
            " nodes exceeds cap " + std::to_string(cap) + " for the exact O(n^4) scan");

    // induced subgraph of the component
    const std::size_t m = res.component_size;
    std::vector<int> to_local(n, -1), nodes;
    nodes.reserve(m);
    for (std::size_t i = 0; i < n; ++i)
        if (comp[i] == best) {
            to_local[i] = static_cast<int>(nodes.size());
            nodes.push_back(static_cast<int>(i));
        }
    std::vector<int> indptr(m + 1, 0), indices;
    indices.reserve(sub.indices.size());
    for (std::size_t li = 0; li < m; ++li) {
        const int u = nodes[li];
        for (int e = sub.indptr[u]; e < sub.indptr[u + 1]; ++e)
            indices.push_back(to_local[sub.indices[e]]);
        indptr[li + 1] = static_cast<int>(indices.size());
    }

    std::vector<std::uint16_t> dist(m * m);
    kernels::bfs_all_pairs(indptr.data(), indices.data(), m, dist.data());

    std::vector<int> local(m);
    for (std::size_t i = 0; i < m; ++i) local[i] = static_cast<int>(i);
    res.delta = kernels::four_point_delta(dist.data(), m, local.data(), m);
    return res;
}

}  // namespace gcl
