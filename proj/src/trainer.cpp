#include "gcl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "gcl/checkpoint.hpp"
#include "gcl/evalkit.hpp"
#include "gcl/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace gcl {

TrainConfig TrainConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    TrainConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected key=value at " + path + ":" +
                                     std::to_string(lineno));
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        try {
            if (key == "lr") cfg.lr = std::stod(val);
            else if (key == "weight_decay") cfg.weight_decay = std::stod(val);
            else if (key == "dim") cfg.dim = std::stoul(val);
            else if (key == "epochs_max") cfg.epochs_max = std::stoul(val);
            else if (key == "patience") cfg.patience = std::stoul(val);
            else if (key == "beta") cfg.beta = std::stod(val);
            else if (key == "lambda") cfg.lambda = std::stod(val);
            else if (key == "gamma") cfg.gamma = std::stod(val);
            else if (key == "sample_size") cfg.sample_size = std::stoul(val);
            else if (key == "view1.p_a") cfg.view1_p_a = std::stod(val);
            else if (key == "view1.p_e") cfg.view1_p_e = std::stod(val);
            else if (key == "view2.p_a") cfg.view2_p_a = std::stod(val);
            else if (key == "view2.p_e") cfg.view2_p_e = std::stod(val);
            else if (key == "dropout") cfg.dropout = std::stod(val);
            else if (key == "curvature") cfg.curvature = std::stod(val);
            else if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "eval_every") cfg.eval_every = std::stoul(val);
            else if (key == "dataset_dir") cfg.dataset_dir = val;
            else if (key == "out_dir") cfg.out_dir = val;
            else
                throw std::runtime_error("config: unknown key '" + key + "' at " + path + ":" +
                                         std::to_string(lineno));
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("config: bad value for '" + key + "' at " + path + ":" +
                                     std::to_string(lineno));
        }
    }
    cfg.validate();
    return cfg;
}

void TrainConfig::validate() const {
    if (lr <= 0) throw std::invalid_argument("config: lr must be > 0");
    if (dim == 0) throw std::invalid_argument("config: dim must be > 0");
    if (patience < 1) throw std::invalid_argument("config: patience must be >= 1");
    if (beta < 0 || lambda < 0 || gamma < 0)
        throw std::invalid_argument("config: loss weights must be >= 0");
    for (double p : {view1_p_a, view1_p_e, view2_p_a, view2_p_e, dropout})
        if (p < 0 || p >= 1) throw std::invalid_argument("config: probabilities must be in [0,1)");
    if (curvature <= 0) throw std::invalid_argument("config: curvature must be > 0");
}

EncoderConfig TrainConfig::encoder_config() const {
    EncoderConfig e;
    e.hidden_dim = dim;
    e.layers = layers;
    e.dropout = dropout;
    e.ball.c = curvature;
    return e;
}

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Shape shape, std::uint64_t seed) {
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-bound, bound);
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    return t;
}

Tensor small_uniform(Shape shape, double scale, std::uint64_t seed) {
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_real_distribution<double> u(-scale, scale);
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    return t;
}

}  // namespace

void init_params(std::size_t feature_dim, std::size_t num_paths, const TrainConfig& cfg,
                 EncoderParams& enc, DiscrParams& discr) {
    const std::size_t d = cfg.dim;
    std::uint64_t ctr = 0;
    auto next = [&] { return derive_seed(cfg.seed, rngtag::kInit, ctr++); };

    enc.paths.clear();
    for (std::size_t m = 0; m < num_paths; ++m) {
        PathParams pp;
        for (std::size_t l = 0; l < cfg.layers; ++l) {
            const std::size_t fin = l == 0 ? feature_dim : d;
            pp.w1.push_back(glorot(fin, d, {fin, d}, next()));
            pp.b1.push_back(Tensor::zeros({1, d}));
            pp.w2.push_back(glorot(fin, d, {fin, d}, next()));
            pp.b2_raw.push_back(Tensor::zeros({1, d}));
        }
        pp.q = small_uniform({1, d}, 1e-2, next());
        enc.paths.push_back(std::move(pp));
    }
    enc.proj_w1 = glorot(d, d, {d, d}, next());
    enc.proj_b1 = Tensor::zeros({1, d});
    enc.proj_w2 = glorot(d, d, {d, d}, next());
    enc.proj_b2 = Tensor::zeros({1, d});

    discr.w_node = glorot(d, d, {d, d}, next());
    discr.w_rel.clear();
    for (std::size_t r = 0; r < num_paths; ++r) discr.w_rel.push_back(glorot(d, d, {d, d}, next()));
    discr.w_lg = glorot(d, d, {d, d}, next());
}

EpochContext make_epoch_context(const HeteroGraph& g, const TrainConfig& cfg, std::size_t epoch) {
    EpochContext ctx;
    AugmentConfig a1{cfg.view1_p_a, cfg.view1_p_e, derive_seed(cfg.seed, rngtag::kAugment, epoch, 1)};
    AugmentConfig a2{cfg.view2_p_a, cfg.view2_p_e, derive_seed(cfg.seed, rngtag::kAugment, epoch, 2)};
    auto [v1, v2] = make_views(g, a1, a2);
    ctx.view1 = std::move(v1);
    ctx.view2 = std::move(v2);
    if (cfg.beta > 0.0 || cfg.lambda > 0.0) {
        ctx.batch = sample_triples(g, cfg.sample_size,
                                   derive_seed(cfg.seed, rngtag::kTriples, epoch));
        ctx.has_batch = true;
    }
    // one feature-row shuffle per epoch, shared by loss_lg and loss_reg
    ctx.shuffle_perm.resize(g.num_nodes);
    std::iota(ctx.shuffle_perm.begin(), ctx.shuffle_perm.end(), 0);
    auto rng = make_rng(derive_seed(cfg.seed, rngtag::kShuffle, epoch));
    std::shuffle(ctx.shuffle_perm.begin(), ctx.shuffle_perm.end(), rng);
    ctx.dropout_seed = derive_seed(cfg.seed, rngtag::kDropout, epoch);
    return ctx;
}

namespace {

struct ProjectedView {
    std::vector<Tensor> z_path;   // projected per-meta-path node embeddings
    std::vector<Tensor> zg_path;  // projected per-meta-path graph vectors
    Tensor z, zg;                 // projected fused embeddings
};

ProjectedView project_view(const ViewEmbeddings& ve, const EncoderParams& enc,
                           const TrainConfig& cfg, std::uint64_t seed_base, bool training) {
    ProjectedView pv;
    std::uint64_t ctr = 0;
    auto head = [&](const Tensor& t) {
        return project_head(t, enc, cfg.dropout, derive_seed(seed_base, ctr++), training);
    };
    for (const Tensor& t : ve.path_nodes) pv.z_path.push_back(head(t));
    for (const Tensor& t : ve.path_graph) pv.zg_path.push_back(head(t));
    pv.z = head(ve.nodes);
    pv.zg = head(ve.graph);
    return pv;
}

}  // namespace

LossParts compute_losses(const EpochContext& ctx, const EncoderParams& enc,
                         const DiscrParams& discr, const TrainConfig& cfg) {
    const EncoderConfig ecfg = cfg.encoder_config();
    const bool training = ctx.training;

    ViewEmbeddings ve1 = encode_view(ctx.view1, enc, ecfg, Geometry::kEuclidean,
                                     derive_seed(ctx.dropout_seed, 1), training);
    ViewEmbeddings ve2 = encode_view(ctx.view2, enc, ecfg, Geometry::kHyperbolic,
                                     derive_seed(ctx.dropout_seed, 2), training);

    // negative passes: same adjacency, feature rows shuffled
    GraphView v1s{gather_rows(ctx.view1.features, ctx.shuffle_perm), ctx.view1.metapaths};
    GraphView v2s{gather_rows(ctx.view2.features, ctx.shuffle_perm), ctx.view2.metapaths};
    ViewEmbeddings ve1s = encode_view(v1s, enc, ecfg, Geometry::kEuclidean,
                                      derive_seed(ctx.dropout_seed, 3), training);
    ViewEmbeddings ve2s = encode_view(v2s, enc, ecfg, Geometry::kHyperbolic,
                                      derive_seed(ctx.dropout_seed, 4), training);

    ProjectedView p1 = project_view(ve1, enc, cfg, derive_seed(ctx.dropout_seed, 5), training);
    ProjectedView p2 = project_view(ve2, enc, cfg, derive_seed(ctx.dropout_seed, 6), training);
    ProjectedView p1s = project_view(ve1s, enc, cfg, derive_seed(ctx.dropout_seed, 7), training);
    ProjectedView p2s = project_view(ve2s, enc, cfg, derive_seed(ctx.dropout_seed, 8), training);

    LossParts parts;

    LgInputs lg;
    lg.z_path = p1.z_path;
    lg.zt_path = p2.z_path;
    lg.zg_path = p1.zg_path;
    lg.ztg_path = p2.zg_path;
    lg.z = p1.z;
    lg.zt = p2.z;
    lg.zg = p1.zg;
    lg.ztg = p2.zg;
    lg.zneg_path = p1s.z_path;
    lg.ztneg_path = p2s.z_path;
    lg.zneg = p1s.z;
    lg.ztneg = p2s.z;
    parts.lg = loss_lg(lg, discr.w_lg);
    parts.total = parts.lg;

    if (cfg.beta > 0.0) {
        parts.node = loss_node(ctx.batch, p1.z, p2.z, discr.w_node);
        parts.total = add(parts.total, scalar_mul(parts.node, cfg.beta));
    } else {
        parts.node = Tensor::scalar(0.0);
    }

    const bool rel_possible = discr.w_rel.size() >= 2;
    if (cfg.lambda > 0.0 && rel_possible) {
        parts.rel = loss_rel(ctx.batch, p1.z, p2.z, discr.w_rel);
        parts.total = add(parts.total, scalar_mul(parts.rel, cfg.lambda));
    } else {
        parts.rel = Tensor::scalar(0.0);
    }

    if (cfg.gamma > 0.0) {
        Tensor h_ult = ultimate_embeddings(ve1.nodes, ve2.nodes);
        std::vector<Tensor> h_ult_path, h_neg_path;
        for (std::size_t m = 0; m < ve1.path_nodes.size(); ++m) {
            h_ult_path.push_back(ultimate_embeddings(ve1.path_nodes[m], ve2.path_nodes[m]));
            h_neg_path.push_back(ultimate_embeddings(ve1s.path_nodes[m], ve2s.path_nodes[m]));
        }
        parts.reg = loss_reg(h_ult, h_ult_path, h_neg_path);
        parts.total = add(parts.total, scalar_mul(parts.reg, cfg.gamma));
    } else {
        parts.reg = Tensor::scalar(0.0);
    }
    return parts;
}

InferenceEmbeddings inference_embeddings(const HeteroGraph& g, const EncoderParams& enc,
                                         const TrainConfig& cfg) {
    NoGradGuard guard;
    EncoderConfig ecfg = cfg.encoder_config();
    ecfg.dropout = 0.0;
    const GraphView view = identity_view(g);
    ViewEmbeddings ve1 = encode_view(view, enc, ecfg, Geometry::kEuclidean, 0, false);
    ViewEmbeddings ve2 = encode_view(view, enc, ecfg, Geometry::kHyperbolic, 0, false);
    InferenceEmbeddings out;
    out.h_ult = ultimate_embeddings(ve1.nodes, ve2.nodes);
    for (std::size_t m = 0; m < ve1.path_nodes.size(); ++m)
        out.path_ult.push_back(ultimate_embeddings(ve1.path_nodes[m], ve2.path_nodes[m]));
    return out;
}

namespace {

std::vector<std::vector<double>> snapshot_params(const ParamSet& ps) {
    std::vector<std::vector<double>> snap;
    snap.reserve(ps.size());
    for (const auto& it : ps.items())
        snap.emplace_back(it.tensor.data(), it.tensor.data() + it.tensor.size());
    return snap;
}

void restore_params(ParamSet& ps, const std::vector<std::vector<double>>& snap) {
    for (std::size_t i = 0; i < snap.size(); ++i) {
        Tensor t = ps.items()[i].tensor;
        std::copy(snap[i].begin(), snap[i].end(), t.data());
    }
}

}  // namespace

TrainResult train(const HeteroGraph& g, const TrainConfig& cfg) {
    cfg.validate();
    if (g.metapaths.empty()) throw std::invalid_argument("train: graph has no meta-paths");
    for (const auto& mp : g.metapaths)
        if (mp.num_edges() == 0)
            throw std::invalid_argument("train: meta-path " + mp.name + " has no edges");

    const auto t_start = std::chrono::steady_clock::now();

    TrainResult res;
    init_params(g.feature_dim, g.metapaths.size(), cfg, res.enc, res.discr);

    ParamSet ps;
    res.enc.collect(ps);
    res.discr.collect(ps);
    Adam adam(ps, AdamConfig{cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});

    bool has_val = false, has_train = false;
    for (Split s : g.splits) {
        has_val = has_val || s == Split::kVal;
        has_train = has_train || s == Split::kTrain;
    }
    const bool probe_monitor =
        cfg.eval_every > 0 && g.has_labels() && has_train && has_val;
    res.report.monitor = probe_monitor ? "val_probe" : "loss";

    double best = std::numeric_limits<double>::infinity();  // minimized
    std::size_t best_epoch = 0, since_best = 0;
    std::vector<std::vector<double>> best_snap = snapshot_params(ps);

    for (std::size_t epoch = 0; epoch < cfg.epochs_max; ++epoch) {
        EpochContext ctx = make_epoch_context(g, cfg, epoch);
        LossParts parts;
        try {
            tape().clear();
            adam.zero_grad();
            parts = compute_losses(ctx, res.enc, res.discr, cfg);
            if (!std::isfinite(parts.total.item()))
                throw std::runtime_error("train: non-finite loss");
            backward(parts.total);
            adam.step();
        } catch (const std::runtime_error& e) {
            std::cerr << "warning: aborting at epoch " << epoch << ": " << e.what() << "\n";
            res.report.aborted_nonfinite = true;
            tape().clear();
            break;
        }
        res.report.losses.push_back({parts.total.item(), parts.lg.item(), parts.node.item(),
                                     parts.rel.item(), parts.reg.item()});

        double monitored = parts.total.item();
        bool monobserved = true;
        if (probe_monitor) {
            monobserved = (epoch + 1) % cfg.eval_every == 0;
            if (monobserved) {
                InferenceEmbeddings emb = inference_embeddings(g, res.enc, cfg);
                ProbeResult pr = logistic_probe(emb.h_ult, g.labels, g.splits, /*runs=*/5,
                                                derive_seed(cfg.seed, rngtag::kProbe, epoch),
                                                Split::kVal, /*iters=*/100);
                monitored = -pr.macro_f1_mean;
            }
        }
        if (monobserved) {
            if (monitored < best) {
                best = monitored;
                best_epoch = epoch;
                since_best = 0;
                best_snap = snapshot_params(ps);
            } else {
                ++since_best;
            }
            if (since_best >= cfg.patience) break;
        }
    }

    restore_params(ps, best_snap);
    res.report.best_epoch = best_epoch;
    res.report.best_monitor = best;
    res.h_ult = inference_embeddings(g, res.enc, cfg).h_ult;
    res.report.wall_time_sec =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (!cfg.out_dir.empty()) {
        fs::create_directories(cfg.out_dir);
        const std::string ckpt = (fs::path(cfg.out_dir) / "checkpoint.bin").string();
        save_checkpoint(ckpt, ps, &adam);
        res.report.checkpoint_path = ckpt;
        write_embeddings_tsv((fs::path(cfg.out_dir) / "embeddings.tsv").string(), res.h_ult);
        {
            std::ofstream out(fs::path(cfg.out_dir) / "loss_log.tsv");
            out.precision(17);
            out << "epoch\ttotal\tlg\tnode\trel\treg\n";
            for (std::size_t e = 0; e < res.report.losses.size(); ++e) {
                const auto& l = res.report.losses[e];
                out << e << "\t" << l.total << "\t" << l.lg << "\t" << l.node << "\t" << l.rel
                    << "\t" << l.reg << "\n";
            }
        }
        if (!g.id_map.empty()) {
            std::ofstream out(fs::path(cfg.out_dir) / "id_map.tsv");
            for (std::size_t i = 0; i < g.id_map.size(); ++i)
                out << i << "\t" << g.id_map[i] << "\n";
        }
        std::ofstream(fs::path(cfg.out_dir) / "train_report.json") << res.report.to_json() << "\n";
    }
    return res;
}

std::string TrainReport::to_json() const {
    json j;
    j["losses"] = json::array();
    for (const auto& l : losses)
        j["losses"].push_back(
            {{"total", l.total}, {"lg", l.lg}, {"node", l.node}, {"rel", l.rel}, {"reg", l.reg}});
    j["best_epoch"] = best_epoch;
    j["best_monitor"] = best_monitor;
    j["wall_time_sec"] = wall_time_sec;
    j["checkpoint_path"] = checkpoint_path;
    j["monitor"] = monitor;
    j["aborted_nonfinite"] = aborted_nonfinite;
    return j.dump(2);
}

void write_embeddings_tsv(const std::string& path, const Tensor& h) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.precision(17);
    for (std::size_t i = 0; i < h.rows(); ++i) {
        out << i;
        for (std::size_t j = 0; j < h.cols(); ++j) out << "\t" << h.at(i, j);
        out << "\n";
    }
}

Tensor read_embeddings_tsv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<double> vals;
    std::size_t rows = 0, cols = 0;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        long id;
        if (!(ss >> id)) continue;
        std::size_t c = 0;
        double v;
        while (ss >> v) {
            vals.push_back(v);
            ++c;
        }
        if (rows == 0)
            cols = c;
        else if (c != cols)
            throw std::runtime_error("embeddings tsv: ragged rows in " + path);
        ++rows;
    }
    return Tensor::from_data({rows, cols}, std::move(vals));
}

}  // namespace gcl
