#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "gcl/hetgraph.hpp"
#include "oracles.hpp"

using namespace gcl;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

void write_minimal(const fs::path& dir, const std::string& edges, int num_nodes = 3,
                   const std::string& feats = "1 0\n0 1\n1 1\n") {
    write_file(dir / "graph.meta",
               R"({"num_nodes":)" + std::to_string(num_nodes) +
                   R"(,"feature_dim":2,"features":"features.tsv","labels":null,"splits":null,)"
                   R"("metapaths":[{"name":"mp","relation_id":0,"edges":"edges_mp.tsv"}]})");
    write_file(dir / "features.tsv", feats);
    write_file(dir / "edges_mp.tsv", edges);
}

std::vector<int> neighbors(const MetaPathSubgraph& g, int u) {
    return std::vector<int>(g.indices.begin() + g.indptr[u], g.indices.begin() + g.indptr[u + 1]);
}

}  // namespace

TEST_CASE("loader builds sorted symmetric neighbor lists") {
    TempDir td("gcl_load_basic");
    write_minimal(td.path, "0 1\n1 2\n");
    HeteroGraph g = load_dataset(td.path.string());
    CHECK(g.num_nodes == 3);
    CHECK(neighbors(g.metapaths[0], 0) == std::vector<int>{1});
    CHECK(neighbors(g.metapaths[0], 1) == std::vector<int>{0, 2});
    CHECK(neighbors(g.metapaths[0], 2) == std::vector<int>{1});
}

TEST_CASE("self loops are dropped with a warning; duplicates are merged") {
    TempDir td("gcl_load_selfloop");
    write_minimal(td.path, "0 0\n0 1\n1 0\n");
    HeteroGraph g = load_dataset(td.path.string());
    CHECK(!g.load_warnings.empty());
    CHECK(neighbors(g.metapaths[0], 0) == std::vector<int>{1});
    CHECK(g.metapaths[0].num_edges() == 1);
}

TEST_CASE("loader errors: row count, missing file, malformed line, endpoint") {
    {
        TempDir td("gcl_load_rows");
        write_minimal(td.path, "0 1\n", 3, "1 0\n0 1\n");
        CHECK_THROWS_WITH_AS(load_dataset(td.path.string()),
                             doctest::Contains("feature row count mismatch"), std::runtime_error);
    }
    {
        TempDir td("gcl_load_missing");
        write_minimal(td.path, "0 1\n");
        fs::remove(td.path / "edges_mp.tsv");
        CHECK_THROWS_WITH_AS(load_dataset(td.path.string()), doctest::Contains("missing file"),
                             std::runtime_error);
    }
    {
        TempDir td("gcl_load_malformed");
        write_minimal(td.path, "0 1\n1 x y\n");
        CHECK_THROWS_WITH_AS(load_dataset(td.path.string()),
                             doctest::Contains("edges_mp.tsv:2"), std::runtime_error);
    }
    {
        TempDir td("gcl_load_endpoint");
        // ids 0..4 with num_nodes=3: densification needs 5 slots -> error
        write_minimal(td.path, "0 1\n2 3\n3 4\n");
        CHECK_THROWS_WITH_AS(load_dataset(td.path.string()), doctest::Contains("num_nodes"),
                             std::runtime_error);
    }
}

TEST_CASE("sparse ids densify in file order with a recorded mapping") {
    TempDir td("gcl_load_sparse");
    write_minimal(td.path, "10 20\n20 30\n");
    HeteroGraph g = load_dataset(td.path.string());
    CHECK(g.id_map == std::vector<int>{10, 20, 30});
    CHECK(neighbors(g.metapaths[0], 1) == std::vector<int>{0, 2});
}

TEST_CASE("save/load round-trips to identical arrays") {
    SynthSpec spec;
    spec.num_nodes = 40;
    spec.num_classes = 3;
    spec.feature_dim = 5;
    spec.seed = 17;
    spec.metapaths = {{"a", false, 0.3, 0.05, 0.0}, {"t", true, 0, 0, 0.1}};
    HeteroGraph g = generate_synthetic(spec);

    TempDir td("gcl_roundtrip");
    save_dataset(td.path.string(), g);
    HeteroGraph g2 = load_dataset(td.path.string());
    CHECK(g2.num_nodes == g.num_nodes);
    CHECK(g2.labels == g.labels);
    CHECK(g2.splits == g.splits);
    REQUIRE(g2.metapaths.size() == g.metapaths.size());
    for (std::size_t m = 0; m < g.metapaths.size(); ++m) {
        CHECK(g2.metapaths[m].indptr == g.metapaths[m].indptr);
        CHECK(g2.metapaths[m].indices == g.metapaths[m].indices);
    }
    for (std::size_t i = 0; i < g.features.size(); ++i)
        CHECK(g2.features.data()[i] == g.features.data()[i]);
}

TEST_CASE("every loaded subgraph is symmetric (j in N_i <=> i in N_j)") {
    SynthSpec spec;
    spec.num_nodes = 30;
    spec.num_classes = 2;
    spec.feature_dim = 3;
    spec.seed = 4;
    spec.metapaths = {{"a", false, 0.4, 0.2, 0.0}};
    HeteroGraph g = generate_synthetic(spec);
    const auto& mp = g.metapaths[0];
    for (int u = 0; u < 30; ++u)
        for (int v : neighbors(mp, u)) CHECK(mp.has_edge(v, u));
}

TEST_CASE("degenerate SBM: p_intra=1, p_inter=0 on 4 nodes gives two 2-cliques") {
    SynthSpec spec;
    spec.num_nodes = 4;
    spec.num_classes = 2;
    spec.feature_dim = 2;
    spec.metapaths = {{"a", false, 1.0, 0.0, 0.0}};
    HeteroGraph g = generate_synthetic(spec);
    CHECK(neighbors(g.metapaths[0], 0) == std::vector<int>{1});
    CHECK(neighbors(g.metapaths[0], 1) == std::vector<int>{0});
    CHECK(neighbors(g.metapaths[0], 2) == std::vector<int>{3});
    CHECK(neighbors(g.metapaths[0], 3) == std::vector<int>{2});
}

TEST_CASE("tree metapath on 7 nodes is the balanced heap tree with delta 0") {
    SynthSpec spec;
    spec.num_nodes = 7;
    spec.num_classes = 2;
    spec.feature_dim = 2;
    spec.metapaths = {{"t", true, 0, 0, 0.0}};
    HeteroGraph g = generate_synthetic(spec);
    const auto& mp = g.metapaths[0];
    CHECK(mp.num_edges() == 6);
    for (int i = 1; i < 7; ++i) CHECK(mp.has_edge(i, (i - 1) / 2));
    CHECK(gromov_hyperbolicity(mp).delta == 0.0);
}

TEST_CASE("generator is deterministic and validates probabilities") {
    SynthSpec spec;
    spec.num_nodes = 25;
    spec.num_classes = 3;
    spec.feature_dim = 4;
    spec.seed = 99;
    spec.metapaths = {{"a", false, 0.5, 0.1, 0.0}};
    HeteroGraph g1 = generate_synthetic(spec);
    HeteroGraph g2 = generate_synthetic(spec);
    CHECK(g1.metapaths[0].indices == g2.metapaths[0].indices);
    for (std::size_t i = 0; i < g1.features.size(); ++i)
        CHECK(g1.features.data()[i] == g2.features.data()[i]);
    CHECK(g1.splits == g2.splits);

    spec.metapaths[0].p_intra = 1.5;
    CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
    spec.metapaths[0].p_intra = 0.5;
    spec.num_classes = 30;  // > num_nodes
    CHECK_THROWS_AS(generate_synthetic(spec), std::invalid_argument);
}

TEST_CASE("hyperbolicity anchors: path 0, C4 = 1, trees 0") {
    {
        std::vector<std::pair<int, int>> e;
        for (int i = 0; i + 1 < 5; ++i) e.emplace_back(i, i + 1);
        CHECK(gromov_hyperbolicity(build_subgraph("p", 0, 5, e)).delta == 0.0);
    }
    {
        const std::vector<std::pair<int, int>> e = {{0, 1}, {1, 2}, {2, 3}, {3, 0}};
        CHECK(gromov_hyperbolicity(build_subgraph("c4", 0, 4, e)).delta == 1.0);
    }
}

TEST_CASE("hyperbolicity is invariant under 10 random relabelings") {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> coin(0, 1);
    const int n = 18;
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (coin(rng) < 0.25) edges.emplace_back(i, j);
    const double base = gromov_hyperbolicity(build_subgraph("g", 0, n, edges)).delta;
    CHECK(base >= 0.0);
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<std::pair<int, int>> relabeled;
        for (auto [u, v] : edges) relabeled.emplace_back(perm[u], perm[v]);
        CHECK(gromov_hyperbolicity(build_subgraph("g", 0, n, relabeled)).delta == base);
    }
}

TEST_CASE("hyperbolicity edge cases: small components and the size cap") {
    const std::vector<std::pair<int, int>> tiny = {{0, 1}, {1, 2}};
    HyperbolicityResult r = gromov_hyperbolicity(build_subgraph("t", 0, 3, tiny));
    CHECK(r.degenerate);
    CHECK(r.delta == 0.0);

    // disconnected: restrict to largest component (the 4-cycle, not the pair)
    const std::vector<std::pair<int, int>> mix = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}};
    HyperbolicityResult r2 = gromov_hyperbolicity(build_subgraph("m", 0, 6, mix));
    CHECK(r2.component_size == 4);
    CHECK(r2.delta == 1.0);

    std::vector<std::pair<int, int>> big;
    for (int i = 0; i + 1 < 30; ++i) big.emplace_back(i, i + 1);
    CHECK_THROWS_WITH_AS(gromov_hyperbolicity(build_subgraph("b", 0, 30, big), 10),
                         doctest::Contains("cap"), std::runtime_error);
}

TEST_CASE("validate() rejects broken invariants") {
    SynthSpec spec;
    spec.num_nodes = 6;
    spec.num_classes = 2;
    spec.feature_dim = 2;
    spec.metapaths = {{"a", false, 0.8, 0.2, 0.0}};
    HeteroGraph g = generate_synthetic(spec);
    CHECK_NOTHROW(g.validate());
    HeteroGraph broken = g;
    broken.metapaths[0].relation_id = 5;  // not dense
    CHECK_THROWS(broken.validate());
}
