#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "gcl/contrast.hpp"
#include "gcl/ops.hpp"
#include "gcl/rng.hpp"
#include "oracles.hpp"

using namespace gcl;

namespace {

Tensor rnd(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    return t;
}

oracle::vec to_vec(const Tensor& t) { return oracle::vec(t.data(), t.data() + t.size()); }

HeteroGraph two_relation_graph() {
    SynthSpec spec;
    spec.num_nodes = 10;
    spec.num_classes = 2;
    spec.feature_dim = 3;
    spec.seed = 31;
    spec.metapaths = {{"a", false, 0.6, 0.2, 0.0}, {"b", false, 0.5, 0.3, 0.0}};
    return generate_synthetic(spec);
}

}  // namespace

TEST_CASE("sample_triples: forced rel-negative on a 2-relation graph with one empty relation") {
    HeteroGraph g;
    g.num_nodes = 2;
    g.feature_dim = 1;
    g.features = Tensor::zeros({2, 1});
    g.metapaths.push_back(build_subgraph("r0", 0, 2, {{0, 1}}));
    g.metapaths.push_back(build_subgraph("r1", 1, 2, {}));
    TripleBatch b = sample_triples(g, 20, 5);
    REQUIRE(b.positives.size() == 20);
    for (std::size_t i = 0; i < b.positives.size(); ++i) {
        CHECK(b.positives[i].r == 0);  // only relation with edges
        CHECK(b.rel_neg[i] == 1);      // forced to the single other relation
        CHECK(b.node_neg[i] == -1);    // both nodes adjacent: no unrelated node exists
    }
    CHECK(b.skipped_node_negatives == 20);
}

TEST_CASE("sample_triples: complete subgraph exhausts node negatives with a warning count") {
    HeteroGraph g;
    g.num_nodes = 4;
    g.feature_dim = 1;
    g.features = Tensor::zeros({4, 1});
    g.metapaths.push_back(
        build_subgraph("k4", 0, 4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}));
    TripleBatch b = sample_triples(g, 50, 7);
    CHECK(b.skipped_node_negatives == 50);
}

TEST_CASE("sample_triples invariants: positives are edges, negatives are non-edges") {
    HeteroGraph g = two_relation_graph();
    TripleBatch b = sample_triples(g, 200, 11);
    for (std::size_t i = 0; i < b.positives.size(); ++i) {
        const Triple& t = b.positives[i];
        CHECK(g.metapaths[t.r].has_edge(t.u, t.v));
        if (b.node_neg[i] >= 0) {
            CHECK(b.node_neg[i] != t.u);
            CHECK(!g.metapaths[t.r].has_edge(t.u, b.node_neg[i]));
        }
        CHECK(b.rel_neg[i] != t.r);
        CHECK(b.rel_neg[i] >= 0);
        CHECK(b.rel_neg[i] < 2);
    }
}

TEST_CASE("positive sampling is near-uniform over edges of one relation") {
    HeteroGraph g;
    g.num_nodes = 6;
    g.feature_dim = 1;
    g.features = Tensor::zeros({6, 1});
    g.metapaths.push_back(
        build_subgraph("r", 0, 6, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}}));
    std::map<std::pair<int, int>, long> counts;
    const int rounds = 3000, s = 16;
    for (int r = 0; r < rounds; ++r) {
        TripleBatch b = sample_triples(g, s, 1000 + r);
        for (const Triple& t : b.positives) {
            const int u = std::min(t.u, t.v), v = std::max(t.u, t.v);
            counts[{u, v}]++;
        }
    }
    const double expect = static_cast<double>(rounds) * s / 6.0;
    for (const auto& [e, c] : counts)
        CHECK(std::abs(c / expect - 1.0) < 0.03);
    CHECK(counts.size() == 6);
}

TEST_CASE("discriminator anchors") {
    const std::size_t d = 3;
    Tensor zu = Tensor::from_data({1, d}, {1, 0, 0});
    Tensor zv = Tensor::from_data({1, d}, {1, 0, 0});
    CHECK(d_node(zu, zv, Tensor::zeros({d, d})).item() == 0.5);
    CHECK(d_node(zu, zv, Tensor::eye(d)).item() ==
          doctest::Approx(0.7310585786300049).epsilon(1e-14));

    std::vector<Tensor> w_rel = {Tensor::eye(d), Tensor::eye(d)};
    const double before = d_rel(zu, 1, zv, w_rel).item();
    w_rel[0].data()[0] = 99.0;  // perturbing W_rel^(0) leaves relation 1 untouched
    CHECK(d_rel(zu, 1, zv, w_rel).item() == before);
    CHECK_THROWS_AS(d_rel(zu, 7, zv, w_rel), std::invalid_argument);

    Tensor zg = Tensor::from_data({1, d}, {0, 1, 0});
    CHECK(d_lg(zu, zg, Tensor::zeros({d, d})).item() == 0.5);
}

TEST_CASE("loss_node: ln 2 at zero weights, -> 0 at perfect discrimination, view symmetry") {
    std::mt19937_64 rng(41);
    const std::size_t n = 6, d = 4;
    Tensor z = rnd({n, d}, rng), zt = rnd({n, d}, rng);
    TripleBatch b;
    b.positives = {{0, 0, 1}, {2, 0, 3}};
    b.node_neg = {4, 5};
    b.rel_neg = {-1, -1};

    CHECK(loss_node(b, z, zt, Tensor::zeros({d, d})).item() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));

    // perfect discrimination: push positive logits high, negative logits low
    Tensor e1 = Tensor::zeros({n, d});
    for (std::size_t i = 0; i < 4; ++i) e1.data()[i * d] = 1.0;   // nodes 0..3 at +e1
    for (std::size_t i = 4; i < 6; ++i) e1.data()[i * d] = -1.0;  // negatives at -e1
    Tensor wbig = Tensor::zeros({d, d});
    wbig.data()[0] = 30.0;
    CHECK(loss_node(b, e1, e1, wbig).item() < 1e-6);

    // swapping the two views leaves the value unchanged (multiset of terms)
    Tensor w = rnd({d, d}, rng, 0.5);
    const double fwd = loss_node(b, z, zt, w).item();
    CHECK(loss_node(b, zt, z, w).item() == doctest::Approx(fwd).epsilon(1e-12));
}

TEST_CASE("loss_node equals the unrolled scalar oracle to 1e-12") {
    std::mt19937_64 rng(42);
    const std::size_t n = 3, d = 3;
    Tensor z = rnd({n, d}, rng), zt = rnd({n, d}, rng);
    Tensor w = rnd({d, d}, rng, 0.5);
    TripleBatch b;
    b.positives = {{0, 0, 1}, {1, 0, 2}};
    b.node_neg = {2, 0};
    b.rel_neg = {-1, -1};
    const double got = loss_node(b, z, zt, w).item();
    const double want =
        oracle::loss_node({{0, 1, 2}, {1, 2, 0}}, to_vec(z), to_vec(zt), d, to_vec(w));
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("loss_rel: disabled for one relation, ln 2 at zero, matches the oracle") {
    std::mt19937_64 rng(43);
    const std::size_t n = 5, d = 3;
    Tensor z = rnd({n, d}, rng), zt = rnd({n, d}, rng);
    TripleBatch b;
    b.positives = {{0, 0, 1}, {2, 1, 3}, {1, 1, 4}};
    b.node_neg = {2, 0, 0};
    b.rel_neg = {1, 0, 0};

    CHECK(loss_rel(b, z, zt, {Tensor::zeros({d, d})}).item() == 0.0);  // |R| = 1
    std::vector<Tensor> zeros = {Tensor::zeros({d, d}), Tensor::zeros({d, d})};
    CHECK(loss_rel(b, z, zt, zeros).item() == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    std::vector<Tensor> w_rel = {rnd({d, d}, rng, 0.5), rnd({d, d}, rng, 0.5)};
    const double got = loss_rel(b, z, zt, w_rel).item();
    const double want = oracle::loss_rel({{0, 0, 1, 1}, {2, 1, 3, 0}, {1, 1, 4, 0}}, to_vec(z),
                                         to_vec(zt), d, {to_vec(w_rel[0]), to_vec(w_rel[1])});
    CHECK(got == doctest::Approx(want).epsilon(1e-12));

    // view-swap symmetry, same multiset of terms
    CHECK(loss_rel(b, zt, z, w_rel).item() == doctest::Approx(got).epsilon(1e-12));
}

TEST_CASE("loss_lg: ln 2 at zero weights and oracle equality on a 4-node 2-path instance") {
    std::mt19937_64 rng(44);
    const std::size_t n = 4, d = 3, m = 2;
    LgInputs in;
    for (std::size_t p = 0; p < m; ++p) {
        in.z_path.push_back(rnd({n, d}, rng));
        in.zt_path.push_back(rnd({n, d}, rng));
        in.zg_path.push_back(rnd({1, d}, rng));
        in.ztg_path.push_back(rnd({1, d}, rng));
        in.zneg_path.push_back(rnd({n, d}, rng));
        in.ztneg_path.push_back(rnd({n, d}, rng));
    }
    in.z = rnd({n, d}, rng);
    in.zt = rnd({n, d}, rng);
    in.zg = rnd({1, d}, rng);
    in.ztg = rnd({1, d}, rng);
    in.zneg = rnd({n, d}, rng);
    in.ztneg = rnd({n, d}, rng);

    CHECK(loss_lg(in, Tensor::zeros({d, d})).item() ==
          doctest::Approx(std::log(2.0)).epsilon(1e-14));

    Tensor w = rnd({d, d}, rng, 0.5);
    oracle::LgOracleInputs oin;
    for (std::size_t p = 0; p < m; ++p) {
        oin.z_path.push_back(to_vec(in.z_path[p]));
        oin.zt_path.push_back(to_vec(in.zt_path[p]));
        oin.zg_path.push_back(to_vec(in.zg_path[p]));
        oin.ztg_path.push_back(to_vec(in.ztg_path[p]));
        oin.zneg_path.push_back(to_vec(in.zneg_path[p]));
        oin.ztneg_path.push_back(to_vec(in.ztneg_path[p]));
    }
    oin.z = to_vec(in.z);
    oin.zt = to_vec(in.zt);
    oin.zg = to_vec(in.zg);
    oin.ztg = to_vec(in.ztg);
    oin.zneg = to_vec(in.zneg);
    oin.ztneg = to_vec(in.ztneg);
    CHECK(loss_lg(in, w).item() ==
          doctest::Approx(oracle::loss_lg(oin, n, d, to_vec(w))).epsilon(1e-12));
}

TEST_CASE("loss_reg anchors and oracle equality") {
    std::mt19937_64 rng(45);
    const std::size_t n = 4, d = 3;
    Tensor hult = rnd({n, d}, rng);
    // identical positives and negatives cancel exactly
    CHECK(loss_reg(hult, {hult}, {hult}).item() == 0.0);

    Tensor zeros = Tensor::zeros({n, d});
    Tensor ones = Tensor::full({n, d}, 1.0);
    CHECK(loss_reg(zeros, {zeros}, {ones}).item() == doctest::Approx(-1.0).epsilon(1e-14));

    std::vector<Tensor> hp = {rnd({n, d}, rng), rnd({n, d}, rng)};
    std::vector<Tensor> hn = {rnd({n, d}, rng), rnd({n, d}, rng)};
    const double got = loss_reg(hult, hp, hn).item();
    const double want = oracle::loss_reg(to_vec(hult), {to_vec(hp[0]), to_vec(hp[1])},
                                         {to_vec(hn[0]), to_vec(hn[1])});
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("weighted total: doubling beta doubles the node contribution exactly") {
    std::mt19937_64 rng(46);
    Tensor node_loss = Tensor::scalar(0.837291);
    const double c1 = scalar_mul(node_loss, 0.01).item();
    const double c2 = scalar_mul(node_loss, 0.02).item();
    CHECK(c2 == 2.0 * c1);
    (void)rng;
}
