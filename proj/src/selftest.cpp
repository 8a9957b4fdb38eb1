#include "gcl/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <vector>

#include "gcl/contrast.hpp"
#include "gcl/kernels.hpp"
#include "gcl/manifold.hpp"
#include "gcl/ops.hpp"
#include "gcl/rng.hpp"
#include "gcl/trainer.hpp"

namespace gcl {

namespace {

struct Checker {
    int failures = 0;
    bool verbose = true;

    void check(const char* name, bool ok) {
        if (!ok) ++failures;
        if (verbose || !ok) std::printf("[%s] %s\n", ok ? "ok" : "FAIL", name);
    }
};

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    return t;
}

// FD check of d(sum of c*f(x)) / dx against the tape, one op at a time
bool fd_check(const std::function<Tensor(const Tensor&)>& f, Tensor x, std::mt19937_64& rng,
              double tol = 1e-4) {
    x.set_requires_grad(true);
    tape().clear();
    Tensor out = f(x);
    Tensor weights;
    {
        NoGradGuard ng;
        weights = random_tensor(out.shape(), rng);
    }
    Tensor loss = sum(hadamard(out, weights));
    x.zero_grad();
    backward(loss);
    const std::vector<double> analytic = x.grad_vector();

    const double h = 1e-5;
    NoGradGuard ng;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + h;
        const double up = sum(hadamard(f(x), weights)).item();
        x.data()[i] = keep - h;
        const double dn = sum(hadamard(f(x), weights)).item();
        x.data()[i] = keep;
        const double fd = (up - dn) / (2 * h);
        const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
        if (std::abs(fd - analytic[i]) / denom > tol) return false;
    }
    return true;
}

MetaPathSubgraph path_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
    return build_subgraph("path", 0, n, e);
}

MetaPathSubgraph cycle_graph(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
    return build_subgraph("cycle", 0, n, e);
}

}  // namespace

int selftest(bool verbose) {
    Checker ck;
    ck.verbose = verbose;
    std::mt19937_64 rng = make_rng(20240801);

    // ---- kernel parity: OpenMP path == serial reference, bit for bit ----
    {
        const std::size_t n = 37, k = 23, p = 19;
        Tensor a = random_tensor({n, k}, rng), b = random_tensor({k, p}, rng);
        std::vector<double> c1(n * p), c2(n * p);
        kernels::matmul(a.data(), b.data(), c1.data(), n, k, p);
        kernels::matmul_serial(a.data(), b.data(), c2.data(), n, k, p);
        ck.check("kernels.matmul parity", c1 == c2);

        MetaPathSubgraph g = cycle_graph(static_cast<int>(n));
        Tensor x = random_tensor({n, k}, rng);
        std::vector<double> y1(n * k), y2(n * k);
        kernels::neighbor_aggregate(g.indptr.data(), g.indices.data(), x.data(), y1.data(), n, k,
                                    true);
        kernels::neighbor_aggregate_serial(g.indptr.data(), g.indices.data(), x.data(), y2.data(),
                                           n, k, true);
        ck.check("kernels.neighbor_aggregate parity", y1 == y2);

        std::vector<std::uint16_t> d1(n * n), d2(n * n);
        kernels::bfs_all_pairs(g.indptr.data(), g.indices.data(), n, d1.data());
        kernels::bfs_all_pairs_serial(g.indptr.data(), g.indices.data(), n, d2.data());
        ck.check("kernels.bfs parity", d1 == d2);

        std::vector<int> nodes(n);
        for (std::size_t i = 0; i < n; ++i) nodes[i] = static_cast<int>(i);
        ck.check("kernels.four_point parity",
                 kernels::four_point_delta(d1.data(), n, nodes.data(), n) ==
                     kernels::four_point_delta_serial(d1.data(), n, nodes.data(), n));
    }

    // ---- gradient checks on the core ops ----
    {
        auto seeded = [&](auto f, Shape shape, double scale, const char* name, double tol = 1e-4) {
            Tensor x = random_tensor(shape, rng, scale);
            ck.check(name, fd_check(f, x, rng, tol));
        };
        Tensor m = random_tensor({4, 3}, rng);
        seeded([&](const Tensor& x) { return matmul(x, m); }, {5, 4}, 1.0, "grad.matmul");
        seeded([](const Tensor& x) { return relu(x); }, {4, 4}, 1.0, "grad.relu");
        seeded([](const Tensor& x) { return sigmoid(x); }, {4, 4}, 2.0, "grad.sigmoid");
        seeded([](const Tensor& x) { return gcl::tanh(x); }, {4, 4}, 2.0, "grad.tanh");
        seeded([](const Tensor& x) { return artanh(x); }, {4, 4}, 0.8, "grad.artanh");
        seeded([](const Tensor& x) { return softmax_rows(x); }, {4, 5}, 2.0, "grad.softmax_rows");
        seeded([](const Tensor& x) { return l2_norm_rows(x, 1e-15); }, {4, 3}, 1.0,
               "grad.l2_norm_rows");
        BallConfig ball;
        seeded([&](const Tensor& x) { return exp0(x, ball); }, {5, 3}, 1.0, "grad.exp0");
        Tensor w = random_tensor({3, 3}, rng, 0.5);
        seeded([&](const Tensor& x) { return mobius_matvec(project_to_ball(x, ball), w, ball); },
               {5, 3}, 0.4, "grad.mobius_matvec");
    }

    // ---- manifold identities ----
    {
        BallConfig ball;
        const std::size_t n = 200, d = 8;
        Tensor x = project_to_ball(random_tensor({n, d}, rng, 0.3), ball);
        Tensor y = project_to_ball(random_tensor({n, d}, rng, 0.3), ball);
        Tensor zero = Tensor::zeros({n, d});

        auto max_abs = [](const Tensor& t) {
            double mx = 0;
            for (std::size_t i = 0; i < t.size(); ++i) mx = std::max(mx, std::abs(t.data()[i]));
            return mx;
        };
        ck.check("manifold.right_identity", max_abs(sub(mobius_add(x, zero, ball), x)) < 1e-8);
        ck.check("manifold.left_inverse", max_abs(mobius_add(neg(x), x, ball)) < 1e-8);
        Tensor v = random_tensor({n, d}, rng, 0.5);
        ck.check("manifold.exp_log_inverse", max_abs(sub(log0(exp0(v, ball), ball), v)) < 1e-8);
        ck.check("manifold.noncommutative",
                 max_abs(sub(mobius_add(x, y, ball), mobius_add(y, x, ball))) > 1e-3);
        BallConfig flat{1e-6, 1e-5};
        ck.check("manifold.euclidean_limit_add",
                 max_abs(sub(mobius_add(x, y, flat), add(x, y))) < 1e-4);
        ck.check("manifold.euclidean_limit_exp0", max_abs(sub(exp0(v, flat), v)) < 1e-4);
    }

    // ---- calibration: all-zero discriminators give exactly ln 2 ----
    {
        const std::size_t n = 6, d = 4;
        SynthSpec spec;
        spec.num_nodes = n;
        spec.num_classes = 2;
        spec.feature_dim = 3;
        spec.seed = 5;
        spec.metapaths = {{"a", false, 0.9, 0.3, 0.0}, {"b", false, 0.8, 0.4, 0.0}};
        HeteroGraph g = generate_synthetic(spec);
        TrainConfig cfg;
        cfg.dim = d;
        cfg.beta = 1;
        cfg.lambda = 1;
        cfg.gamma = 0;
        cfg.sample_size = 8;
        cfg.dropout = 0;
        EncoderParams enc;
        DiscrParams discr;
        init_params(g.feature_dim, g.metapaths.size(), cfg, enc, discr);
        for (auto* t : {&discr.w_node, &discr.w_lg, &discr.w_rel[0], &discr.w_rel[1]})
            for (std::size_t i = 0; i < t->size(); ++i) t->data()[i] = 0.0;
        EpochContext ctx = make_epoch_context(g, cfg, 0);
        NoGradGuard ng;
        LossParts parts = compute_losses(ctx, enc, discr, cfg);
        const double ln2 = std::log(2.0);
        ck.check("contrast.ln2_node", std::abs(parts.node.item() - ln2) < 1e-12);
        ck.check("contrast.ln2_rel", std::abs(parts.rel.item() - ln2) < 1e-12);
        ck.check("contrast.ln2_lg", std::abs(parts.lg.item() - ln2) < 1e-12);
    }

    // ---- hyperbolicity anchors ----
    {
        ck.check("hyperbolicity.path5", gromov_hyperbolicity(path_graph(5)).delta == 0.0);
        ck.check("hyperbolicity.c4", gromov_hyperbolicity(cycle_graph(4)).delta == 1.0);
        SynthSpec spec;
        spec.num_nodes = 15;
        spec.num_classes = 2;
        spec.feature_dim = 2;
        spec.metapaths = {{"t", true, 0, 0, 0}};
        HeteroGraph g = generate_synthetic(spec);
        ck.check("hyperbolicity.tree", gromov_hyperbolicity(g.metapaths[0]).delta == 0.0);
    }

    // ---- augmentation invariants ----
    {
        SynthSpec spec;
        spec.num_nodes = 30;
        spec.num_classes = 3;
        spec.feature_dim = 8;
        spec.seed = 11;
        spec.metapaths = {{"a", false, 0.5, 0.1, 0.0}};
        HeteroGraph g = generate_synthetic(spec);
        GraphView v = make_view(g, {0.0, 0.0, 123});
        ck.check("augment.zero_prob_identity",
                 v.features.same_storage(g.features) &&
                     v.metapaths[0].indices == g.metapaths[0].indices);
        GraphView w = make_view(g, {0.3, 0.4, 77});
        bool subset = true;
        const auto& mp = w.metapaths[0];
        for (std::size_t u = 0; u < g.num_nodes && subset; ++u)
            for (int e = mp.indptr[u]; e < mp.indptr[u + 1]; ++e)
                if (!g.metapaths[0].has_edge(static_cast<int>(u), mp.indices[e])) subset = false;
        ck.check("augment.subgraph", subset);
    }

    // ---- determinism of a short training run ----
    {
        SynthSpec spec;
        spec.num_nodes = 24;
        spec.num_classes = 2;
        spec.feature_dim = 6;
        spec.seed = 3;
        spec.metapaths = {{"a", false, 0.5, 0.1, 0.0}, {"t", true, 0, 0, 0.05}};
        HeteroGraph g = generate_synthetic(spec);
        TrainConfig cfg;
        cfg.dim = 8;
        cfg.epochs_max = 4;
        cfg.beta = 0.1;
        cfg.lambda = 0.1;
        cfg.gamma = 1.0;
        cfg.sample_size = 16;
        cfg.dropout = 0.5;
        cfg.seed = 9;
        TrainResult r1 = train(g, cfg);
        TrainResult r2 = train(g, cfg);
        bool same = r1.report.losses.size() == r2.report.losses.size();
        for (std::size_t e = 0; same && e < r1.report.losses.size(); ++e)
            same = r1.report.losses[e].total == r2.report.losses[e].total;
        for (std::size_t i = 0; same && i < r1.h_ult.size(); ++i)
            same = r1.h_ult.data()[i] == r2.h_ult.data()[i];
        ck.check("trainer.determinism", same);
    }

    if (ck.failures) std::printf("selftest: %d check(s) FAILED\n", ck.failures);
    else std::printf("selftest: all checks passed\n");
    return ck.failures;
}

}  // namespace gcl
