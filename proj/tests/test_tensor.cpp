#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "gcl/adam.hpp"
#include "gcl/checkpoint.hpp"
#include "gcl/hetgraph.hpp"
#include "gcl/ops.hpp"
#include "gcl/rng.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace gcl;

namespace {

Tensor rnd(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Tensor t = Tensor::zeros(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = u(rng);
    return t;
}

}  // namespace

TEST_CASE("checked constructor rejects non-finite data and size mismatches") {
    CHECK_THROWS(Tensor::from_data({2}, {1.0, std::nan("")}));
    CHECK_THROWS(Tensor::from_data({2}, {1.0}));
    CHECK_NOTHROW(Tensor::from_data({2}, {1.0, -2.0}));
}

TEST_CASE("forward anchor values") {
    Tensor a = Tensor::from_data({2, 2}, {1, 2, 3, 4});
    Tensor out = matmul(a, Tensor::eye(2));
    for (std::size_t i = 0; i < 4; ++i) CHECK(out.data()[i] == a.data()[i]);

    Tensor s = softmax_rows(Tensor::from_data({1, 2}, {0, 0}));
    CHECK(s.data()[0] == doctest::Approx(0.5));
    CHECK(s.data()[1] == doctest::Approx(0.5));

    CHECK(sigmoid(Tensor::scalar(0.0)).item() == doctest::Approx(0.5));
}

TEST_CASE("backward basics: linearity and d(x^2)") {
    Tensor x = Tensor::from_data({3}, {1, 2, 3}).set_requires_grad(true);
    tape().clear();
    backward(sum(x));
    for (std::size_t i = 0; i < 3; ++i) CHECK(x.grad()[i] == 1.0);

    Tensor y = Tensor::from_data({2}, {1, 2}).set_requires_grad(true);
    tape().clear();
    backward(sum(hadamard(y, y)));
    CHECK(y.grad()[0] == 2.0);
    CHECK(y.grad()[1] == 4.0);
}

TEST_CASE("backward validates its preconditions") {
    Tensor x = Tensor::from_data({2}, {1, 2}).set_requires_grad(true);
    tape().clear();
    Tensor v = hadamard(x, x);
    CHECK_THROWS(backward(v));  // non-scalar loss
    tape().clear();
    CHECK_THROWS(backward(Tensor::scalar(1.0)));  // empty tape
}

TEST_CASE("gradients accumulate (+=) across sweeps") {
    Tensor x = Tensor::from_data({2}, {1, 2}).set_requires_grad(true);
    tape().clear();
    backward(sum(x));
    tape().clear();
    backward(sum(x));
    CHECK(x.grad()[0] == 2.0);
}

TEST_CASE("finite differences agree with the tape for every core op") {
    std::mt19937_64 rng(42);
    Tensor m = rnd({4, 3}, rng);
    Tensor bvec = rnd({1, 3}, rng);
    Tensor svec = rnd({5, 1}, rng);
    std::vector<int> idx = {0, 2, 2, 4, 1};
    MetaPathSubgraph csr =
        build_subgraph("t", 0, 5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {0, 4}, {1, 4}});

    struct Case {
        const char* name;
        Shape shape;
        double scale;
        std::function<Tensor(const Tensor&)> fn;
    };
    const std::vector<Case> cases = {
        {"matmul_l", {5, 4}, 1.0, [&](const Tensor& x) { return matmul(x, m); }},
        {"matmul_r", {3, 5}, 1.0, [&](const Tensor& x) { return matmul(m, x); }},
        {"transpose", {4, 3}, 1.0, [](const Tensor& x) { return transpose(x); }},
        {"add", {3, 4}, 1.0, [](const Tensor& x) { return add(x, x); }},
        {"sub", {3, 4}, 1.0, [](const Tensor& x) { return sub(scalar_mul(x, 2.0), x); }},
        {"hadamard", {3, 4}, 1.0, [](const Tensor& x) { return hadamard(x, x); }},
        {"div", {4, 3}, 1.0,
         [&](const Tensor& x) { return div(m, add(hadamard(x, x), Tensor::full({4, 3}, 0.5))); }},
        {"scalar_mul", {3, 4}, 1.0, [](const Tensor& x) { return scalar_mul(x, -2.5); }},
        {"add_rowvec_a", {5, 3}, 1.0, [&](const Tensor& x) { return add_rowvec(x, bvec); }},
        {"add_rowvec_b", {1, 3}, 1.0,
         [&](const Tensor& x) { return add_rowvec(m, x); }},
        {"repeat_rows", {1, 4}, 1.0, [](const Tensor& x) { return repeat_rows(x, 6); }},
        {"colscale_a", {5, 3}, 1.0, [&](const Tensor& x) { return colscale(x, svec); }},
        {"colscale_s", {4, 1}, 1.0, [&](const Tensor& x) { return colscale(m, x); }},
        {"mean", {4, 4}, 1.0, [](const Tensor& x) { return mean(x); }},
        {"rowsum", {4, 3}, 1.0, [](const Tensor& x) { return rowsum(x); }},
        {"rowdot", {4, 3}, 1.0, [](const Tensor& x) { return rowdot(x, x); }},
        {"colmean", {4, 3}, 1.0, [](const Tensor& x) { return colmean(x); }},
        {"l2_norm_rows", {4, 3}, 1.0, [](const Tensor& x) { return l2_norm_rows(x, 1e-15); }},
        {"concat_rows", {2, 3}, 1.0,
         [](const Tensor& x) { return concat_rows({x, scalar_mul(x, 2.0)}); }},
        {"concat_cols", {3, 2}, 1.0,
         [](const Tensor& x) { return concat_cols({x, scalar_mul(x, -1.0)}); }},
        {"col", {4, 3}, 1.0, [](const Tensor& x) { return col(x, 1); }},
        {"relu", {4, 4}, 1.0, [](const Tensor& x) { return relu(x); }},
        {"sigmoid", {4, 4}, 2.0, [](const Tensor& x) { return sigmoid(x); }},
        {"tanh", {4, 4}, 2.0, [](const Tensor& x) { return gcl::tanh(x); }},
        {"artanh", {4, 4}, 0.8, [](const Tensor& x) { return artanh(x); }},
        {"exp", {4, 4}, 1.0, [](const Tensor& x) { return gcl::exp(x); }},
        {"log", {4, 4}, 1.0,
         [](const Tensor& x) {
             return gcl::log(add(hadamard(x, x), Tensor::full(x.shape(), 0.3)));
         }},
        {"reciprocal", {4, 4}, 1.0,
         [](const Tensor& x) {
             return reciprocal(add(hadamard(x, x), Tensor::full(x.shape(), 0.5)));
         }},
        {"softmax_rows", {4, 5}, 2.0, [](const Tensor& x) { return softmax_rows(x); }},
        {"dropout", {6, 4}, 1.0, [](const Tensor& x) { return dropout(x, 0.3, 99); }},
        {"gather_rows", {5, 3}, 1.0, [&](const Tensor& x) { return gather_rows(x, idx); }},
        {"neighbor_agg_mean", {5, 3}, 1.0,
         [&](const Tensor& x) { return neighbor_agg(x, csr.indptr, csr.indices, true); }},
        {"neighbor_agg_sum", {5, 3}, 1.0,
         [&](const Tensor& x) { return neighbor_agg(x, csr.indptr, csr.indices, false); }},
    };

    for (const auto& c : cases) {
        CAPTURE(c.name);
        std::mt19937_64 r2(mix64(std::hash<std::string>{}(c.name)));
        Tensor x = rnd(c.shape, r2, c.scale).set_requires_grad(true);
        Tensor w;
        {
            NoGradGuard ng;
            w = rnd(c.fn(x).shape(), r2);
        }
        const double err = testutil::grad_rel_err([&] { return sum(hadamard(c.fn(x), w)); }, x);
        CHECK_MESSAGE(err <= 1e-4, c.name << " rel err " << err);
    }

    // bce_with_logits, unweighted and weighted
    {
        std::mt19937_64 r2(77);
        Tensor x = rnd({6, 1}, r2, 2.0).set_requires_grad(true);
        Tensor t = Tensor::from_data({6, 1}, {1, 0, 1, 0, 1, 1});
        CHECK(testutil::grad_rel_err([&] { return bce_with_logits(x, t); }, x) <= 1e-4);
        Tensor w = Tensor::from_data({6, 1}, {0.5, 1, 2, 1, 0.25, 1});
        CHECK(testutil::grad_rel_err([&] { return bce_with_logits(x, t, w); }, x) <= 1e-4);
    }
}

TEST_CASE("domain errors name the op and the offending extremum") {
    Tensor bad = Tensor::from_data({2}, {0.5, 1.5});
    CHECK_THROWS_WITH_AS(artanh(bad), doctest::Contains("artanh"), std::domain_error);
    Tensor negv = Tensor::from_data({2}, {1.0, -3.0});
    CHECK_THROWS_WITH_AS(gcl::log(negv), doctest::Contains("log"), std::domain_error);
    CHECK_THROWS_AS(dropout(negv, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(matmul(Tensor::zeros({2, 3}), Tensor::zeros({2, 3})), std::invalid_argument);
}

TEST_CASE("bce at zero logits is exactly ln 2") {
    Tensor x = Tensor::zeros({5, 1});
    Tensor t = Tensor::from_data({5, 1}, {1, 0, 1, 0, 1});
    CHECK(bce_with_logits(x, t).item() == std::log(2.0));
}

TEST_CASE("dropout: identity at 0, deterministic, unbiased, scaled") {
    std::mt19937_64 rng(5);
    Tensor x = rnd({20, 10}, rng);
    CHECK(dropout(x, 0.0, 7).same_storage(x));

    Tensor a = dropout(x, 0.5, 123), b = dropout(x, 0.5, 123);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.data()[i] == b.data()[i]);
    for (std::size_t i = 0; i < a.size(); ++i)
        CHECK((a.data()[i] == 0.0 || a.data()[i] == doctest::Approx(2.0 * x.data()[i])));

    Tensor ones = Tensor::full({10, 10}, 1.0);
    double acc = 0.0;
    const int trials = 10000;
    for (int s = 0; s < trials; ++s) acc += mean(dropout(ones, 0.3, 1000 + s)).item();
    CHECK(acc / trials == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("adam: no-op on zero grad, descends, matches the scalar reference") {
    {
        ParamSet ps;
        ps.add("w", Tensor::from_data({2}, {1.0, -2.0}));
        Adam adam(ps, {});
        ps.zero_grad();
        adam.step();
        CHECK(ps.items()[0].tensor.data()[0] == 1.0);
        CHECK(ps.items()[0].tensor.data()[1] == -2.0);
    }
    {
        ParamSet ps;
        ps.add("w", Tensor::from_data({1}, {1.0}));
        AdamConfig cfg;
        cfg.lr = 0.1;
        Adam adam(ps, cfg);
        Tensor w = ps.items()[0].tensor;
        tape().clear();
        backward(sum(hadamard(w, w)));
        adam.step();
        CHECK(w.data()[0] < 1.0);
    }
    {
        // 200 steps on f(w) = 3 w0^2 + 0.5 w1^2
        ParamSet ps;
        ps.add("w", Tensor::from_data({1, 2}, {1.5, -2.0}));
        AdamConfig cfg;
        cfg.lr = 0.05;
        Adam adam(ps, cfg);
        Tensor w = ps.items()[0].tensor;
        oracle::RefAdam ref(2);
        ref.lr = 0.05;
        oracle::vec rw = {1.5, -2.0};
        auto loss_of = [](double a, double b) { return 3 * a * a + 0.5 * b * b; };
        const double init = loss_of(rw[0], rw[1]);
        Tensor coef = Tensor::from_data({1, 2}, {3.0, 0.5});
        for (int step = 0; step < 200; ++step) {
            tape().clear();
            ps.zero_grad();
            backward(sum(hadamard(coef, hadamard(w, w))));
            adam.step();
            ref.step(rw, {6 * rw[0], 1 * rw[1]});
        }
        CHECK(w.data()[0] == doctest::Approx(rw[0]).epsilon(1e-10));
        CHECK(w.data()[1] == doctest::Approx(rw[1]).epsilon(1e-10));
        CHECK(loss_of(w.data()[0], w.data()[1]) <= 1e-3 * init);
    }
    {
        ParamSet ps;
        ps.add("theta", Tensor::from_data({1}, {1.0}));
        Adam adam(ps, {});
        Tensor w = ps.items()[0].tensor;
        w.grad()[0] = std::numeric_limits<double>::infinity();
        CHECK_THROWS_WITH_AS(adam.step(), doctest::Contains("theta"), std::runtime_error);
        CHECK(w.data()[0] == 1.0);
    }
}

TEST_CASE("checkpoint container round-trips parameters and optimizer state") {
    std::mt19937_64 rng(9);
    ParamSet ps;
    ps.add("a", rnd({3, 4}, rng));
    ps.add("b.long.name", rnd({7}, rng));
    AdamConfig acfg;
    acfg.lr = 0.01;
    acfg.weight_decay = 1e-4;
    Adam adam(ps, acfg);
    for (int s = 0; s < 2; ++s) {
        for (const auto& it : ps.items()) {
            Tensor t = it.tensor;
            for (std::size_t i = 0; i < t.size(); ++i) t.grad()[i] = 0.1 * (i + 1);
        }
        adam.step();
        ps.zero_grad();
    }
    const std::string path = "ckpt_test.bin";
    save_checkpoint(path, ps, &adam);

    ParamSet ps2;
    ps2.add("a", Tensor::zeros({3, 4}));
    ps2.add("b.long.name", Tensor::zeros({7}));
    Adam adam2(ps2, acfg);
    load_checkpoint(path, ps2, &adam2);
    for (std::size_t pi = 0; pi < 2; ++pi)
        for (std::size_t i = 0; i < ps.items()[pi].tensor.size(); ++i)
            CHECK(ps.items()[pi].tensor.data()[i] == ps2.items()[pi].tensor.data()[i]);
    CHECK(adam2.step_count() == 2);
    CHECK(adam.moments1() == adam2.moments1());
    CHECK(adam.moments2() == adam2.moments2());

    const auto table = peek_checkpoint(path);
    REQUIRE(table.size() == 2);
    CHECK(table[0].first == "a");
    CHECK(table[1].second == Shape{7});

    ParamSet wrong;
    wrong.add("a", Tensor::zeros({3, 4}));
    CHECK_THROWS(load_checkpoint(path, wrong));
    std::remove(path.c_str());
}

TEST_CASE("single-thread determinism of a composite forward/backward") {
    auto run = [] {
        std::mt19937_64 rng(31);
        Tensor x = rnd({8, 6}, rng).set_requires_grad(true);
        Tensor w = rnd({6, 6}, rng).set_requires_grad(true);
        tape().clear();
        Tensor out = softmax_rows(matmul(relu(matmul(x, w)), transpose(w)));
        Tensor loss = mean(hadamard(out, out));
        backward(loss);
        std::vector<double> sig;
        sig.push_back(loss.item());
        const auto g = x.grad_vector();
        sig.insert(sig.end(), g.begin(), g.end());
        return sig;
    };
    CHECK(run() == run());
}
