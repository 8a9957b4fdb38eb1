#include <doctest.h>

#include <cmath>
#include <random>

#include "gcl/evalkit.hpp"
#include "gcl/ops.hpp"
#include "gcl/rng.hpp"

using namespace gcl;

namespace {

// two clean clusters at +/- e1 with balanced labels and splits
struct Separable {
    Tensor h;
    std::vector<int> labels;
    std::vector<Split> splits;
};

Separable separable(std::size_t n = 40, std::size_t d = 4) {
    Separable s;
    s.h = Tensor::zeros({n, d});
    s.labels.resize(n);
    s.splits.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int cls = i % 2;
        s.h.data()[i * d] = cls == 0 ? 1.0 : -1.0;
        s.h.data()[i * d + 1] = 0.01 * static_cast<double>(i % 5);  // break exact duplicates
        s.labels[i] = cls;
        s.splits[i] = (i < n / 2) ? Split::kTrain : Split::kTest;
    }
    return s;
}

}  // namespace

TEST_CASE("logistic probe: separable clusters reach F1 = 1 on both metrics") {
    Separable s = separable();
    ProbeResult r = logistic_probe(s.h, s.labels, s.splits, 10, 1);
    CHECK(r.macro_f1_mean == doctest::Approx(1.0));
    CHECK(r.micro_f1_mean == doctest::Approx(1.0));
    CHECK(r.macro_f1_std == doctest::Approx(0.0));
}

TEST_CASE("logistic probe: random labels on balanced classes sit at chance level") {
    const std::size_t n = 200, d = 6;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(-1, 1);
    Tensor h = Tensor::zeros({n, d});
    for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = u(rng);
    std::vector<int> labels(n);
    std::vector<Split> splits(n);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<int>(i % 2);
        splits[i] = (i % 4 < 2) ? Split::kTrain : Split::kTest;
    }
    std::shuffle(labels.begin(), labels.end(), rng);  // sever any embedding-label link
    // keep both classes in train (they are, with overwhelming probability)
    ProbeResult r = logistic_probe(h, labels, splits, 50, 3);
    CHECK(r.micro_f1_mean == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("logistic probe: single-class test split makes micro F1 an accuracy") {
    Separable s = separable();
    for (std::size_t i = s.labels.size() / 2; i < s.labels.size(); ++i)
        if (s.labels[i] == 1) s.splits[i] = Split::kNone;  // test split holds class 0 only
    ProbeResult r = logistic_probe(s.h, s.labels, s.splits, 5, 1);
    CHECK(r.micro_f1_mean == doctest::Approx(1.0));  // accuracy on the separable case
}

TEST_CASE("logistic probe: class missing from the train split is an error") {
    Separable s = separable();
    for (std::size_t i = 0; i < s.labels.size() / 2; ++i)
        if (s.labels[i] == 1) s.splits[i] = Split::kTest;
    CHECK_THROWS_WITH_AS(logistic_probe(s.h, s.labels, s.splits, 2, 1),
                         doctest::Contains("absent from train"), std::invalid_argument);
}

TEST_CASE("kmeans: label-aligned clusters give NMI = ARI = 1") {
    const std::size_t n = 60, d = 3;
    Tensor h = Tensor::zeros({n, d});
    std::vector<int> labels(n);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> jitter(-0.05, 0.05);
    for (std::size_t i = 0; i < n; ++i) {
        labels[i] = static_cast<int>(i % 3);
        h.data()[i * d + labels[i]] = 5.0 + jitter(rng);
    }
    KmeansResult r = kmeans_eval(h, labels, 3, 20, 2);
    CHECK(r.nmi_mean == doctest::Approx(1.0));
    CHECK(r.ari_mean == doctest::Approx(1.0));
    CHECK(!r.degenerate);
}

TEST_CASE("kmeans: identical points are degenerate and carry zero NMI") {
    const std::size_t n = 20;
    Tensor h = Tensor::full({n, 3}, 1.0);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
    KmeansResult r = kmeans_eval(h, labels, 2, 5, 1);
    CHECK(r.degenerate);
    CHECK(r.nmi_mean == doctest::Approx(0.0));
}

TEST_CASE("NMI and ARI: anchors, symmetry, chance level") {
    const std::vector<int> a = {0, 0, 1, 1, 2, 2};
    CHECK(nmi_score(a, a) == doctest::Approx(1.0));
    CHECK(ari_score(a, a) == doctest::Approx(1.0));

    const std::vector<int> one(6, 0);
    CHECK(nmi_score(a, one) == doctest::Approx(0.0));

    std::mt19937_64 rng(11);
    std::vector<int> x(200), y(200);
    for (auto& v : x) v = static_cast<int>(rng() % 4);
    double acc_ari = 0, acc_nmi_sym = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        for (auto& v : y) v = static_cast<int>(rng() % 4);
        acc_ari += ari_score(x, y);
        acc_nmi_sym += std::abs(nmi_score(x, y) - nmi_score(y, x));
        CHECK(ari_score(x, y) == doctest::Approx(ari_score(y, x)).epsilon(1e-12));
    }
    CHECK(acc_ari / trials == doctest::Approx(0.0).scale(1).epsilon(0.05));
    CHECK(acc_nmi_sym / trials <= 1e-12);
}

TEST_CASE("similarity search: pure clusters, chance level, scale invariance, k bound") {
    // class-pure orthogonal embeddings: sim@k = 1 while k < class size
    {
        const std::size_t n = 30, d = 3;
        Tensor h = Tensor::zeros({n, d});
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(i % 3);
            h.data()[i * d + labels[i]] = 1.0;
        }
        const auto sim = similarity_search(h, labels, {5, 9});
        CHECK(sim[0] == doctest::Approx(1.0));
        CHECK(sim[1] == doctest::Approx(1.0));
    }
    // random unit vectors, balanced 2-class, N = 400: sim@5 around 0.5
    {
        const std::size_t n = 400, d = 16;
        std::mt19937_64 rng(13);
        std::normal_distribution<double> gauss(0, 1);
        Tensor h = Tensor::zeros({n, d});
        for (std::size_t i = 0; i < h.size(); ++i) h.data()[i] = gauss(rng);
        std::vector<int> labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 2);
        const auto sim = similarity_search(h, labels, {5});
        CHECK(sim[0] == doctest::Approx(0.5).epsilon(0.1));

        Tensor scaled = scalar_mul(h, 10.0);
        CHECK(similarity_search(scaled, labels, {5})[0] == sim[0]);
    }
    // N <= k errors
    {
        Tensor h = Tensor::full({4, 2}, 1.0);
        std::vector<int> labels = {0, 1, 0, 1};
        CHECK_THROWS(similarity_search(h, labels, {5}));
    }
}

TEST_CASE("EvalReport serializes the documented field names") {
    Separable s = separable();
    HeteroGraph g;
    g.num_nodes = s.labels.size();
    g.feature_dim = s.h.cols();
    g.features = s.h;
    g.labels = s.labels;
    g.splits = s.splits;
    g.metapaths.push_back(build_subgraph("a", 0, g.num_nodes, {{0, 1}}));
    EvalReport rep = evaluate(s.h, g, 5, 1);
    const std::string j = rep.to_json();
    for (const char* key : {"macro_f1", "micro_f1", "nmi", "ari", "sim@5", "sim@10", "sim@20"})
        CHECK(j.find(key) != std::string::npos);
}
