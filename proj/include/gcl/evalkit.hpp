#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gcl/hetgraph.hpp"

namespace gcl {

struct ProbeResult {
    double macro_f1_mean = 0, macro_f1_std = 0;
    double micro_f1_mean = 0, micro_f1_std = 0;
};

// Multinomial logistic regression on frozen embeddings; full-batch gradient
// descent with a fixed internal schedule (300 iterations, lr 0.1, L2 1e-4),
// repeated over `runs` seeded initializations. Evaluated on eval_split.
ProbeResult logistic_probe(const Tensor& h, const std::vector<int>& labels,
                           const std::vector<Split>& splits, std::size_t runs = 50,
                           std::uint64_t seed = 0, Split eval_split = Split::kTest,
                           std::size_t iters = 300);

struct KmeansResult {
    double nmi_mean = 0;
    double ari_mean = 0;
    bool degenerate = false;  // fewer distinct points than clusters
};

// Lloyd's algorithm with k-means++ seeding (100 iterations max, tol 1e-6 on
// the max squared center shift), averaged over `runs` seeds. NMI uses the
// arithmetic normalization; ARI is the permutation-model form.
KmeansResult kmeans_eval(const Tensor& h, const std::vector<int>& labels, std::size_t k,
                         std::size_t runs = 50, std::uint64_t seed = 0);

// sim@k over cosine similarity; self excluded, ties broken by ascending node
// id. Only labeled nodes participate.
std::vector<double> similarity_search(const Tensor& h, const std::vector<int>& labels,
                                      const std::vector<int>& ks = {5, 10, 20});

struct EvalReport {
    ProbeResult probe;
    KmeansResult kmeans;
    std::vector<int> sim_ks = {5, 10, 20};
    std::vector<double> sim_at;

    std::string to_json() const;
};

EvalReport evaluate(const Tensor& h, const HeteroGraph& g, std::size_t runs = 50,
                    std::uint64_t seed = 0);

// standalone metrics (shared with the k-means path and the tests)
double nmi_score(const std::vector<int>& a, const std::vector<int>& b);
double ari_score(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace gcl
