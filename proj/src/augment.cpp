#include "gcl/augment.hpp"

#include <random>
#include <stdexcept>

#include "gcl/rng.hpp"

namespace gcl {

Tensor mask_attributes(const Tensor& x, double p_a, std::uint64_t seed) {
    if (p_a < 0.0 || p_a >= 1.0) throw std::invalid_argument("mask_attributes: p_a must be in [0,1)");
    if (p_a == 0.0) return x;
    const std::size_t n = x.rows(), f = x.cols();
    std::mt19937_64 rng = make_rng(seed);
    std::bernoulli_distribution keep(1.0 - p_a);
    std::vector<double> mask(f);
    for (std::size_t j = 0; j < f; ++j) mask[j] = keep(rng) ? 1.0 : 0.0;
    Tensor out = Tensor::zeros(x.shape());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < f; ++j) out.data()[i * f + j] = x.data()[i * f + j] * mask[j];
    return out;
}

MetaPathSubgraph permute_edges(const MetaPathSubgraph& sub, double p_e, std::uint64_t seed) {
    if (p_e < 0.0 || p_e >= 1.0) throw std::invalid_argument("permute_edges: p_e must be in [0,1)");
    if (p_e == 0.0) return sub;
    const std::size_t n = sub.num_nodes();
    std::mt19937_64 rng = make_rng(seed);
    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::pair<int, int>> kept;
    // one coin per undirected pair, iterated in sorted (u < v) order
    for (std::size_t u = 0; u < n; ++u)
        for (int e = sub.indptr[u]; e < sub.indptr[u + 1]; ++e) {
            const int v = sub.indices[e];
            if (static_cast<int>(u) >= v) continue;
            if (coin(rng) >= p_e) kept.emplace_back(static_cast<int>(u), v);
        }
    return build_subgraph(sub.name, sub.relation_id, n, kept);
}

GraphView make_view(const HeteroGraph& g, const AugmentConfig& cfg) {
    GraphView v;
    v.features = mask_attributes(g.features, cfg.p_a, derive_seed(cfg.seed, 1));
    v.metapaths.reserve(g.metapaths.size());
    for (std::size_t m = 0; m < g.metapaths.size(); ++m)
        v.metapaths.push_back(permute_edges(g.metapaths[m], cfg.p_e, derive_seed(cfg.seed, 2, m)));
    return v;
}

std::pair<GraphView, GraphView> make_views(const HeteroGraph& g, const AugmentConfig& view1,
                                           const AugmentConfig& view2) {
    return {make_view(g, view1), make_view(g, view2)};
}

GraphView identity_view(const HeteroGraph& g) {
    GraphView v;
    v.features = g.features;
    v.metapaths = g.metapaths;
    return v;
}

}  // namespace gcl
