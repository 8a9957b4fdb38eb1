#pragma once

#include <cstdint>
#include <utility>

#include "gcl/hetgraph.hpp"

namespace gcl {

struct AugmentConfig {
    double p_a = 0.0;  // attribute-mask probability
    double p_e = 0.0;  // edge-removal probability
    std::uint64_t seed = 0;
};

// Stochastic view of a graph: features with zeroed dimensions, adjacencies
// with dropped edges. Always a subgraph of the original.
struct GraphView {
    Tensor features;
    std::vector<MetaPathSubgraph> metapaths;
};

// One Bernoulli(1-p_a) mask over the F feature dimensions, shared by all
// nodes, applied as a Hadamard product.
Tensor mask_attributes(const Tensor& x, double p_a, std::uint64_t seed);

// Each undirected edge is dropped independently with probability p_e (one
// coin per pair, applied symmetrically). No edges are added.
MetaPathSubgraph permute_edges(const MetaPathSubgraph& sub, double p_e, std::uint64_t seed);

GraphView make_view(const HeteroGraph& g, const AugmentConfig& cfg);

std::pair<GraphView, GraphView> make_views(const HeteroGraph& g, const AugmentConfig& view1,
                                           const AugmentConfig& view2);

// Un-augmented view of the graph (inference input).
GraphView identity_view(const HeteroGraph& g);

}  // namespace gcl
