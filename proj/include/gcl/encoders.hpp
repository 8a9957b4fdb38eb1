#pragma once

#include <cstdint>
#include <vector>

#include "gcl/augment.hpp"
#include "gcl/manifold.hpp"
#include "gcl/params.hpp"

namespace gcl {

enum class Geometry { kEuclidean, kHyperbolic };

struct EncoderConfig {
    std::size_t hidden_dim = 64;
    std::size_t layers = 1;
    double dropout = 0.0;            // applied to hidden activations when training
    bool readout_sigmoid_hyp = true;
    BallConfig ball;
};

// Per-meta-path weights: W1/b1 drive the Euclidean branch, W2/b2_raw the
// hyperbolic branch (b2 is the Euclidean parameterization, lifted by exp0).
// q is the attention query shared between both views' fusions.
struct PathParams {
    std::vector<Tensor> w1, b1;       // one per layer
    std::vector<Tensor> w2, b2_raw;
    Tensor q;                         // (1 x d)
};

struct EncoderParams {
    std::vector<PathParams> paths;
    Tensor proj_w1, proj_b1, proj_w2, proj_b2;  // shared projection head

    std::size_t num_paths() const { return paths.size(); }
    void collect(ParamSet& ps) const;
};

// Per-view outputs: per-meta-path node matrices and graph vectors, the
// attention-fused versions, and the attention weights (rows on the simplex).
// Hyperbolic node matrices are returned in the tangent space at the origin.
struct ViewEmbeddings {
    std::vector<Tensor> path_nodes;   // H^m, (N x d)
    std::vector<Tensor> path_graph;   // h_g^m, (1 x d)
    Tensor nodes;                     // fused H
    Tensor graph;                     // fused h_g
    Tensor attention;                 // (N x M)
};

// One GCN layer: relu(mean over {i} u N(i) of x_j W + b).
Tensor euclidean_layer(const Tensor& x, const MetaPathSubgraph& sub, const Tensor& w,
                       const Tensor& b);

// One tangential-aggregation layer: lift rows with exp0, per node apply
// log0(W (x) h (+) exp0(b)), sum over {i} u N(i), relu, map back with exp0.
// Returns the ball-valued node matrix.
Tensor hyperbolic_layer(const Tensor& x_ball, const MetaPathSubgraph& sub, const Tensor& w,
                        const Tensor& b_raw, const BallConfig& cfg);

// alpha_i^m = softmax_m(q^m . h_i^m); fused_i = sum_m alpha_i^m h_i^m.
// Returns (fused, alpha).
std::pair<Tensor, Tensor> attention_fuse(const std::vector<Tensor>& parts,
                                         const std::vector<Tensor>& queries);

// sigmoid(columnwise mean); the sigmoid can be disabled for the hyperbolic
// readout via EncoderConfig.
Tensor graph_readout(const Tensor& h, bool apply_sigmoid = true);

// Shared two-layer projection head with ReLU between; dropout on the hidden
// activation when training.
Tensor project_head(const Tensor& h, const EncoderParams& params, double dropout_p,
                    std::uint64_t dropout_seed, bool training);

// Elementwise average of the two views' embeddings.
Tensor ultimate_embeddings(const Tensor& h, const Tensor& h_tilde);

// Full per-view encoder: every meta-path through the geometric layer stack,
// readouts, then attention fusion of nodes and graph vectors.
ViewEmbeddings encode_view(const GraphView& view, const EncoderParams& params,
                           const EncoderConfig& cfg, Geometry geom, std::uint64_t dropout_seed,
                           bool training);

}  // namespace gcl
