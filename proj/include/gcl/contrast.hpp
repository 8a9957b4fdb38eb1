#pragma once

#include <cstdint>
#include <vector>

#include "gcl/hetgraph.hpp"
#include "gcl/params.hpp"

namespace gcl {

struct DiscrParams {
    Tensor w_node;               // (d x d)
    std::vector<Tensor> w_rel;   // one (d x d) per relation
    Tensor w_lg;                 // (d x d), shared by every local-global pair

    void collect(ParamSet& ps) const;
};

struct Triple {
    int u = 0;
    int r = 0;
    int v = 0;
};

// s positive triples with, per positive, one unrelated-node negative v-
// (node_neg, -1 when rejection sampling failed) and one inconsistent-relation
// negative r- (rel_neg, -1 when the graph has a single relation).
struct TripleBatch {
    std::vector<Triple> positives;
    std::vector<int> node_neg;
    std::vector<int> rel_neg;
    std::size_t skipped_node_negatives = 0;
};

TripleBatch sample_triples(const HeteroGraph& g, std::size_t s, std::uint64_t seed);

// Bilinear discriminators, rowwise: sigmoid(z_u^T W z_v). d_lg pairs every
// row of z against the single graph vector zg (1 x d).
Tensor d_node(const Tensor& zu, const Tensor& zv, const Tensor& w);
Tensor d_rel(const Tensor& zu, int r, const Tensor& zv, const std::vector<Tensor>& w_rel);
Tensor d_lg(const Tensor& z, const Tensor& zg, const Tensor& w);

// Local-local node loss: per positive (u,v), intra/inter scores in both view
// directions, mirrored for the node negative; BCE over the 8s terms.
Tensor loss_node(const TripleBatch& batch, const Tensor& z, const Tensor& zt, const Tensor& w_node);

// Same structure with the relation-aware discriminator; positives use W_r,
// negatives keep the node pair and swap in W_{r-}.
Tensor loss_rel(const TripleBatch& batch, const Tensor& z, const Tensor& zt,
                const std::vector<Tensor>& w_rel);

// Everything the local-global loss contrasts, all projected: per-meta-path
// and fused node embeddings of both views, their graph vectors, and the
// shuffled-feature re-encodings that act as negatives.
struct LgInputs {
    std::vector<Tensor> z_path, zt_path;        // (N x d) per meta-path
    std::vector<Tensor> zg_path, ztg_path;      // (1 x d) per meta-path
    Tensor z, zt;                               // fused nodes
    Tensor zg, ztg;                             // fused graph vectors
    std::vector<Tensor> zneg_path, ztneg_path;  // shuffled-feature node embeddings
    Tensor zneg, ztneg;
};

// Weighted BCE per the estimator: per-meta-path pairs weigh 1/|M|, fused
// pairs weigh 1; negatives mirror positives against the true graph vectors.
Tensor loss_lg(const LgInputs& in, const Tensor& w_lg);

// sum_m [ |H_ult - H_ult^m|_F^2 - |H_ult - H_neg^m|_F^2 ] / (N d)
Tensor loss_reg(const Tensor& h_ult, const std::vector<Tensor>& h_ult_path,
                const std::vector<Tensor>& h_neg_path);

}  // namespace gcl
