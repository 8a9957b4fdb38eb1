#include "gcl/encoders.hpp"

#include <stdexcept>

#include "gcl/rng.hpp"

namespace gcl {

void EncoderParams::collect(ParamSet& ps) const {
    for (std::size_t m = 0; m < paths.size(); ++m) {
        const std::string base = "enc.path" + std::to_string(m) + ".";
        for (std::size_t l = 0; l < paths[m].w1.size(); ++l) {
            const std::string ls = std::to_string(l);
            ps.add(base + "w1." + ls, paths[m].w1[l]);
            ps.add(base + "b1." + ls, paths[m].b1[l]);
            ps.add(base + "w2." + ls, paths[m].w2[l]);
            ps.add(base + "b2." + ls, paths[m].b2_raw[l]);
        }
        ps.add(base + "q", paths[m].q);
    }
    ps.add("proj.w1", proj_w1);
    ps.add("proj.b1", proj_b1);
    ps.add("proj.w2", proj_w2);
    ps.add("proj.b2", proj_b2);
}

Tensor euclidean_layer(const Tensor& x, const MetaPathSubgraph& sub, const Tensor& w,
                       const Tensor& b) {
    if (x.cols() != w.rows()) throw std::invalid_argument("euclidean_layer: feature dim mismatch");
    Tensor agg = neighbor_agg(matmul(x, w), sub.indptr, sub.indices, /*mean=*/true);
    return relu(add_rowvec(agg, b));
}

Tensor hyperbolic_layer(const Tensor& x_ball, const MetaPathSubgraph& sub, const Tensor& w,
                        const Tensor& b_raw, const BallConfig& cfg) {
    if (x_ball.cols() != w.rows())
        throw std::invalid_argument("hyperbolic_layer: feature dim mismatch");
    Tensor mw = mobius_matvec(x_ball, w, cfg);
    Tensor bias_ball = exp0(b_raw, cfg);  // (1 x d)
    Tensor shifted = mobius_add(mw, repeat_rows(bias_ball, mw.rows()), cfg);
    Tensor msg = log0(shifted, cfg);
    Tensor agg = neighbor_agg(msg, sub.indptr, sub.indices, /*mean=*/false);
    return exp0(relu(agg), cfg);
}

std::pair<Tensor, Tensor> attention_fuse(const std::vector<Tensor>& parts,
                                         const std::vector<Tensor>& queries) {
    if (parts.empty()) throw std::invalid_argument("attention_fuse: no meta-paths");
    if (parts.size() != queries.size())
        throw std::invalid_argument("attention_fuse: query count mismatch");
    std::vector<Tensor> scores;
    scores.reserve(parts.size());
    for (std::size_t m = 0; m < parts.size(); ++m)
        scores.push_back(matmul(parts[m], transpose(queries[m])));
    Tensor alpha = softmax_rows(concat_cols(scores));
    Tensor fused;
    for (std::size_t m = 0; m < parts.size(); ++m) {
        Tensor term = colscale(parts[m], col(alpha, m));
        fused = fused.defined() ? add(fused, term) : term;
    }
    return {fused, alpha};
}

Tensor graph_readout(const Tensor& h, bool apply_sigmoid) {
    Tensor m = colmean(h);
    return apply_sigmoid ? sigmoid(m) : m;
}

Tensor project_head(const Tensor& h, const EncoderParams& params, double dropout_p,
                    std::uint64_t dropout_seed, bool training) {
    Tensor h1 = relu(add_rowvec(matmul(h, params.proj_w1), params.proj_b1));
    if (training && dropout_p > 0.0) h1 = dropout(h1, dropout_p, dropout_seed);
    return add_rowvec(matmul(h1, params.proj_w2), params.proj_b2);
}

Tensor ultimate_embeddings(const Tensor& h, const Tensor& h_tilde) {
    return scalar_mul(add(h, h_tilde), 0.5);
}

ViewEmbeddings encode_view(const GraphView& view, const EncoderParams& params,
                           const EncoderConfig& cfg, Geometry geom, std::uint64_t dropout_seed,
                           bool training) {
    if (view.metapaths.empty()) throw std::invalid_argument("encode_view: graph has no meta-paths");
    if (view.metapaths.size() != params.num_paths())
        throw std::invalid_argument("encode_view: parameter/meta-path count mismatch");

    ViewEmbeddings out;
    std::vector<Tensor> queries;
    for (std::size_t m = 0; m < view.metapaths.size(); ++m) {
        const PathParams& pp = params.paths[m];
        Tensor h;
        if (geom == Geometry::kEuclidean) {
            h = view.features;
            for (std::size_t l = 0; l < cfg.layers; ++l) {
                h = euclidean_layer(h, view.metapaths[m], pp.w1[l], pp.b1[l]);
                if (training && cfg.dropout > 0.0)
                    h = dropout(h, cfg.dropout, derive_seed(dropout_seed, rngtag::kDropout, m, l));
            }
        } else {
            Tensor hb = exp0(view.features, cfg.ball);
            for (std::size_t l = 0; l < cfg.layers; ++l) {
                hb = hyperbolic_layer(hb, view.metapaths[m], pp.w2[l], pp.b2_raw[l], cfg.ball);
                if (training && cfg.dropout > 0.0)
                    hb = exp0(dropout(log0(hb, cfg.ball), cfg.dropout,
                                      derive_seed(dropout_seed, rngtag::kDropout, m, l)),
                              cfg.ball);
            }
            h = log0(hb, cfg.ball);
        }
        const bool readout_sigmoid = geom == Geometry::kEuclidean || cfg.readout_sigmoid_hyp;
        out.path_nodes.push_back(h);
        out.path_graph.push_back(graph_readout(h, readout_sigmoid));
        queries.push_back(pp.q);
    }

    auto [fused_nodes, alpha] = attention_fuse(out.path_nodes, queries);
    auto [fused_graph, alpha_g] = attention_fuse(out.path_graph, queries);
    (void)alpha_g;
    out.nodes = fused_nodes;
    out.graph = fused_graph;
    out.attention = alpha;
    return out;
}

}  // namespace gcl
