#include "gcl/contrast.hpp"

#include <random>
#include <stdexcept>

#include "gcl/ops.hpp"
#include "gcl/rng.hpp"

namespace gcl {

void DiscrParams::collect(ParamSet& ps) const {
    ps.add("discr.w_node", w_node);
    for (std::size_t r = 0; r < w_rel.size(); ++r)
        ps.add("discr.w_rel." + std::to_string(r), w_rel[r]);
    ps.add("discr.w_lg", w_lg);
}

TripleBatch sample_triples(const HeteroGraph& g, std::size_t s, std::uint64_t seed) {
    const int nrel = static_cast<int>(g.metapaths.size());
    if (nrel == 0) throw std::invalid_argument("sample_triples: graph has no meta-paths");

    // undirected edge lists per relation, in sorted order; positives are
    // drawn uniformly over nonempty relations, then edges (empty relations
    // can still appear as inconsistent-relation negatives)
    std::vector<std::vector<std::pair<int, int>>> edges(nrel);
    std::vector<int> nonempty;
    for (int r = 0; r < nrel; ++r) {
        const auto& mp = g.metapaths[r];
        for (std::size_t u = 0; u < g.num_nodes; ++u)
            for (int e = mp.indptr[u]; e < mp.indptr[u + 1]; ++e)
                if (static_cast<int>(u) < mp.indices[e])
                    edges[r].emplace_back(static_cast<int>(u), mp.indices[e]);
        if (!edges[r].empty()) nonempty.push_back(r);
    }
    if (nonempty.empty()) throw std::invalid_argument("sample_triples: no meta-path has edges");

    std::mt19937_64 rng = make_rng(seed);
    std::uniform_int_distribution<std::size_t> rel_dist(0, nonempty.size() - 1);
    std::uniform_int_distribution<int> node_dist(0, static_cast<int>(g.num_nodes) - 1);
    std::bernoulli_distribution flip(0.5);

    TripleBatch batch;
    batch.positives.reserve(s);
    for (std::size_t t = 0; t < s; ++t) {
        const int r = nonempty[rel_dist(rng)];
        std::uniform_int_distribution<std::size_t> edge_dist(0, edges[r].size() - 1);
        auto [a, b] = edges[r][edge_dist(rng)];
        if (flip(rng)) std::swap(a, b);
        batch.positives.push_back({a, r, b});

        int vneg = -1;
        for (int tries = 0; tries < 100; ++tries) {
            const int cand = node_dist(rng);
            if (cand != a && !g.metapaths[r].has_edge(a, cand)) {
                vneg = cand;
                break;
            }
        }
        if (vneg < 0) ++batch.skipped_node_negatives;
        batch.node_neg.push_back(vneg);

        if (nrel >= 2) {
            std::uniform_int_distribution<int> other(0, nrel - 2);
            const int pick = other(rng);
            batch.rel_neg.push_back(pick < r ? pick : pick + 1);
        } else {
            batch.rel_neg.push_back(-1);
        }
    }
    return batch;
}

Tensor d_node(const Tensor& zu, const Tensor& zv, const Tensor& w) {
    return sigmoid(rowdot(matmul(zu, w), zv));
}

Tensor d_rel(const Tensor& zu, int r, const Tensor& zv, const std::vector<Tensor>& w_rel) {
    if (r < 0 || static_cast<std::size_t>(r) >= w_rel.size())
        throw std::invalid_argument("d_rel: invalid relation id " + std::to_string(r));
    return sigmoid(rowdot(matmul(zu, w_rel[r]), zv));
}

Tensor d_lg(const Tensor& z, const Tensor& zg, const Tensor& w) {
    return sigmoid(matmul(matmul(z, w), transpose(zg)));
}

namespace {

// the four view combinations of one pair batch: (z_u,z_v), (z_u,z~_v),
// (z~_u,z~_v), (z~_u,z_v), as bilinear logits
void pair_logits(std::vector<Tensor>& sink, const Tensor& pu, const Tensor& ptu, const Tensor& v,
                 const Tensor& vt) {
    sink.push_back(rowdot(pu, v));
    sink.push_back(rowdot(pu, vt));
    sink.push_back(rowdot(ptu, vt));
    sink.push_back(rowdot(ptu, v));
}

Tensor bce_over(const std::vector<Tensor>& pos, const std::vector<Tensor>& neg) {
    std::vector<Tensor> logits;
    std::vector<double> targets;
    for (const Tensor& t : pos) {
        logits.push_back(t);
        for (std::size_t i = 0; i < t.size(); ++i) targets.push_back(1.0);
    }
    for (const Tensor& t : neg) {
        logits.push_back(t);
        for (std::size_t i = 0; i < t.size(); ++i) targets.push_back(0.0);
    }
    Tensor all = concat_rows(logits);
    return bce_with_logits(all, Tensor::from_data(all.shape(), std::move(targets)));
}

}  // namespace

Tensor loss_node(const TripleBatch& batch, const Tensor& z, const Tensor& zt,
                 const Tensor& w_node) {
    std::vector<int> us, vs, vnegs;
    for (std::size_t i = 0; i < batch.positives.size(); ++i) {
        if (batch.node_neg[i] < 0) continue;  // no unrelated node found; skipped
        us.push_back(batch.positives[i].u);
        vs.push_back(batch.positives[i].v);
        vnegs.push_back(batch.node_neg[i]);
    }
    if (us.empty()) throw std::invalid_argument("loss_node: empty batch");
    Tensor pu = matmul(gather_rows(z, us), w_node);
    Tensor ptu = matmul(gather_rows(zt, us), w_node);
    Tensor v = gather_rows(z, vs), vt = gather_rows(zt, vs);
    Tensor vn = gather_rows(z, vnegs), vnt = gather_rows(zt, vnegs);
    std::vector<Tensor> pos, neg;
    pair_logits(pos, pu, ptu, v, vt);
    pair_logits(neg, pu, ptu, vn, vnt);
    return bce_over(pos, neg);
}

Tensor loss_rel(const TripleBatch& batch, const Tensor& z, const Tensor& zt,
                const std::vector<Tensor>& w_rel) {
    const int nrel = static_cast<int>(w_rel.size());
    if (nrel < 2) return Tensor::scalar(0.0);
    std::vector<Tensor> pos, neg;
    // group by discriminator matrix so each block shares one W
    for (int r = 0; r < nrel; ++r) {
        std::vector<int> us, vs;
        for (const Triple& t : batch.positives)
            if (t.r == r) {
                us.push_back(t.u);
                vs.push_back(t.v);
            }
        if (!us.empty()) {
            Tensor pu = matmul(gather_rows(z, us), w_rel[r]);
            Tensor ptu = matmul(gather_rows(zt, us), w_rel[r]);
            pair_logits(pos, pu, ptu, gather_rows(z, vs), gather_rows(zt, vs));
        }
        us.clear();
        vs.clear();
        for (std::size_t i = 0; i < batch.positives.size(); ++i)
            if (batch.rel_neg[i] == r) {
                us.push_back(batch.positives[i].u);
                vs.push_back(batch.positives[i].v);
            }
        if (!us.empty()) {
            Tensor pu = matmul(gather_rows(z, us), w_rel[r]);
            Tensor ptu = matmul(gather_rows(zt, us), w_rel[r]);
            pair_logits(neg, pu, ptu, gather_rows(z, vs), gather_rows(zt, vs));
        }
    }
    if (pos.empty() || neg.empty()) throw std::invalid_argument("loss_rel: empty batch");
    return bce_over(pos, neg);
}

Tensor loss_lg(const LgInputs& in, const Tensor& w_lg) {
    const std::size_t npath = in.z_path.size();
    if (npath == 0) throw std::invalid_argument("loss_lg: no meta-paths");
    std::vector<Tensor> logits;
    std::vector<double> targets, weights;
    auto push = [&](Tensor block, double target, double weight) {
        for (std::size_t i = 0; i < block.size(); ++i) {
            targets.push_back(target);
            weights.push_back(weight);
        }
        logits.push_back(std::move(block));
    };
    auto bilinear = [&](const Tensor& z, const Tensor& zg) {
        return matmul(matmul(z, w_lg), transpose(zg));
    };
    const double wm = 1.0 / static_cast<double>(npath);
    for (std::size_t m = 0; m < npath; ++m) {
        push(bilinear(in.z_path[m], in.ztg_path[m]), 1.0, wm);
        push(bilinear(in.zt_path[m], in.zg_path[m]), 1.0, wm);
        push(bilinear(in.zneg_path[m], in.ztg_path[m]), 0.0, wm);
        push(bilinear(in.ztneg_path[m], in.zg_path[m]), 0.0, wm);
    }
    push(bilinear(in.z, in.ztg), 1.0, 1.0);
    push(bilinear(in.zt, in.zg), 1.0, 1.0);
    push(bilinear(in.zneg, in.ztg), 0.0, 1.0);
    push(bilinear(in.ztneg, in.zg), 0.0, 1.0);
    Tensor all = concat_rows(logits);
    return bce_with_logits(all, Tensor::from_data(all.shape(), std::move(targets)),
                           Tensor::from_data(all.shape(), std::move(weights)));
}

Tensor loss_reg(const Tensor& h_ult, const std::vector<Tensor>& h_ult_path,
                const std::vector<Tensor>& h_neg_path) {
    if (h_ult_path.size() != h_neg_path.size())
        throw std::invalid_argument("loss_reg: per-meta-path count mismatch");
    Tensor total;
    for (std::size_t m = 0; m < h_ult_path.size(); ++m) {
        Tensor dpos = sub(h_ult, h_ult_path[m]);
        Tensor dneg = sub(h_ult, h_neg_path[m]);
        Tensor term = sub(sum(hadamard(dpos, dpos)), sum(hadamard(dneg, dneg)));
        total = total.defined() ? add(total, term) : term;
    }
    return scalar_mul(total, 1.0 / static_cast<double>(h_ult.size()));
}

}  // namespace gcl
