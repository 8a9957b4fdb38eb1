#pragma once

#include <cstdint>
#include <vector>

#include "gcl/tensor.hpp"

// Differentiable core ops. Shapes are validated; artanh/log/reciprocal check
// their domains and report the offending extremum. Forward values plus a
// recorded backward rule; recording is skipped when no input requires grad or
// the tape is disabled.

namespace gcl {

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);
Tensor scalar_mul(const Tensor& a, double s);
Tensor neg(const Tensor& a);

// out = A + b broadcast over rows; b is (1 x d) or (d)
Tensor add_rowvec(const Tensor& a, const Tensor& b);
// out (n x d) replicating the single row b
Tensor repeat_rows(const Tensor& b, std::size_t n);
// out_ij = a_ij * s_i with s a column (n x 1) or (n)
Tensor colscale(const Tensor& a, const Tensor& s);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor rowsum(const Tensor& a);   // (n x d) -> (n x 1)
Tensor rowdot(const Tensor& a, const Tensor& b);  // (n x 1)
Tensor colmean(const Tensor& a);  // (n x d) -> (1 x d)
Tensor l2_norm_rows(const Tensor& a, double floor = 0.0);  // (n x 1)

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor col(const Tensor& a, std::size_t j);  // (n x 1) slice

Tensor relu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor artanh(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor log(const Tensor& a);
Tensor reciprocal(const Tensor& a);
Tensor softmax_rows(const Tensor& a);

// Deterministic given seed; keeps entries with probability 1-p and scales
// survivors by 1/(1-p). p = 0 is the identity.
Tensor dropout(const Tensor& a, double p, std::uint64_t seed);

// Mean (or weighted mean) of max(x,0) - x*t + log1p(exp(-|x|)) over all
// entries; targets (and weights) are treated as constants.
Tensor bce_with_logits(const Tensor& logits, const Tensor& targets,
                       const Tensor& weights = Tensor());

Tensor gather_rows(const Tensor& a, const std::vector<int>& idx);

// y_i = sum_{j in {i} u N(i)} x_j over a CSR adjacency, optionally divided by
// deg(i)+1.
Tensor neighbor_agg(const Tensor& x, const std::vector<int>& indptr,
                    const std::vector<int>& indices, bool mean_normalize);

// Value copy severed from the graph; gradients do not flow through.
Tensor detach(const Tensor& a);

}  // namespace gcl
