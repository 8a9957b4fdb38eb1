#pragma once

#include "gcl/ops.hpp"
#include "gcl/tensor.hpp"

// Poincaré-ball operations with curvature c, applied rowwise: every row of a
// rank-2 tensor is one point (or tangent vector). All ops are built from the
// differentiable core ops, so gradients flow through them, and every
// ball-valued result is projected to norm <= (1 - boundary_eps)/sqrt(c).

namespace gcl {

struct BallConfig {
    double c = 1.0;
    double boundary_eps = 1e-5;
};

// Rescales rows with sqrt(c)*norm > 1 - boundary_eps back onto that radius;
// interior rows pass through untouched (and so do their gradients; the
// rescale factor is a detached constant).
Tensor project_to_ball(const Tensor& x, const BallConfig& cfg);

// x ⊕_c y, rowwise. Throws if any denominator falls below 1e-15.
Tensor mobius_add(const Tensor& x, const Tensor& y, const BallConfig& cfg);

// W ⊗_c x for every row x; w is (d_in x d_out). Rows with x = 0 or xW = 0
// map to 0.
Tensor mobius_matvec(const Tensor& x, const Tensor& w, const BallConfig& cfg);

Tensor exp0(const Tensor& v, const BallConfig& cfg);
Tensor log0(const Tensor& y, const BallConfig& cfg);
Tensor exp_map(const Tensor& x, const Tensor& v, const BallConfig& cfg);
Tensor log_map(const Tensor& x, const Tensor& y, const BallConfig& cfg);

// conformal factor lambda_x = 2 / (1 - c * ||x||^2), one per row
Tensor lambda_rows(const Tensor& x, const BallConfig& cfg);

// geodesic distance, one per row: (2/sqrt(c)) artanh(sqrt(c) ||(-x) ⊕ y||)
Tensor ball_distance(const Tensor& x, const Tensor& y, const BallConfig& cfg);

}  // namespace gcl
