#include "gcl/manifold.hpp"

#include <cmath>
#include <stdexcept>

namespace gcl {

namespace {

constexpr double kTiny = 1e-15;

void check_ball_cfg(const BallConfig& cfg) {
    if (cfg.c <= 0.0) throw std::invalid_argument("ball: curvature c must be > 0");
    if (cfg.boundary_eps <= 0.0 || cfg.boundary_eps >= 1.0)
        throw std::invalid_argument("ball: boundary_eps must be in (0,1)");
}

}  // namespace

Tensor project_to_ball(const Tensor& x, const BallConfig& cfg) {
    check_ball_cfg(cfg);
    const std::size_t n = x.rows(), d = x.cols();
    const double max_norm = (1.0 - cfg.boundary_eps) / std::sqrt(cfg.c);
    std::vector<double> mask(n, 0.0), keep(n, 1.0);
    bool clipped = false;
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = x.data()[i * d + j];
            acc += v * v;
        }
        if (std::sqrt(acc) > max_norm) {
            mask[i] = 1.0;
            keep[i] = 0.0;
            clipped = true;
        }
    }
    if (!clipped) return x;
    // clipped rows rescale to max_norm * x/||x||, differentiably; interior
    // rows pass through with their gradients untouched
    Tensor norm = l2_norm_rows(x, kTiny);
    Tensor scale = add(hadamard(Tensor::from_data({n, 1}, std::move(mask)),
                                div(Tensor::full({n, 1}, max_norm), norm)),
                       Tensor::from_data({n, 1}, std::move(keep)));
    return colscale(x, scale);
}

Tensor mobius_add(const Tensor& x, const Tensor& y, const BallConfig& cfg) {
    check_ball_cfg(cfg);
    if (x.shape() != y.shape()) throw std::invalid_argument("mobius_add: shape mismatch");
    const std::size_t n = x.rows();
    const double c = cfg.c;
    Tensor ones = Tensor::full({n, 1}, 1.0);
    Tensor xy = rowdot(x, y);
    Tensor x2 = rowdot(x, x);
    Tensor y2 = rowdot(y, y);
    Tensor coef_x = add(add(ones, scalar_mul(xy, 2.0 * c)), scalar_mul(y2, c));
    Tensor coef_y = sub(ones, scalar_mul(x2, c));
    Tensor den = add(add(ones, scalar_mul(xy, 2.0 * c)), scalar_mul(hadamard(x2, y2), c * c));
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(den.data()[i]) < kTiny)
            throw std::domain_error("mobius denominator degenerate");
    Tensor num = add(colscale(x, coef_x), colscale(y, coef_y));
    return project_to_ball(colscale(num, reciprocal(den)), cfg);
}

Tensor mobius_matvec(const Tensor& x, const Tensor& w, const BallConfig& cfg) {
    check_ball_cfg(cfg);
    const double sc = std::sqrt(cfg.c);
    Tensor mx = matmul(x, w);
    Tensor nx = l2_norm_rows(x, kTiny);
    Tensor nmx = l2_norm_rows(mx, kTiny);
    Tensor t = tanh(hadamard(div(nmx, nx), artanh(scalar_mul(nx, sc))));
    Tensor unit = colscale(mx, reciprocal(nmx));
    return project_to_ball(scalar_mul(colscale(unit, t), 1.0 / sc), cfg);
}

Tensor exp0(const Tensor& v, const BallConfig& cfg) {
    check_ball_cfg(cfg);
    const double sc = std::sqrt(cfg.c);
    Tensor nv = l2_norm_rows(v, kTiny);
    Tensor snv = scalar_mul(nv, sc);
    Tensor factor = div(tanh(snv), snv);
    return project_to_ball(colscale(v, factor), cfg);
}

Tensor log0(const Tensor& y, const BallConfig& cfg) {
    check_ball_cfg(cfg);
    const double sc = std::sqrt(cfg.c);
    Tensor ny = l2_norm_rows(y, kTiny);
    Tensor sny = scalar_mul(ny, sc);
    Tensor factor = div(artanh(sny), sny);
    return colscale(y, factor);
}

Tensor lambda_rows(const Tensor& x, const BallConfig& cfg) {
    check_ball_cfg(cfg);
    const std::size_t n = x.rows();
    Tensor ones = Tensor::full({n, 1}, 1.0);
    return scalar_mul(reciprocal(sub(ones, scalar_mul(rowdot(x, x), cfg.c))), 2.0);
}

Tensor exp_map(const Tensor& x, const Tensor& v, const BallConfig& cfg) {
    check_ball_cfg(cfg);
    const double sc = std::sqrt(cfg.c);
    Tensor lam = lambda_rows(x, cfg);
    Tensor nv = l2_norm_rows(v, kTiny);
    Tensor arg = scalar_mul(hadamard(lam, nv), sc * 0.5);
    Tensor factor = div(tanh(arg), scalar_mul(nv, sc));
    return mobius_add(x, colscale(v, factor), cfg);
}

Tensor log_map(const Tensor& x, const Tensor& y, const BallConfig& cfg) {
    check_ball_cfg(cfg);
    const double sc = std::sqrt(cfg.c);
    Tensor u = mobius_add(neg(x), y, cfg);
    Tensor nu = l2_norm_rows(u, kTiny);
    Tensor at = artanh(scalar_mul(nu, sc));
    Tensor lam = lambda_rows(x, cfg);
    Tensor factor = div(scalar_mul(at, 2.0 / sc), hadamard(lam, nu));
    return colscale(u, factor);
}

Tensor ball_distance(const Tensor& x, const Tensor& y, const BallConfig& cfg) {
    check_ball_cfg(cfg);
    const double sc = std::sqrt(cfg.c);
    Tensor u = mobius_add(neg(x), y, cfg);
    Tensor nu = l2_norm_rows(u, kTiny);
    return scalar_mul(artanh(scalar_mul(nu, sc)), 2.0 / sc);
}

}  // namespace gcl
