#include "gcl/ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "gcl/kernels.hpp"
#include "gcl/rng.hpp"

namespace gcl {

namespace {

bool grad_wanted(std::initializer_list<const Tensor*> ins) {
    if (!tape().enabled()) return false;
    for (const Tensor* t : ins)
        if (t->requires_grad()) return true;
    return false;
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

void check_2d(const char* op, const Tensor& a) {
    if (a.rank() != 2) throw std::invalid_argument(std::string(op) + ": expected rank-2 tensor");
}

void axpy(double* dst, const double* src, std::size_t n, double s = 1.0) {
    for (std::size_t i = 0; i < n; ++i) dst[i] += s * src[i];
}

// elementwise unary with y = f(x), dx += g * dfdy(x, y)
template <typename F, typename DF>
Tensor unary_op(const Tensor& a, F f, DF dfdx) {
    Tensor out = Tensor::zeros(a.shape());
    const double* x = a.data();
    double* y = out.data();
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) y[i] = f(x[i]);
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, dfdx]() mutable {
            const double* g = to.grad();
            const double* xv = ta.data();
            const double* yv = to.data();
            double* da = ta.grad();
            const std::size_t m = ta.size();
            for (std::size_t i = 0; i < m; ++i) da[i] += g[i] * dfdx(xv[i], yv[i]);
        });
    }
    return out;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_2d("matmul", a);
    check_2d("matmul", b);
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner extents differ");
    const std::size_t n = a.rows(), k = a.cols(), p = b.cols();
    Tensor out = Tensor::zeros({n, p});
    kernels::matmul(a.data(), b.data(), out.data(), n, k, p);
    if (grad_wanted({&a, &b})) {
        Tensor ta = a, tb = b, to = out;
        out.set_requires_grad(true);
        tape().record([ta, tb, to, n, k, p]() mutable {
            const double* g = to.grad();
            if (ta.requires_grad()) {
                std::vector<double> tmp(n * k);
                kernels::matmul_nt(g, tb.data(), tmp.data(), n, p, k);
                axpy(ta.grad(), tmp.data(), n * k);
            }
            if (tb.requires_grad()) {
                std::vector<double> tmp(k * p);
                kernels::matmul_tn(ta.data(), g, tmp.data(), n, k, p);
                axpy(tb.grad(), tmp.data(), k * p);
            }
        });
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    check_2d("transpose", a);
    const std::size_t n = a.rows(), d = a.cols();
    Tensor out = Tensor::zeros({d, n});
    const double* x = a.data();
    double* y = out.data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) y[j * n + i] = x[i * d + j];
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, n, d]() mutable {
            const double* g = to.grad();
            double* da = ta.grad();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) da[i * d + j] += g[j * n + i];
        });
    }
    return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape("add", a, b);
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] + b.data()[i];
    if (grad_wanted({&a, &b})) {
        Tensor ta = a, tb = b, to = out;
        out.set_requires_grad(true);
        tape().record([ta, tb, to]() mutable {
            const double* g = to.grad();
            if (ta.requires_grad()) axpy(ta.grad(), g, ta.size());
            if (tb.requires_grad()) axpy(tb.grad(), g, tb.size());
        });
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape("sub", a, b);
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] - b.data()[i];
    if (grad_wanted({&a, &b})) {
        Tensor ta = a, tb = b, to = out;
        out.set_requires_grad(true);
        tape().record([ta, tb, to]() mutable {
            const double* g = to.grad();
            if (ta.requires_grad()) axpy(ta.grad(), g, ta.size());
            if (tb.requires_grad()) axpy(tb.grad(), g, tb.size(), -1.0);
        });
    }
    return out;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
    check_same_shape("hadamard", a, b);
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * b.data()[i];
    if (grad_wanted({&a, &b})) {
        Tensor ta = a, tb = b, to = out;
        out.set_requires_grad(true);
        tape().record([ta, tb, to]() mutable {
            const double* g = to.grad();
            const std::size_t m = ta.size();
            if (ta.requires_grad()) {
                double* da = ta.grad();
                const double* bv = tb.data();
                for (std::size_t i = 0; i < m; ++i) da[i] += g[i] * bv[i];
            }
            if (tb.requires_grad()) {
                double* db = tb.grad();
                const double* av = ta.data();
                for (std::size_t i = 0; i < m; ++i) db[i] += g[i] * av[i];
            }
        });
    }
    return out;
}

Tensor div(const Tensor& a, const Tensor& b) {
    check_same_shape("div", a, b);
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (b.data()[i] == 0.0) throw std::domain_error("div: zero denominator");
        out.data()[i] = a.data()[i] / b.data()[i];
    }
    if (grad_wanted({&a, &b})) {
        Tensor ta = a, tb = b, to = out;
        out.set_requires_grad(true);
        tape().record([ta, tb, to]() mutable {
            const double* g = to.grad();
            const std::size_t m = ta.size();
            const double* bv = tb.data();
            if (ta.requires_grad()) {
                double* da = ta.grad();
                for (std::size_t i = 0; i < m; ++i) da[i] += g[i] / bv[i];
            }
            if (tb.requires_grad()) {
                double* db = tb.grad();
                const double* av = ta.data();
                for (std::size_t i = 0; i < m; ++i) db[i] -= g[i] * av[i] / (bv[i] * bv[i]);
            }
        });
    }
    return out;
}

Tensor scalar_mul(const Tensor& a, double s) {
    Tensor out = Tensor::zeros(a.shape());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = s * a.data()[i];
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, s]() mutable { axpy(ta.grad(), to.grad(), ta.size(), s); });
    }
    return out;
}

Tensor neg(const Tensor& a) { return scalar_mul(a, -1.0); }

Tensor add_rowvec(const Tensor& a, const Tensor& b) {
    check_2d("add_rowvec", a);
    const std::size_t n = a.rows(), d = a.cols();
    if (b.size() != d) throw std::invalid_argument("add_rowvec: bias extent mismatch");
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.data()[i * d + j] = a.data()[i * d + j] + b.data()[j];
    if (grad_wanted({&a, &b})) {
        Tensor ta = a, tb = b, to = out;
        out.set_requires_grad(true);
        tape().record([ta, tb, to, n, d]() mutable {
            const double* g = to.grad();
            if (ta.requires_grad()) axpy(ta.grad(), g, n * d);
            if (tb.requires_grad()) {
                double* db = tb.grad();
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < d; ++j) db[j] += g[i * d + j];
            }
        });
    }
    return out;
}

Tensor repeat_rows(const Tensor& b, std::size_t n) {
    const std::size_t d = b.size();
    Tensor out = Tensor::zeros({n, d});
    for (std::size_t i = 0; i < n; ++i)
        std::copy(b.data(), b.data() + d, out.data() + i * d);
    if (grad_wanted({&b})) {
        Tensor tb = b, to = out;
        out.set_requires_grad(true);
        tape().record([tb, to, n, d]() mutable {
            const double* g = to.grad();
            double* db = tb.grad();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) db[j] += g[i * d + j];
        });
    }
    return out;
}

Tensor colscale(const Tensor& a, const Tensor& s) {
    check_2d("colscale", a);
    const std::size_t n = a.rows(), d = a.cols();
    if (s.size() != n) throw std::invalid_argument("colscale: scale extent mismatch");
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const double si = s.data()[i];
        for (std::size_t j = 0; j < d; ++j) out.data()[i * d + j] = a.data()[i * d + j] * si;
    }
    if (grad_wanted({&a, &s})) {
        Tensor ta = a, ts = s, to = out;
        out.set_requires_grad(true);
        tape().record([ta, ts, to, n, d]() mutable {
            const double* g = to.grad();
            if (ta.requires_grad()) {
                double* da = ta.grad();
                const double* sv = ts.data();
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < d; ++j) da[i * d + j] += g[i * d + j] * sv[i];
            }
            if (ts.requires_grad()) {
                double* ds = ts.grad();
                const double* av = ta.data();
                for (std::size_t i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (std::size_t j = 0; j < d; ++j) acc += g[i * d + j] * av[i * d + j];
                    ds[i] += acc;
                }
            }
        });
    }
    return out;
}

Tensor sum(const Tensor& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i];
    Tensor out = Tensor::from_data({1}, {acc});
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to]() mutable {
            const double g = to.grad()[0];
            double* da = ta.grad();
            for (std::size_t i = 0; i < ta.size(); ++i) da[i] += g;
        });
    }
    return out;
}

Tensor mean(const Tensor& a) {
    const double inv = 1.0 / static_cast<double>(a.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a.data()[i];
    Tensor out = Tensor::from_data({1}, {acc * inv});
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, inv]() mutable {
            const double g = to.grad()[0] * inv;
            double* da = ta.grad();
            for (std::size_t i = 0; i < ta.size(); ++i) da[i] += g;
        });
    }
    return out;
}

Tensor rowsum(const Tensor& a) {
    check_2d("rowsum", a);
    const std::size_t n = a.rows(), d = a.cols();
    Tensor out = Tensor::zeros({n, 1});
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += a.data()[i * d + j];
        out.data()[i] = acc;
    }
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, n, d]() mutable {
            const double* g = to.grad();
            double* da = ta.grad();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) da[i * d + j] += g[i];
        });
    }
    return out;
}

Tensor rowdot(const Tensor& a, const Tensor& b) {
    check_same_shape("rowdot", a, b);
    check_2d("rowdot", a);
    const std::size_t n = a.rows(), d = a.cols();
    Tensor out = Tensor::zeros({n, 1});
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += a.data()[i * d + j] * b.data()[i * d + j];
        out.data()[i] = acc;
    }
    if (grad_wanted({&a, &b})) {
        Tensor ta = a, tb = b, to = out;
        out.set_requires_grad(true);
        tape().record([ta, tb, to, n, d]() mutable {
            const double* g = to.grad();
            if (ta.requires_grad()) {
                double* da = ta.grad();
                const double* bv = tb.data();
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < d; ++j) da[i * d + j] += g[i] * bv[i * d + j];
            }
            if (tb.requires_grad()) {
                double* db = tb.grad();
                const double* av = ta.data();
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < d; ++j) db[i * d + j] += g[i] * av[i * d + j];
            }
        });
    }
    return out;
}

Tensor colmean(const Tensor& a) {
    check_2d("colmean", a);
    const std::size_t n = a.rows(), d = a.cols();
    const double inv = 1.0 / static_cast<double>(n);
    Tensor out = Tensor::zeros({1, d});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) out.data()[j] += a.data()[i * d + j];
    for (std::size_t j = 0; j < d; ++j) out.data()[j] *= inv;
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, n, d, inv]() mutable {
            const double* g = to.grad();
            double* da = ta.grad();
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < d; ++j) da[i * d + j] += g[j] * inv;
        });
    }
    return out;
}

Tensor l2_norm_rows(const Tensor& a, double floor) {
    check_2d("l2_norm_rows", a);
    const std::size_t n = a.rows(), d = a.cols();
    Tensor out = Tensor::zeros({n, 1});
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double v = a.data()[i * d + j];
            acc += v * v;
        }
        out.data()[i] = std::max(std::sqrt(acc), floor);
    }
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, n, d, floor]() mutable {
            const double* g = to.grad();
            const double* y = to.data();
            const double* x = ta.data();
            double* da = ta.grad();
            for (std::size_t i = 0; i < n; ++i) {
                if (y[i] <= floor) continue;  // floored rows are constant
                const double gi = g[i] / y[i];
                for (std::size_t j = 0; j < d; ++j) da[i * d + j] += gi * x[i * d + j];
            }
        });
    }
    return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_rows: no parts");
    const std::size_t d = parts[0].cols();
    std::size_t n = 0;
    for (const Tensor& p : parts) {
        if (p.cols() != d) throw std::invalid_argument("concat_rows: column mismatch");
        n += p.rows();
    }
    Tensor out = Tensor::zeros({n, d});
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        std::copy(p.data(), p.data() + p.size(), out.data() + off * d);
        off += p.rows();
    }
    bool any = false;
    for (const Tensor& p : parts)
        if (p.requires_grad()) any = true;
    if (tape().enabled() && any) {
        std::vector<Tensor> tp = parts;
        Tensor to = out;
        out.set_requires_grad(true);
        tape().record([tp, to, d]() mutable {
            const double* g = to.grad();
            std::size_t off = 0;
            for (Tensor& p : tp) {
                if (p.requires_grad()) axpy(p.grad(), g + off * d, p.size());
                off += p.rows();
            }
        });
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no parts");
    const std::size_t n = parts[0].rows();
    std::size_t d = 0;
    for (const Tensor& p : parts) {
        if (p.rows() != n) throw std::invalid_argument("concat_cols: row mismatch");
        d += p.cols();
    }
    Tensor out = Tensor::zeros({n, d});
    std::size_t off = 0;
    for (const Tensor& p : parts) {
        const std::size_t pd = p.cols();
        for (std::size_t i = 0; i < n; ++i)
            std::copy(p.data() + i * pd, p.data() + (i + 1) * pd, out.data() + i * d + off);
        off += pd;
    }
    bool any = false;
    for (const Tensor& p : parts)
        if (p.requires_grad()) any = true;
    if (tape().enabled() && any) {
        std::vector<Tensor> tp = parts;
        Tensor to = out;
        out.set_requires_grad(true);
        tape().record([tp, to, n, d]() mutable {
            const double* g = to.grad();
            std::size_t off = 0;
            for (Tensor& p : tp) {
                const std::size_t pd = p.cols();
                if (p.requires_grad()) {
                    double* dp = p.grad();
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < pd; ++j) dp[i * pd + j] += g[i * d + off + j];
                }
                off += pd;
            }
        });
    }
    return out;
}

Tensor col(const Tensor& a, std::size_t j) {
    check_2d("col", a);
    const std::size_t n = a.rows(), d = a.cols();
    if (j >= d) throw std::invalid_argument("col: index out of range");
    Tensor out = Tensor::zeros({n, 1});
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i * d + j];
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, n, d, j]() mutable {
            const double* g = to.grad();
            double* da = ta.grad();
            for (std::size_t i = 0; i < n; ++i) da[i * d + j] += g[i];
        });
    }
    return out;
}

Tensor relu(const Tensor& a) {
    return unary_op(
        a, [](double x) { return x > 0.0 ? x : 0.0; },
        [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor sigmoid(const Tensor& a) {
    return unary_op(
        a,
        [](double x) {
            return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                            : std::exp(x) / (1.0 + std::exp(x));
        },
        [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::tanh(x); },
        [](double, double y) { return 1.0 - y * y; });
}

Tensor artanh(const Tensor& a) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.data()[i]));
    if (worst >= 1.0)
        throw std::domain_error("artanh: input outside (-1,1), max |x| = " + std::to_string(worst));
    return unary_op(
        a, [](double x) { return std::atanh(x); },
        [](double x, double) { return 1.0 / (1.0 - x * x); });
}

Tensor exp(const Tensor& a) {
    return unary_op(
        a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& a) {
    double worst = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::min(worst, a.data()[i]);
    if (worst <= 0.0)
        throw std::domain_error("log: input must be > 0, min x = " + std::to_string(worst));
    return unary_op(
        a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Tensor reciprocal(const Tensor& a) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.data()[i] == 0.0) throw std::domain_error("reciprocal: zero entry");
    return unary_op(
        a, [](double x) { return 1.0 / x; },
        [](double, double y) { return -y * y; });
}

Tensor softmax_rows(const Tensor& a) {
    check_2d("softmax_rows", a);
    const std::size_t n = a.rows(), d = a.cols();
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < n; ++i) {
        const double* x = a.data() + i * d;
        double* y = out.data() + i * d;
        double mx = x[0];
        for (std::size_t j = 1; j < d; ++j) mx = std::max(mx, x[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            y[j] = std::exp(x[j] - mx);
            z += y[j];
        }
        const double inv = 1.0 / z;
        for (std::size_t j = 0; j < d; ++j) y[j] *= inv;
    }
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, n, d]() mutable {
            const double* g = to.grad();
            const double* y = to.data();
            double* da = ta.grad();
            for (std::size_t i = 0; i < n; ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < d; ++j) dot += g[i * d + j] * y[i * d + j];
                for (std::size_t j = 0; j < d; ++j)
                    da[i * d + j] += y[i * d + j] * (g[i * d + j] - dot);
            }
        });
    }
    return out;
}

Tensor dropout(const Tensor& a, double p, std::uint64_t seed) {
    if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0,1)");
    if (p == 0.0) return a;
    const std::size_t n = a.size();
    auto mask = std::make_shared<std::vector<double>>(n);
    {
        std::mt19937_64 rng = make_rng(seed);
        std::bernoulli_distribution keep(1.0 - p);
        const double scale = 1.0 / (1.0 - p);
        for (std::size_t i = 0; i < n; ++i) (*mask)[i] = keep(rng) ? scale : 0.0;
    }
    Tensor out = Tensor::zeros(a.shape());
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * (*mask)[i];
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        out.set_requires_grad(true);
        tape().record([ta, to, mask]() mutable {
            const double* g = to.grad();
            double* da = ta.grad();
            for (std::size_t i = 0; i < ta.size(); ++i) da[i] += g[i] * (*mask)[i];
        });
    }
    return out;
}

Tensor bce_with_logits(const Tensor& logits, const Tensor& targets, const Tensor& weights) {
    check_same_shape("bce_with_logits", logits, targets);
    const bool weighted = weights.defined();
    if (weighted) check_same_shape("bce_with_logits", logits, weights);
    const std::size_t n = logits.size();
    if (n == 0) throw std::invalid_argument("bce_with_logits: empty batch");
    double wsum = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = logits.data()[i];
        const double t = targets.data()[i];
        const double w = weighted ? weights.data()[i] : 1.0;
        const double term = std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
        acc += w * term;
        wsum += w;
    }
    Tensor out = Tensor::from_data({1}, {acc / wsum});
    if (grad_wanted({&logits})) {
        Tensor tl = logits, tt = targets, tw = weights, to = out;
        out.set_requires_grad(true);
        tape().record([tl, tt, tw, to, wsum, weighted]() mutable {
            const double g = to.grad()[0] / wsum;
            double* dl = tl.grad();
            for (std::size_t i = 0; i < tl.size(); ++i) {
                const double x = tl.data()[i];
                const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                          : std::exp(x) / (1.0 + std::exp(x));
                const double w = weighted ? tw.data()[i] : 1.0;
                dl[i] += g * w * (s - tt.data()[i]);
            }
        });
    }
    return out;
}

Tensor gather_rows(const Tensor& a, const std::vector<int>& idx) {
    check_2d("gather_rows", a);
    const std::size_t n = a.rows(), d = a.cols();
    Tensor out = Tensor::zeros({idx.size(), d});
    for (std::size_t r = 0; r < idx.size(); ++r) {
        if (idx[r] < 0 || static_cast<std::size_t>(idx[r]) >= n)
            throw std::invalid_argument("gather_rows: index out of range");
        std::copy(a.data() + idx[r] * d, a.data() + (idx[r] + 1) * d, out.data() + r * d);
    }
    if (grad_wanted({&a})) {
        Tensor ta = a, to = out;
        auto ix = std::make_shared<std::vector<int>>(idx);
        out.set_requires_grad(true);
        tape().record([ta, to, ix, d]() mutable {
            const double* g = to.grad();
            double* da = ta.grad();
            // serial scatter-add: rows may repeat
            for (std::size_t r = 0; r < ix->size(); ++r)
                for (std::size_t j = 0; j < d; ++j)
                    da[static_cast<std::size_t>((*ix)[r]) * d + j] += g[r * d + j];
        });
    }
    return out;
}

Tensor neighbor_agg(const Tensor& x, const std::vector<int>& indptr,
                    const std::vector<int>& indices, bool mean_normalize) {
    check_2d("neighbor_agg", x);
    const std::size_t n = x.rows(), d = x.cols();
    if (indptr.size() != n + 1) throw std::invalid_argument("neighbor_agg: indptr size mismatch");
    Tensor out = Tensor::zeros(x.shape());
    kernels::neighbor_aggregate(indptr.data(), indices.data(), x.data(), out.data(), n, d,
                                mean_normalize);
    if (grad_wanted({&x})) {
        Tensor tx = x, to = out;
        // the closure owns its own copy of the CSR; the caller's graph may
        // not outlive the backward pass
        auto ip = std::make_shared<std::vector<int>>(indptr);
        auto ix = std::make_shared<std::vector<int>>(indices);
        out.set_requires_grad(true);
        tape().record([tx, to, ip, ix, n, d, mean_normalize]() mutable {
            // adjoint of D^-1 (A+I): (A+I) D^-1, using symmetry of A+I
            std::vector<double> scaled(n * d);
            const double* g = to.grad();
            if (mean_normalize) {
                for (std::size_t i = 0; i < n; ++i) {
                    const double inv = 1.0 / static_cast<double>((*ip)[i + 1] - (*ip)[i] + 1);
                    for (std::size_t j = 0; j < d; ++j) scaled[i * d + j] = g[i * d + j] * inv;
                }
            } else {
                std::copy(g, g + n * d, scaled.begin());
            }
            std::vector<double> tmp(n * d);
            kernels::neighbor_aggregate(ip->data(), ix->data(), scaled.data(), tmp.data(), n, d,
                                        false);
            axpy(tx.grad(), tmp.data(), n * d);
        });
    }
    return out;
}

Tensor detach(const Tensor& a) { return a.clone(); }

}  // namespace gcl
