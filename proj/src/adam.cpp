#include "gcl/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace gcl {

void ParamSet::add(std::string name, Tensor t) {
    t.set_requires_grad(true);
    items_.push_back({std::move(name), std::move(t)});
}

Tensor* ParamSet::find(const std::string& name) {
    for (auto& it : items_)
        if (it.name == name) return &it.tensor;
    return nullptr;
}

void ParamSet::zero_grad() {
    for (auto& it : items_) it.tensor.zero_grad();
}

Adam::Adam(ParamSet& params, AdamConfig cfg) : params_(params), cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& it : params.items()) {
        m_.emplace_back(it.tensor.size(), 0.0);
        v_.emplace_back(it.tensor.size(), 0.0);
    }
}

void Adam::step() {
    // validate all gradients before touching any parameter
    for (const auto& it : params_.items()) {
        const std::vector<double> g = it.tensor.grad_vector();
        for (double x : g)
            if (!std::isfinite(x))
                throw std::runtime_error("adam: non-finite gradient in parameter " + it.name);
    }
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t pi = 0; pi < params_.items().size(); ++pi) {
        Tensor t = params_.items()[pi].tensor;
        double* p = t.data();
        const double* g = t.grad();
        std::vector<double>& m = m_[pi];
        std::vector<double>& v = v_[pi];
        for (std::size_t i = 0; i < t.size(); ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) + cfg_.weight_decay * p[i]);
        }
    }
}

}  // namespace gcl
