#include "gcl/tensor.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace gcl {

struct Tensor::Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;  // empty until ensure_grad()
    bool requires_grad = false;
};

namespace {
std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (std::size_t e : s) n *= e;
    return n;
}
}  // namespace

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->shape = std::move(shape);
    t.node_->value.assign(shape_numel(t.node_->shape), 0.0);
    t.node_->requires_grad = requires_grad;
    return t;
}

Tensor Tensor::full(Shape shape, double value) {
    Tensor t = zeros(std::move(shape));
    for (double& v : t.node_->value) v = value;
    return t;
}

Tensor Tensor::from_data(Shape shape, std::vector<double> data) {
    if (shape_numel(shape) != data.size())
        throw std::invalid_argument("Tensor::from_data: size does not match shape");
    for (double v : data)
        if (!std::isfinite(v))
            throw std::invalid_argument("Tensor::from_data: non-finite entry");
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->shape = std::move(shape);
    t.node_->value = std::move(data);
    return t;
}

Tensor Tensor::scalar(double v) { return from_data({1}, {v}); }

Tensor Tensor::eye(std::size_t n) {
    Tensor t = zeros({n, n});
    for (std::size_t i = 0; i < n; ++i) t.node_->value[i * n + i] = 1.0;
    return t;
}

const Shape& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->value.size(); }
std::size_t Tensor::rank() const { return node_->shape.size(); }

std::size_t Tensor::rows() const { return rank() >= 2 ? node_->shape[0] : 1; }
std::size_t Tensor::cols() const {
    return rank() >= 2 ? node_->shape[1] : (rank() == 1 ? node_->shape[0] : 1);
}

double* Tensor::data() { return node_->value.data(); }
const double* Tensor::data() const { return node_->value.data(); }

double Tensor::item() const {
    if (!is_scalar()) throw std::invalid_argument("Tensor::item: tensor is not scalar");
    return node_->value[0];
}

double Tensor::at(std::size_t i, std::size_t j) const { return node_->value[i * cols() + j]; }

bool Tensor::requires_grad() const { return defined() && node_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool v) {
    node_->requires_grad = v;
    if (v) ensure_grad();
    return *this;
}

bool Tensor::has_grad() const { return defined() && !node_->grad.empty(); }

double* Tensor::grad() {
    ensure_grad();
    return node_->grad.data();
}

const double* Tensor::grad() const {
    if (!has_grad()) throw std::logic_error("Tensor::grad: no grad buffer");
    return node_->grad.data();
}

void Tensor::ensure_grad() {
    if (node_->grad.empty()) node_->grad.assign(node_->value.size(), 0.0);
}

void Tensor::zero_grad() {
    if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
}

std::vector<double> Tensor::grad_vector() const {
    if (!has_grad()) return std::vector<double>(size(), 0.0);
    return node_->grad;
}

Tensor Tensor::clone() const {
    Tensor t;
    t.node_ = std::make_shared<Node>();
    t.node_->shape = node_->shape;
    t.node_->value = node_->value;
    return t;
}

void Tape::record(BackwardFn fn) { entries_.push_back(std::move(fn)); }

void Tape::run_backward() {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) (*it)();
    entries_.clear();
}

Tape& tape() {
    static Tape t;
    return t;
}

NoGradGuard::NoGradGuard() : prev_(tape().enabled()) { tape().set_enabled(false); }
NoGradGuard::~NoGradGuard() { tape().set_enabled(prev_); }

void backward(const Tensor& loss) {
    if (!loss.is_scalar()) throw std::invalid_argument("backward: loss must be scalar");
    if (tape().size() == 0) throw std::logic_error("backward: tape is empty");
    Tensor seed = loss;
    seed.ensure_grad();
    seed.grad()[0] += 1.0;
    tape().run_backward();
}

}  // namespace gcl
