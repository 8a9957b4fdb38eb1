#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace gcl {

using Shape = std::vector<std::size_t>;

// Dense 64-bit tensor with value semantics over shared storage. Arithmetic on
// tensors records backward rules on the thread-confined tape; backward() runs
// the rules in reverse recording order and accumulates (+=) into the grad
// buffers of requires_grad leaves.
class Tensor {
  public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value);
    // Checked constructor: size must match the shape and no entry may be
    // NaN/Inf.
    static Tensor from_data(Shape shape, std::vector<double> data);
    static Tensor scalar(double v);
    static Tensor eye(std::size_t n);

    bool defined() const { return node_ != nullptr; }
    const Shape& shape() const;
    std::size_t size() const;
    std::size_t rank() const;
    // rank-2 accessors (rank-1 tensors count as a single row)
    std::size_t rows() const;
    std::size_t cols() const;
    bool is_scalar() const { return defined() && size() == 1; }

    double* data();
    const double* data() const;
    double item() const;
    double at(std::size_t i, std::size_t j) const;

    bool requires_grad() const;
    Tensor& set_requires_grad(bool v);

    bool has_grad() const;
    double* grad();
    const double* grad() const;
    void ensure_grad();
    void zero_grad();
    std::vector<double> grad_vector() const;

    // Deep copy of the value only (no grad, no recorded history).
    Tensor clone() const;

    bool same_storage(const Tensor& o) const { return node_ == o.node_; }

  private:
    struct Node;
    std::shared_ptr<Node> node_;
};

class Tape {
  public:
    using BackwardFn = std::function<void()>;

    void record(BackwardFn fn);
    std::size_t size() const { return entries_.size(); }
    void clear() { entries_.clear(); }
    bool enabled() const { return enabled_; }
    void set_enabled(bool e) { enabled_ = e; }

    // Reverse sweep over the recorded rules, then clear.
    void run_backward();

  private:
    std::vector<BackwardFn> entries_;
    bool enabled_ = true;
};

// The process-wide tape. Recording is confined to the single training thread.
Tape& tape();

// RAII guard that suspends tape recording (inference, oracles, evaluators).
class NoGradGuard {
  public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

  private:
    bool prev_;
};

// Seeds d(loss)/d(loss) = 1 and runs the tape backward. loss must be scalar
// and the tape nonempty.
void backward(const Tensor& loss);

}  // namespace gcl
