#pragma once

#include <cstdint>
#include <vector>

#include "gcl/params.hpp"

namespace gcl {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled L2
};

// Bias-corrected Adam with decoupled weight decay. Moment buffers are keyed
// by position in the ParamSet; step() throws (and leaves parameters
// untouched) if any gradient is non-finite, naming the parameter.
class Adam {
  public:
    Adam(ParamSet& params, AdamConfig cfg);

    void step();
    void zero_grad() { params_.zero_grad(); }

    std::uint64_t step_count() const { return step_; }
    const AdamConfig& config() const { return cfg_; }

    // checkpoint support
    std::vector<std::vector<double>>& moments1() { return m_; }
    std::vector<std::vector<double>>& moments2() { return v_; }
    void set_step_count(std::uint64_t s) { step_ = s; }

  private:
    ParamSet& params_;
    AdamConfig cfg_;
    std::uint64_t step_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

}  // namespace gcl
