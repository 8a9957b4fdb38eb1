#pragma once

#include <string>
#include <vector>

#include "gcl/tensor.hpp"

namespace gcl {

struct NamedParam {
    std::string name;
    Tensor tensor;
};

// Ordered collection of trainable tensors; iteration order is insertion
// order, which fixes the optimizer and checkpoint layout.
class ParamSet {
  public:
    void add(std::string name, Tensor t);
    Tensor* find(const std::string& name);
    const std::vector<NamedParam>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    void zero_grad();

  private:
    std::vector<NamedParam> items_;
};

}  // namespace gcl
