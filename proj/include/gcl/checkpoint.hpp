#pragma once

#include <optional>
#include <string>

#include "gcl/adam.hpp"
#include "gcl/params.hpp"

namespace gcl {

// Binary container, little-endian throughout:
//   magic "GCLCKPT1" | u32 version | u32 param count
//   per parameter: u32 name length | name bytes | u32 rank | u64 extents... |
//                  f64 values...
//   u8 has_adam; if set: u64 step | f64 lr,beta1,beta2,eps,weight_decay |
//                  per parameter f64 m... then f64 v...
void save_checkpoint(const std::string& path, const ParamSet& params, const Adam* adam = nullptr);

// Loads values into an existing ParamSet; names and shapes must match
// exactly. If adam is given, its moment buffers and step are restored.
void load_checkpoint(const std::string& path, ParamSet& params, Adam* adam = nullptr);

// Reads only the parameter table (names + shapes) without loading values.
std::vector<std::pair<std::string, Shape>> peek_checkpoint(const std::string& path);

}  // namespace gcl
