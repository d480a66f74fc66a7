#pragma once

#include <filesystem>

#include "snnlab/mlp.hpp"

namespace snnlab {

// Little-endian layout:
//   8 bytes   magic "SNNCKPT1"
//   u32       format version (1)
//   u32       number of widths W
//   u64 x W   layer widths
//   per layer: f64 weights (fan_in x fan_out, row-major), f64 bias (fan_out)
void save_checkpoint(const std::filesystem::path& path, const Params& params);
Params load_checkpoint(const std::filesystem::path& path);

}  // namespace snnlab
