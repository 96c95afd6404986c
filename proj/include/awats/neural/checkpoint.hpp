#pragma once

// AWNN model checkpoints.
//
// Layout (little-endian): "AWNN", u32 version, u32 mode (0 = AWATS,
// 1 = ATS), u32 q, u32 R, u32 W, u32 C, then until end of file one blob per
// parameter or running statistic: u32 name length, UTF-8 name, u64 element
// count, float32 values (column-major). Layer widths are recovered from the
// blob sizes.

#include <filesystem>

#include "awats/neural/model.hpp"

namespace awats::nn {

void save_checkpoint(Model<float>& model, const std::filesystem::path& path);
Model<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace awats::nn
