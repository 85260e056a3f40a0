#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dhan/matrix.hpp"
#include "dhan/tensor.hpp"

namespace dhan {

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// File layout: one line of JSON {"format":"dhan-checkpoint","version":1,
// "tensors":[{"name":..,"shape":[r,c]},..]} followed by a newline and the
// raw little-endian real64 values of every tensor in header order.
void save_checkpoint(const std::filesystem::path& path, std::span<const NamedTensor> tensors);

std::vector<std::pair<std::string, Matrix>> read_checkpoint(const std::filesystem::path& path);

// Copies stored values into `tensors`; names and shapes must match exactly.
void load_checkpoint(const std::filesystem::path& path, std::span<NamedTensor> tensors);

}  // namespace dhan
