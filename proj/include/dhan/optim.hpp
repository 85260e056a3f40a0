#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dhan/tensor.hpp"

namespace dhan {

struct OptimizerState {
  double lr = 1e-3;
  double weight_decay = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

// One AdamW update with decoupled weight decay: the decay shrinks the
// parameter before the bias-corrected Adam step is applied. Moments are
// created on the first call and must keep their shapes afterwards.
void adamw_step(OptimizerState& state, std::span<Tensor> params,
                std::span<const std::span<const double>> grads);
// Same, reading each parameter's accumulated gradient.
void adamw_step(OptimizerState& state, std::span<Tensor> params);

// Cosine annealing from lr_max at step 0 down to lr_min at total_steps.
double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr_max, double lr_min);

}  // namespace dhan
