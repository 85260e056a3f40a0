#include "dhan/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dhan/error.hpp"

namespace dhan {

void adamw_step(OptimizerState& state, std::span<Tensor> params,
                std::span<const std::span<const double>> grads) {
  if (grads.size() != params.size())
    throw Error(ErrorCode::ShapeMismatch, "adamw_step: one gradient per parameter required");
  if (state.first_moment.empty()) {
    for (const auto& p : params) {
      state.first_moment.emplace_back(p.size(), 0.0);
      state.second_moment.emplace_back(p.size(), 0.0);
    }
  }
  if (state.first_moment.size() != params.size())
    throw Error(ErrorCode::ShapeMismatch, "adamw_step: parameter count changed");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (grads[i].size() != params[i].size() || state.first_moment[i].size() != params[i].size())
      throw Error(ErrorCode::ShapeMismatch,
                  "adamw_step: shape mismatch for parameter " + std::to_string(i));

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].mutable_data();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    const auto g = grads[i];
    for (std::size_t j = 0; j < theta.size(); ++j) {
      theta[j] -= state.lr * state.weight_decay * theta[j];
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      theta[j] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

void adamw_step(OptimizerState& state, std::span<Tensor> params) {
  std::vector<std::span<const double>> grads;
  grads.reserve(params.size());
  for (auto& p : params) grads.push_back(p.grad());
  adamw_step(state, params, grads);
}

double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double lr_max, double lr_min) {
  if (step > total_steps)
    throw Error(ErrorCode::StepOutOfRange, "step " + std::to_string(step) +
                                               " beyond schedule length " +
                                               std::to_string(total_steps));
  if (total_steps == 0) return lr_max;
  const double frac = static_cast<double>(step) / static_cast<double>(total_steps);
  return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace dhan
