#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dhan/config.hpp"
#include "dhan/dataset.hpp"

namespace dhan {

// Seeded 20-node graph (10 per type) with two relations per class, one
// unconnected inter-class node per type, and a single-label, a multi-label
// and a link task.
Dataset gradcheck_dataset(std::uint64_t seed);

struct GradcheckEntry {
  std::string setting;  // variant/ordering label
  std::string parameter;
  std::size_t element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradcheckReport {
  std::size_t checked = 0;
  GradcheckEntry worst;
  std::vector<std::string> settings;
};

// |a - n| / max(|a|, |n|, 1e-6)
double gradcheck_rel_error(double analytic, double numeric);

// Central differences with step `h` for every parameter element of `config`
// (dropout forced to 0) on `dataset`.
GradcheckReport gradcheck_model(const Dataset& dataset, const ModelConfig& config, double h,
                                const std::string& setting = "");

// The suite behind the `gradcheck` command: hidden 4, two layers, every
// variant under the standard ordering plus the inverted and parallel
// orderings of the full model.
GradcheckReport gradcheck_suite(std::uint64_t seed, double h = 1e-5);

}  // namespace dhan
