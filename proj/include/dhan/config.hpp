#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dhan {

enum class Variant { Full, NoDual, NoHierarchy, NoGlobal };
enum class Ordering { IntraThenInter, Inverted, Parallel };

std::string_view variant_name(Variant v);  // full | no-dual | no-hier | no-global
Variant parse_variant(std::string_view text);
std::string_view ordering_name(Ordering o);  // standard | inverted | parallel
Ordering parse_ordering(std::string_view text);

struct ModelConfig {
  std::size_t input_dim = 0;  // filled from the dataset when 0
  std::size_t hidden_dim = 128;
  std::size_t layers = 2;
  double dropout = 0.2;
  double temperature = 1.0;
  double lambda_intra = 0.5;  // residual gate after the intra stage
  double lambda_inter = 0.5;  // residual gate after the inter stage
  double slope = 0.2;
  double weight_decay = 1e-2;
  double lr_max = 5e-3;
  double lr_min = 1e-5;
  std::size_t epochs = 200;
  std::uint64_t seed = 0;
  Variant variant = Variant::Full;
  Ordering ordering = Ordering::IntraThenInter;
  bool pf_l1_extra_residual = false;
  // Use -sum y log(softmax(logits) / T) instead of softmax(logits / T).
  bool literal_temperature = false;
  std::size_t link_negatives = 4;
  // Task names to optimize; empty means every task in the dataset.
  std::vector<std::string> tasks;

  // Throws InvalidArgument on out-of-range values.
  void validate() const;
};

}  // namespace dhan
