#pragma once

#include <cstdint>

#include "dhan/dataset.hpp"

namespace dhan {

struct SynthConfig {
  std::size_t n_papers = 600;
  std::size_t n_authors = 300;
  std::size_t n_venues = 4;
  std::size_t n_fields_l1 = 3;
  std::size_t n_fields_l2 = 8;
  std::size_t feature_dim = 32;

  // Paper features: venue_signal * venue prototype + field_signal * field
  // prototype + noise * N(0, 1).
  double venue_signal = 1.0;
  double field_signal = 0.5;
  double noise = 1.0;

  // Edge probabilities within and across the planted groups.
  double cite_in = 0.02;
  double cite_out = 0.002;
  double same_venue_in = 0.02;
  double same_venue_out = 0.0;
  double same_field_in = 0.02;
  double same_field_out = 0.0;
  double colleague_in = 0.08;
  double colleague_out = 0.004;
  // Extra paper relations with uniformly random edges.
  std::size_t noise_relations = 0;
  double noise_relation_p = 0.01;
  bool paper_meta_paths = false;  // adds pap1 (shared author), pap2 (colleague authors)

  // Probability that an author slot of a paper is filled from the
  // community aligned with the venue of that paper.
  double author_affinity = 0.9;
  std::size_t min_authors_per_paper = 1;
  std::size_t max_authors_per_paper = 3;
  double primary_field_affinity = 0.8;
  double secondary_field_p = 0.3;

  // Papers get years in [0, n_years); years < train_years train, the next
  // val_years validate, the rest test.
  std::size_t n_years = 10;
  std::size_t train_years = 6;
  std::size_t val_years = 2;

  std::size_t name_group_size = 4;
  double ad_author_fraction = 0.4;
  double ad_holdout = 0.5;

  std::uint64_t seed = 0;

  // Throws InfeasibleConfig.
  void validate() const;
};

// Planted bi-typed graph with authors (type A) and papers (type B) and the
// tasks pv, pf_l1, pf_l2 (papers) and ad (authors).
Dataset generate(const SynthConfig& config);

}  // namespace dhan
