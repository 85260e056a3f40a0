#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dhan/matrix.hpp"

namespace dhan {

struct RankingInstance {
  std::vector<double> scores;
  std::vector<std::uint8_t> relevant;
};

// Candidate order by descending score, ties by ascending index.
std::vector<std::uint32_t> rank_order(std::span<const double> scores);

double ndcg(const RankingInstance& instance);
double mrr(const RankingInstance& instance);
double mean_mrr(std::span<const RankingInstance> instances);
double accuracy(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> labels);

// Arithmetic-mean normalized mutual information between two labelings.
double nmi(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);
// Adjusted Rand index; 0 when the reference labeling `truth` has one cluster.
double ari(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred);

struct KMeansResult {
  std::vector<std::uint32_t> assignments;
  double inertia = 0.0;
  std::size_t iterations = 0;
};

// Lloyd's algorithm from a k-means++ seeding.
KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations = 300);

struct ClusteringResult {
  std::vector<std::uint32_t> assignments;  // from the lowest-inertia repeat
  std::size_t k = 0;
  double inertia = 0.0;
  std::vector<double> nmi;  // per repeat
  std::vector<double> ari;
  double nmi_mean = 0.0;
  double nmi_std = 0.0;
  double ari_mean = 0.0;
  double ari_std = 0.0;
};

ClusteringResult kmeans_cluster_eval(const Matrix& embeddings,
                                     std::span<const std::uint32_t> true_labels, std::size_t k,
                                     std::size_t repeats, std::uint64_t seed);

}  // namespace dhan
