#include "dhan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "dhan/error.hpp"
#include "dhan/rng.hpp"

namespace dhan {

namespace {

void check_instance(const RankingInstance& inst) {
  if (inst.scores.size() != inst.relevant.size())
    throw Error(ErrorCode::ShapeMismatch, "scores and relevance flags differ in length");
  if (std::none_of(inst.relevant.begin(), inst.relevant.end(), [](auto r) { return r != 0; }))
    throw Error(ErrorCode::NoRelevant, "ranking instance has no relevant candidate");
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

// Dense relabeling to 0..k-1 in order of first appearance.
std::vector<std::uint32_t> compact(std::span<const std::uint32_t> labels, std::size_t& k) {
  std::map<std::uint32_t, std::uint32_t> ids;
  std::vector<std::uint32_t> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.emplace(labels[i], static_cast<std::uint32_t>(ids.size()));
    out[i] = it->second;
  }
  k = ids.size();
  return out;
}

struct Contingency {
  std::size_t ka = 0, kb = 0;
  std::vector<double> table;  // ka x kb
  std::vector<double> row_sums, col_sums;
  double n = 0.0;
};

Contingency contingency(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::ShapeMismatch, "labelings differ in length");
  if (a.empty()) throw Error(ErrorCode::EmptySet, "labelings are empty");
  Contingency c;
  const auto ca = compact(a, c.ka);
  const auto cb = compact(b, c.kb);
  c.table.assign(c.ka * c.kb, 0.0);
  c.row_sums.assign(c.ka, 0.0);
  c.col_sums.assign(c.kb, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.table[ca[i] * c.kb + cb[i]] += 1.0;
    c.row_sums[ca[i]] += 1.0;
    c.col_sums[cb[i]] += 1.0;
  }
  c.n = static_cast<double>(a.size());
  return c;
}

// Terms are summed in ascending order so that equal multisets of terms give
// bitwise-equal sums; a perfect clustering then has NMI exactly 1.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

double entropy(std::span<const double> counts, double n) {
  std::vector<double> terms;
  for (double c : counts)
    if (c > 0.0) terms.push_back((c / n) * std::log(n / c));
  return sorted_sum(terms);
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

}  // namespace

std::vector<std::uint32_t> rank_order(std::span<const double> scores) {
  std::vector<std::uint32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t x, std::uint32_t y) { return scores[x] > scores[y]; });
  return order;
}

double ndcg(const RankingInstance& inst) {
  check_instance(inst);
  const auto order = rank_order(inst.scores);
  double dcg = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r)
    if (inst.relevant[order[r]]) dcg += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  const auto n_rel = std::count_if(inst.relevant.begin(), inst.relevant.end(),
                                   [](auto v) { return v != 0; });
  double ideal = 0.0;
  for (long r = 0; r < n_rel; ++r) ideal += 1.0 / std::log2(static_cast<double>(r) + 2.0);
  return dcg / ideal;
}

double mrr(const RankingInstance& inst) {
  check_instance(inst);
  const auto order = rank_order(inst.scores);
  for (std::size_t r = 0; r < order.size(); ++r)
    if (inst.relevant[order[r]]) return 1.0 / static_cast<double>(r + 1);
  return 0.0;
}

double mean_mrr(std::span<const RankingInstance> instances) {
  if (instances.empty()) throw Error(ErrorCode::EmptySet, "no ranking instances");
  double s = 0.0;
  for (const auto& inst : instances) s += mrr(inst);
  return s / static_cast<double>(instances.size());
}

double accuracy(std::span<const std::uint32_t> predictions,
                std::span<const std::uint32_t> labels) {
  if (predictions.size() != labels.size())
    throw Error(ErrorCode::ShapeMismatch, "predictions and labels differ in length");
  if (predictions.empty()) throw Error(ErrorCode::EmptySet, "accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double nmi(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  const Contingency c = contingency(a, b);
  if (c.ka == 1 && c.kb == 1) return 1.0;
  std::vector<double> terms;
  for (std::size_t i = 0; i < c.ka; ++i)
    for (std::size_t j = 0; j < c.kb; ++j) {
      const double nij = c.table[i * c.kb + j];
      if (nij > 0.0)
        terms.push_back((nij / c.n) * std::log(c.n * nij / (c.row_sums[i] * c.col_sums[j])));
    }
  const double mi = sorted_sum(terms);
  const double denom = 0.5 * (entropy(c.row_sums, c.n) + entropy(c.col_sums, c.n));
  if (denom <= 0.0) return 0.0;
  return std::clamp(mi / denom, 0.0, 1.0);
}

double ari(std::span<const std::uint32_t> truth, std::span<const std::uint32_t> pred) {
  const Contingency c = contingency(truth, pred);
  if (c.ka == 1) return 0.0;
  // All pair counts are integers; with P = C(n,2) the index is
  // 2 (index P - a b) / ((a + b) P - 2 a b), evaluated exactly and divided once.
  __extension__ using Wide = __int128;
  auto pairs = [](double x) {
    const auto v = static_cast<Wide>(x);
    return v * (v - 1) / 2;
  };
  Wide index = 0, sum_a = 0, sum_b = 0;
  for (double nij : c.table) index += pairs(nij);
  for (double x : c.row_sums) sum_a += pairs(x);
  for (double x : c.col_sums) sum_b += pairs(x);
  const Wide total = pairs(c.n);
  const Wide num = 2 * (index * total - sum_a * sum_b);
  const Wide den = (sum_a + sum_b) * total - 2 * sum_a * sum_b;
  if (den == 0) return 1.0;
  return static_cast<double>(num) / static_cast<double>(den);
}

KMeansResult kmeans(const Matrix& points, std::size_t k, std::uint64_t seed,
                    std::size_t max_iterations) {
  const std::size_t n = points.rows, d = points.cols;
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k-means needs k >= 2");
  for (double v : points.values)
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite embedding");
  std::set<std::vector<double>> distinct;
  for (std::size_t i = 0; i < n && distinct.size() < k; ++i)
    distinct.emplace(points.row(i).begin(), points.row(i).end());
  if (distinct.size() < k)
    throw Error(ErrorCode::DegenerateData, "fewer distinct points than clusters");

  Rng rng(seed);
  Matrix centers(k, d);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::size_t first = uniform_index(rng, n);
  std::copy(points.row(first).begin(), points.row(first).end(), centers.row(0).begin());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], squared_distance(points.row(i), centers.row(c - 1)));
      total += dist[i];
    }
    std::size_t pick = n - 1;
    double target = uniform_unit(rng) * total;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i] <= 0.0) continue;
      target -= dist[i];
      if (target < 0.0) {
        pick = i;
        break;
      }
    }
    while (dist[pick] <= 0.0) pick = (pick + n - 1) % n;
    std::copy(points.row(pick).begin(), points.row(pick).end(), centers.row(c).begin());
  }

  KMeansResult res;
  res.assignments.assign(n, std::numeric_limits<std::uint32_t>::max());
  for (res.iterations = 0; res.iterations < max_iterations; ++res.iterations) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::uint32_t best = 0;
      double best_d = squared_distance(points.row(i), centers.row(0));
      for (std::size_t c = 1; c < k; ++c) {
        const double dc = squared_distance(points.row(i), centers.row(c));
        if (dc < best_d) {
          best_d = dc;
          best = static_cast<std::uint32_t>(c);
        }
      }
      if (res.assignments[i] != best) {
        res.assignments[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    Matrix sums(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = sums.row(res.assignments[i]);
      for (std::size_t j = 0; j < d; ++j) row[j] += points(i, j);
      ++counts[res.assignments[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;  // empty cluster keeps its center
      for (std::size_t j = 0; j < d; ++j)
        centers(c, j) = sums(c, j) / static_cast<double>(counts[c]);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    res.inertia += squared_distance(points.row(i), centers.row(res.assignments[i]));
  return res;
}

ClusteringResult kmeans_cluster_eval(const Matrix& embeddings,
                                     std::span<const std::uint32_t> true_labels, std::size_t k,
                                     std::size_t repeats, std::uint64_t seed) {
  if (true_labels.size() != embeddings.rows)
    throw Error(ErrorCode::ShapeMismatch, "one true label per embedding row required");
  if (repeats == 0) throw Error(ErrorCode::InvalidArgument, "repeats must be positive");
  ClusteringResult out;
  out.k = k;
  out.inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < repeats; ++r) {
    KMeansResult km = kmeans(embeddings, k, derive_seed(seed, r));
    out.nmi.push_back(nmi(true_labels, km.assignments));
    out.ari.push_back(ari(true_labels, km.assignments));
    if (km.inertia < out.inertia) {
      out.inertia = km.inertia;
      out.assignments = std::move(km.assignments);
    }
  }
  out.nmi_mean = mean_of(out.nmi);
  out.nmi_std = std_of(out.nmi);
  out.ari_mean = mean_of(out.ari);
  out.ari_std = std_of(out.ari);
  return out;
}

}  // namespace dhan
