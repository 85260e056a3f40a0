#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <unistd.h>
#include <functional>
#include <numeric>
#include <vector>

#include "dhan/dataset.hpp"
#include "dhan/graph.hpp"
#include "dhan/model.hpp"
#include "dhan/rng.hpp"
#include "dhan/tensor.hpp"

namespace dhan::testing {

struct RandomGraphOptions {
  std::size_t max_nodes = 10;   // per type, at least 2
  std::size_t feature_dim = 3;
  double intra_p = 0.3;
  double inter_p = 0.25;
  bool isolate_inter = true;  // the last node of each type gets no inter edges
};

// Two intra relations per type (one symmetric, one directed) and two inter
// relations, with random sizes and features.
inline BMHGraph random_graph(std::uint64_t seed, const RandomGraphOptions& o = {}) {
  Rng rng(seed);
  const auto na = static_cast<std::uint32_t>(2 + uniform_index(rng, o.max_nodes - 1));
  const auto nb = static_cast<std::uint32_t>(2 + uniform_index(rng, o.max_nodes - 1));
  const NodeType A = NodeType::A, B = NodeType::B;
  std::vector<RelationSpec> rels{
      {0, RelationClass::IntraA, A, A, "colleague", true},
      {1, RelationClass::IntraA, A, A, "advises", false},
      {2, RelationClass::IntraB, B, B, "cite", false},
      {3, RelationClass::IntraB, B, B, "same_venue", true},
      {4, RelationClass::Inter, A, B, "important", false},
      {5, RelationClass::Inter, A, B, "ordinary", false},
  };
  std::vector<Edge> edges;
  for (std::uint32_t r = 0; r < 4; ++r) {
    const NodeType t = r < 2 ? A : B;
    const std::uint32_t n = r < 2 ? na : nb;
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = 0; j < n; ++j)
        if (i != j && uniform_unit(rng) < o.intra_p) edges.push_back({r, {t, i}, {t, j}});
  }
  const std::uint32_t ia = o.isolate_inter ? na - 1 : na, ib = o.isolate_inter ? nb - 1 : nb;
  for (std::uint32_t r = 4; r < 6; ++r)
    for (std::uint32_t i = 0; i < ia; ++i)
      for (std::uint32_t j = 0; j < ib; ++j)
        if (uniform_unit(rng) < o.inter_p) edges.push_back({r, {A, i}, {B, j}});
  std::array<Matrix, kNumNodeTypes> x{Matrix(na, o.feature_dim), Matrix(nb, o.feature_dim)};
  for (auto& m : x)
    for (auto& v : m.values) v = standard_normal(rng);
  return build_graph({na, nb}, std::move(x), rels, edges);
}

// Rebuilds `g` with node ids of each type relabeled: new id = perm[t][old id].
inline BMHGraph permute_graph(const BMHGraph& g,
                              const std::array<std::vector<std::uint32_t>, 2>& perm) {
  std::array<Matrix, kNumNodeTypes> x;
  for (std::size_t t = 0; t < 2; ++t) {
    const Matrix& f = g.features(NodeType(t));
    x[t] = Matrix(f.rows, f.cols);
    for (std::size_t i = 0; i < f.rows; ++i)
      for (std::size_t j = 0; j < f.cols; ++j) x[t](perm[t][i], j) = f(i, j);
  }
  auto edges = g.edges();
  for (auto& e : edges) {
    e.src.id = perm[type_index(e.src.type)][e.src.id];
    e.dst.id = perm[type_index(e.dst.type)][e.dst.id];
  }
  return build_graph(g.node_counts(), std::move(x), g.relations(), edges);
}

inline std::vector<std::uint32_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::uint32_t> p(n);
  std::iota(p.begin(), p.end(), 0u);
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[uniform_index(rng, i)]);
  return p;
}

inline Tensor random_tensor(std::size_t r, std::size_t c, Rng& rng, bool grad = true,
                            double bound = 2.0) {
  std::vector<double> v(r * c);
  for (auto& x : v) x = uniform_real(rng, -bound, bound);
  return Tensor::from(r, c, std::move(v), grad);
}

// Max relative error |a - n| / max(|a|, |n|, floor) between the analytic
// gradient of `f` w.r.t. each input and central differences.
inline double max_grad_error(const std::function<Tensor(Tape&)>& f,
                             const std::vector<Tensor>& inputs, double h = 1e-5,
                             double floor = 1e-6) {
  for (const auto& t : inputs) t.zero_grad();
  {
    Tape tape;
    const Tensor loss = f(tape);
    tape.backward(loss);
  }
  double worst = 0.0;
  for (auto t : inputs) {
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    for (std::size_t e = 0; e < t.size(); ++e) {
      const double orig = t.data()[e];
      t.mutable_data()[e] = orig + h;
      Tape t1;
      const double up = f(t1).item();
      t.mutable_data()[e] = orig - h;
      Tape t2;
      const double down = f(t2).item();
      t.mutable_data()[e] = orig;
      const double numeric = (up - down) / (2 * h);
      const double denom = std::max({std::abs(analytic[e]), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(analytic[e] - numeric) / denom);
    }
  }
  return worst;
}

// Overwrites every parameter entry with uniform(-bound, bound) so that tests
// do not depend on the symmetric initial values (zero logits, unit gains).
inline void perturb_params(EncoderParams& params, Rng& rng, double bound = 1.0) {
  for (auto& nt : params.named())
    for (auto& v : nt.tensor.mutable_data()) v = uniform_real(rng, -bound, bound);
}

struct NormalizationReport {
  double attention = 0.0;     // node-level alpha / gamma segment sums
  double relation = 0.0;      // beta_G, beta_i and epsilon sums
  double coefficients = 0.0;  // final mixing weights per node
  std::size_t segments = 0;
  std::size_t rows = 0;
};

// Worst deviation from 1 of every softmax family in the recorded forward.
// Rows of a relation-level family are expected to sum to 1 when the node has
// a neighbor under at least one of the stage's relations, and to 0 otherwise.
inline NormalizationReport normalization_errors(const ForwardResult& fr) {
  NormalizationReport rep;
  for (const auto& rec : fr.attention) {
    const auto& adj = *rec.adjacency;
    for (std::size_t i = 0; i < adj.num_rows(); ++i) {
      if (adj.degree(i) == 0) continue;
      double total = 0.0;
      for (auto e = adj.row_offsets[i]; e < adj.row_offsets[i + 1]; ++e) total += rec.alpha[e];
      rep.attention = std::max(rep.attention, std::abs(total - 1.0));
      ++rep.segments;
    }
  }
  for (const auto& fu : fr.fusion) {
    std::vector<const AttentionRecord*> parts;
    for (const auto& name : fu.relations)
      for (const auto& rec : fr.attention)
        if (rec.layer == fu.layer && rec.stage == fu.stage && rec.target == fu.target &&
            rec.relation == name)
          parts.push_back(&rec);
    if (parts.size() != fu.relations.size()) {
      rep.coefficients = INFINITY;
      continue;
    }
    auto check = [&](const Matrix& m, double& worst) {
      for (std::size_t i = 0; i < m.rows; ++i) {
        bool any = false;
        for (const auto* p : parts) any = any || p->adjacency->degree(i) > 0;
        double total = 0.0;
        for (double v : m.row(i)) total += v;
        worst = std::max(worst, std::abs(total - (any ? 1.0 : 0.0)));
        ++rep.rows;
      }
    };
    if (!fu.global_weights.empty()) {
      double total = 0.0;
      for (double v : fu.global_weights) total += v;
      rep.relation = std::max(rep.relation, std::abs(total - 1.0));
    }
    if (fu.local_weights.rows > 0) check(fu.local_weights, rep.relation);
    check(fu.coefficients, rep.coefficients);
  }
  return rep;
}

// First difference between two datasets, or "" when they are identical,
// features compared bitwise.
inline std::string dataset_diff(const Dataset& a, const Dataset& b) {
  const BMHGraph &ga = a.graph, &gb = b.graph;
  if (ga.node_counts() != gb.node_counts()) return "node counts";
  for (std::size_t t = 0; t < kNumNodeTypes; ++t)
    if (!(ga.features(NodeType(t)) == gb.features(NodeType(t))))
      return "features of type " + std::to_string(t);
  if (ga.relations() != gb.relations()) return "relations";
  const auto ea = ga.edges(), eb = gb.edges();
  if (ea.size() != eb.size()) return "edge count";
  for (std::size_t i = 0; i < ea.size(); ++i)
    if (ea[i].relation != eb[i].relation || ea[i].src.type != eb[i].src.type ||
        ea[i].src.id != eb[i].src.id || ea[i].dst.type != eb[i].dst.type || ea[i].dst.id != eb[i].dst.id)
      return "edge " + std::to_string(i);
  if (a.tasks.size() != b.tasks.size()) return "task count";
  for (std::size_t i = 0; i < a.tasks.size(); ++i) {
    const TaskSpec &x = a.tasks[i], &y = b.tasks[i];
    if (x.name != y.name || x.kind != y.kind || x.target != y.target || x.num_classes != y.num_classes)
      return "task header " + x.name;
    if (x.labels != y.labels) return "labels of " + x.name;
    if (x.split != y.split) return "splits of " + x.name;
    if (x.group != y.group) return "groups of " + x.name;
  }
  return "";
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dhan_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace dhan::testing
