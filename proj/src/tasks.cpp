#include "dhan/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dhan/error.hpp"
#include "dhan/kernels.hpp"
#include "dhan/ops.hpp"
#include "dhan/params.hpp"

namespace dhan {

std::string_view task_kind_name(TaskKind k) {
  switch (k) {
    case TaskKind::SingleLabel: return "single";
    case TaskKind::MultiLabel: return "multi";
    case TaskKind::LinkRanking: return "link";
  }
  return "?";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "single") return TaskKind::SingleLabel;
  if (text == "multi") return TaskKind::MultiLabel;
  if (text == "link") return TaskKind::LinkRanking;
  throw Error(ErrorCode::ParseError, "unknown task kind '" + std::string(text) + "'");
}

std::string_view split_name(Split s) {
  switch (s) {
    case Split::None: return "none";
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "none") return Split::None;
  if (text == "train") return Split::Train;
  if (text == "val") return Split::Val;
  if (text == "test") return Split::Test;
  throw Error(ErrorCode::ParseError, "unknown split '" + std::string(text) + "'");
}

std::vector<std::uint32_t> TaskSpec::nodes(Split s) const {
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == s && !labels[i].empty()) out.push_back(static_cast<std::uint32_t>(i));
  return out;
}

std::vector<std::uint32_t> TaskSpec::candidates(std::uint32_t node) const {
  std::set<std::uint32_t> c(labels[node].begin(), labels[node].end());
  if (group[node] >= 0)
    for (std::size_t i = 0; i < group.size(); ++i)
      if (group[i] == group[node]) c.insert(labels[i].begin(), labels[i].end());
  return {c.begin(), c.end()};
}

void TaskSpec::validate(const BMHGraph& graph) const {
  const std::size_t n = graph.num_nodes(target);
  if (labels.size() != n || split.size() != n)
    throw Error(ErrorCode::InvalidArgument,
                "task '" + name + "' must carry one label list and split per target node");
  const std::size_t bound =
      kind == TaskKind::LinkRanking ? graph.num_nodes(other_type(target)) : num_classes;
  if (kind != TaskKind::LinkRanking && num_classes < 2)
    throw Error(ErrorCode::InvalidArgument, "task '" + name + "' needs at least two classes");
  if (kind == TaskKind::LinkRanking && group.size() != n)
    throw Error(ErrorCode::InvalidArgument, "task '" + name + "' needs one group per node");
  for (std::size_t i = 0; i < n; ++i) {
    if (kind == TaskKind::SingleLabel && labels[i].size() > 1)
      throw Error(ErrorCode::InvalidArgument,
                  "single-label task '" + name + "' has a node with several labels");
    for (auto l : labels[i])
      if (l >= bound)
        throw Error(ErrorCode::NodeOutOfRange,
                    "task '" + name + "' label " + std::to_string(l) + " out of range");
  }
}

TaskHead init_head(const TaskSpec& task, std::size_t hidden, Rng& rng) {
  TaskHead head;
  if (task.kind == TaskKind::LinkRanking) {
    head.target_map = glorot(hidden, hidden, rng);
    head.candidate_map = glorot(hidden, hidden, rng);
  } else {
    head.weight = glorot(hidden, task.num_classes, rng);
    head.bias = Tensor::zeros(1, task.num_classes, true);
  }
  return head;
}

std::vector<NamedTensor> named_head(const TaskSpec& task, const TaskHead& head) {
  const std::string p = "head." + task.name + ".";
  if (task.kind == TaskKind::LinkRanking)
    return {{p + "target_map", head.target_map}, {p + "candidate_map", head.candidate_map}};
  return {{p + "weight", head.weight}, {p + "bias", head.bias}};
}

namespace {

Tensor class_logits(Tape& tape, const Tensor& emb, const TaskHead& head,
                    std::span<const std::uint32_t> nodes) {
  const Tensor rows = ops::gather_rows(tape, emb, nodes);
  return ops::add_row_broadcast(tape, ops::linear(tape, rows, head.weight), head.bias);
}

Tensor finish_loss(Tape& tape, const Tensor& loss, const LossOptions& options) {
  if (!options.literal_temperature) return loss;
  return ops::add_scalar(tape, loss, std::log(options.temperature));
}

Tensor temper(Tape& tape, const Tensor& logits, const LossOptions& options) {
  if (options.literal_temperature || options.temperature == 1.0) return logits;
  return ops::scalar_mul(tape, logits, 1.0 / options.temperature);
}

std::vector<double> matmul(const Tensor& a, const Tensor& b) {
  std::vector<double> c(a.rows() * b.cols());
  kernels::omp::gemm(a.rows(), a.cols(), b.cols(), a.data(), b.data(), c);
  return c;
}

}  // namespace

Tensor task_loss(Tape& tape, const TypeEmbeddings& embeddings, const TaskSpec& task,
                 const TaskHead& head, Split split, const LossOptions& options) {
  if (!(options.temperature > 0.0))
    throw Error(ErrorCode::InvalidArgument, "temperature must be positive");
  const auto nodes = task.nodes(split);
  if (nodes.empty())
    throw Error(ErrorCode::NoLabeledNodes, "task '" + task.name + "' has no labeled nodes in the " +
                                               std::string(split_name(split)) + " split");
  const Tensor& emb = embeddings[type_index(task.target)];

  if (task.kind == TaskKind::SingleLabel) {
    const Tensor logits = temper(tape, class_logits(tape, emb, head, nodes), options);
    std::vector<std::uint32_t> y;
    for (auto i : nodes) y.push_back(task.labels[i][0]);
    const Tensor ll = ops::pick(tape, ops::log_softmax_rows(tape, logits), y);
    return finish_loss(tape, ops::scalar_mul(tape, ops::mean(tape, ll), -1.0), options);
  }

  if (task.kind == TaskKind::MultiLabel) {
    const Tensor logits = temper(tape, class_logits(tape, emb, head, nodes), options);
    std::vector<double> targets(nodes.size() * task.num_classes, 0.0);
    for (std::size_t r = 0; r < nodes.size(); ++r)
      for (auto c : task.labels[nodes[r]]) targets[r * task.num_classes + c] = 1.0;
    return finish_loss(tape, ops::bce_with_logits(tape, logits, targets), options);
  }

  if (options.negative_rng == nullptr)
    throw Error(ErrorCode::InvalidArgument, "link ranking loss needs a negative sampler");
  const Tensor& cand_emb = embeddings[type_index(other_type(task.target))];
  const std::size_t n_cand = cand_emb.rows();
  const std::size_t width = 1 + options.negatives;
  std::vector<std::uint32_t> target_idx, cand_idx;
  for (auto a : nodes) {
    const auto& pos = task.labels[a];
    if (pos.size() + options.negatives > n_cand)
      throw Error(ErrorCode::InvalidArgument, "not enough candidates to sample negatives");
    for (auto p : pos) {
      target_idx.insert(target_idx.end(), width, a);
      cand_idx.push_back(p);
      for (std::size_t k = 0; k < options.negatives; ++k) {
        std::uint32_t neg;
        do {
          neg = static_cast<std::uint32_t>(uniform_index(*options.negative_rng, n_cand));
        } while (std::find(pos.begin(), pos.end(), neg) != pos.end());
        cand_idx.push_back(neg);
      }
    }
  }
  const Tensor ta = ops::gather_rows(tape, ops::linear(tape, emb, head.target_map), target_idx);
  const Tensor tc =
      ops::gather_rows(tape, ops::linear(tape, cand_emb, head.candidate_map), cand_idx);
  const std::size_t pairs = target_idx.size() / width;
  const Tensor scores =
      temper(tape, ops::reshape(tape, ops::rowwise_dot(tape, ta, tc), pairs, width), options);
  const std::vector<std::uint32_t> first(pairs, 0);
  const Tensor ll = ops::pick(tape, ops::log_softmax_rows(tape, scores), first);
  return finish_loss(tape, ops::scalar_mul(tape, ops::mean(tape, ll), -1.0), options);
}

std::vector<RankingInstance> ranking_instances(const TypeEmbeddings& embeddings,
                                               const TaskSpec& task, const TaskHead& head,
                                               Split split) {
  const auto nodes = task.nodes(split);
  const Tensor& emb = embeddings[type_index(task.target)];
  std::vector<RankingInstance> out;
  if (task.kind != TaskKind::LinkRanking) {
    const auto logits = matmul(emb, head.weight);
    const std::size_t c = task.num_classes;
    for (auto i : nodes) {
      RankingInstance inst;
      inst.scores.resize(c);
      inst.relevant.assign(c, 0);
      for (std::size_t j = 0; j < c; ++j) inst.scores[j] = logits[i * c + j] + head.bias.data()[j];
      for (auto l : task.labels[i]) inst.relevant[l] = 1;
      out.push_back(std::move(inst));
    }
    return out;
  }
  const std::size_t h = head.target_map.cols();
  const auto ta = matmul(emb, head.target_map);
  const auto tc = matmul(embeddings[type_index(other_type(task.target))], head.candidate_map);
  for (auto a : nodes) {
    RankingInstance inst;
    for (auto p : task.candidates(a)) {
      double s = 0.0;
      for (std::size_t j = 0; j < h; ++j) s += ta[a * h + j] * tc[p * h + j];
      inst.scores.push_back(s);
      const auto& pos = task.labels[a];
      inst.relevant.push_back(std::find(pos.begin(), pos.end(), p) != pos.end());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

TaskMetrics evaluate_task(const TypeEmbeddings& embeddings, const TaskSpec& task,
                          const TaskHead& head, Split split) {
  const auto instances = ranking_instances(embeddings, task, head, split);
  if (instances.empty())
    throw Error(ErrorCode::NoLabeledNodes, "task '" + task.name + "' has no labeled nodes in the " +
                                               std::string(split_name(split)) + " split");
  TaskMetrics m;
  m.count = instances.size();
  std::size_t hits = 0;
  for (const auto& inst : instances) {
    m.ndcg += ndcg(inst);
    m.mrr += mrr(inst);
    hits += inst.relevant[rank_order(inst.scores)[0]] != 0;
  }
  const double n = static_cast<double>(instances.size());
  m.ndcg /= n;
  m.mrr /= n;
  m.acc = static_cast<double>(hits) / n;
  return m;
}

}  // namespace dhan
