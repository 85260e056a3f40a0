#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dhan/checkpoint.hpp"
#include "dhan/graph.hpp"
#include "dhan/metrics.hpp"
#include "dhan/rng.hpp"
#include "dhan/tensor.hpp"

namespace dhan {

enum class TaskKind { SingleLabel, MultiLabel, LinkRanking };
enum class Split : std::uint8_t { None = 0, Train, Val, Test };

std::string_view task_kind_name(TaskKind k);  // single | multi | link
TaskKind parse_task_kind(std::string_view text);
std::string_view split_name(Split s);  // none | train | val | test
Split parse_split(std::string_view text);

struct TaskSpec {
  std::string name;
  TaskKind kind = TaskKind::SingleLabel;
  NodeType target = NodeType::B;
  // Classification only. LinkRanking candidates are nodes of the other type.
  std::size_t num_classes = 0;
  // Per target node: class ids, or linked node ids of the other type. An
  // empty list means the node is unlabeled.
  std::vector<std::vector<std::uint32_t>> labels;
  std::vector<Split> split;  // per target node
  // LinkRanking only: name-group per target node (-1 for none). A node's
  // candidates are the linked nodes of every member of its group.
  std::vector<std::int64_t> group;

  std::vector<std::uint32_t> nodes(Split s) const;
  std::vector<std::uint32_t> candidates(std::uint32_t node) const;
  // Throws InvalidArgument / NodeOutOfRange on inconsistent content.
  void validate(const BMHGraph& graph) const;
};

struct TaskHead {
  Tensor weight;         // classification: h x C
  Tensor bias;           // classification: 1 x C
  Tensor target_map;     // link: h x h applied to target embeddings
  Tensor candidate_map;  // link: h x h applied to candidate embeddings
};

TaskHead init_head(const TaskSpec& task, std::size_t hidden, Rng& rng);
std::vector<NamedTensor> named_head(const TaskSpec& task, const TaskHead& head);

struct LossOptions {
  double temperature = 1.0;
  bool literal_temperature = false;
  std::size_t negatives = 4;
  Rng* negative_rng = nullptr;  // LinkRanking only
};

using TypeEmbeddings = std::array<Tensor, kNumNodeTypes>;

// Mean tempered cross-entropy over the labeled nodes of `split`.
Tensor task_loss(Tape& tape, const TypeEmbeddings& embeddings, const TaskSpec& task,
                 const TaskHead& head, Split split, const LossOptions& options);

// Scores used for ranking: class logits, or mapped dot products over the
// node's candidate list.
std::vector<RankingInstance> ranking_instances(const TypeEmbeddings& embeddings,
                                               const TaskSpec& task, const TaskHead& head,
                                               Split split);

struct TaskMetrics {
  double ndcg = 0.0;
  double mrr = 0.0;
  double acc = 0.0;
  std::size_t count = 0;
};

TaskMetrics evaluate_task(const TypeEmbeddings& embeddings, const TaskSpec& task,
                          const TaskHead& head, Split split);

}  // namespace dhan
