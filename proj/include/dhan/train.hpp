#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dhan/config.hpp"
#include "dhan/dataset.hpp"
#include "dhan/model.hpp"
#include "dhan/tasks.hpp"

namespace dhan {

// Encoder plus one head per optimized task.
struct Model {
  DhanEncoder encoder;
  std::vector<std::size_t> task_index;  // into Dataset::tasks
  std::vector<TaskHead> heads;          // aligned with task_index

  std::vector<NamedTensor> named(const Dataset& dataset) const;
};

// Tasks named in config.tasks (all tasks when empty), validated to have
// nonempty train and validation splits.
std::vector<std::size_t> selected_tasks(const Dataset& dataset, const ModelConfig& config);

// Fresh parameters from the init stream of config.seed.
Model build_model(const Dataset& dataset, const ModelConfig& config);

// Eval-mode embeddings.
TypeEmbeddings embed(const Model& model, const BMHGraph& graph);

struct TrainLogEntry {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_ndcg = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

std::string log_line(const TrainLogEntry& entry);

struct TrainResult {
  Model model;  // parameters of the selected epoch
  std::vector<TrainLogEntry> log;
  std::size_t best_epoch = 0;
  double best_val_ndcg = 0.0;
  double best_val_loss = 0.0;
};

struct TrainOptions {
  std::function<void(const TrainLogEntry&)> on_epoch;
};

// Full-batch AdamW with cosine learning rate. After every epoch the
// validation NDCG (mean over tasks) and loss are measured; an epoch replaces
// the kept parameters when its NDCG is higher, or equal with a loss no larger.
TrainResult train(const Dataset& dataset, const ModelConfig& config,
                  const TrainOptions& options = {});

struct SplitReport {
  std::vector<std::pair<std::string, TaskMetrics>> tasks;
  double mean_ndcg = 0.0;
};

SplitReport evaluate(const Model& model, const Dataset& dataset, const TypeEmbeddings& embeddings,
                     Split split);

}  // namespace dhan
