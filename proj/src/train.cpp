#include "dhan/train.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "dhan/error.hpp"
#include "dhan/ops.hpp"
#include "dhan/optim.hpp"

namespace dhan {

std::vector<NamedTensor> Model::named(const Dataset& dataset) const {
  auto out = encoder.params().named();
  for (std::size_t k = 0; k < heads.size(); ++k) {
    auto h = named_head(dataset.tasks[task_index[k]], heads[k]);
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

std::vector<std::size_t> selected_tasks(const Dataset& dataset, const ModelConfig& config) {
  std::vector<std::size_t> out;
  if (config.tasks.empty()) {
    for (std::size_t i = 0; i < dataset.tasks.size(); ++i) out.push_back(i);
  } else {
    for (const auto& name : config.tasks) {
      const TaskSpec& t = dataset.task(name);
      out.push_back(static_cast<std::size_t>(&t - dataset.tasks.data()));
    }
  }
  if (out.empty()) throw Error(ErrorCode::NoLabeledNodes, "no tasks to optimize");
  for (auto i : out) {
    const TaskSpec& t = dataset.tasks[i];
    if (t.nodes(Split::Train).empty() || t.nodes(Split::Val).empty())
      throw Error(ErrorCode::NoLabeledNodes,
                  "task '" + t.name + "' needs nonempty train and validation splits");
  }
  return out;
}

Model build_model(const Dataset& dataset, const ModelConfig& config) {
  Rng rng(derive_seed(config.seed, seed_stream::kInit));
  Model m{DhanEncoder(config, dataset.graph, rng), selected_tasks(dataset, config), {}};
  for (auto i : m.task_index)
    m.heads.push_back(init_head(dataset.tasks[i], config.hidden_dim, rng));
  return m;
}

TypeEmbeddings embed(const Model& model, const BMHGraph& graph) {
  Tape tape;
  auto res = model.encoder.forward(tape, graph, ForwardOptions{});
  TypeEmbeddings out;
  for (std::size_t t = 0; t < kNumNodeTypes; ++t) out[t] = res.embeddings[t].clone();
  return out;
}

std::string log_line(const TrainLogEntry& e) {
  nlohmann::ordered_json j;
  j["epoch"] = e.epoch;
  j["train_loss"] = e.train_loss;
  j["val_ndcg"] = e.val_ndcg;
  j["val_loss"] = e.val_loss;
  j["lr"] = e.lr;
  return j.dump();
}

SplitReport evaluate(const Model& model, const Dataset& dataset, const TypeEmbeddings& embeddings,
                     Split split) {
  SplitReport r;
  for (std::size_t k = 0; k < model.heads.size(); ++k) {
    const TaskSpec& t = dataset.tasks[model.task_index[k]];
    r.tasks.emplace_back(t.name, evaluate_task(embeddings, t, model.heads[k], split));
    r.mean_ndcg += r.tasks.back().second.ndcg;
  }
  r.mean_ndcg /= static_cast<double>(r.tasks.size());
  return r;
}

namespace {

LossOptions loss_options(const ModelConfig& c, Rng* rng) {
  return {c.temperature, c.literal_temperature, c.link_negatives, rng};
}

Tensor total_loss(Tape& tape, const Model& model, const Dataset& dataset,
                  const TypeEmbeddings& emb, Split split, const ModelConfig& c, Rng& rng) {
  Tensor total;
  for (std::size_t k = 0; k < model.heads.size(); ++k) {
    const Tensor l = task_loss(tape, emb, dataset.tasks[model.task_index[k]], model.heads[k],
                               split, loss_options(c, &rng));
    total = total.defined() ? ops::add(tape, total, l) : l;
  }
  return ops::scalar_mul(tape, total, 1.0 / static_cast<double>(model.heads.size()));
}

std::vector<Tensor> snapshot(const std::vector<NamedTensor>& params) {
  std::vector<Tensor> out;
  for (const auto& p : params) out.push_back(p.tensor.clone());
  return out;
}

}  // namespace

TrainResult train(const Dataset& dataset, const ModelConfig& config,
                  const TrainOptions& options) {
  TrainResult result{build_model(dataset, config), {}, 0, 0.0, 0.0};
  Model& model = result.model;
  const ModelConfig& c = model.encoder.config();
  const auto named = model.named(dataset);
  std::vector<Tensor> params;
  for (const auto& p : named) params.push_back(p.tensor);

  OptimizerState opt;
  opt.weight_decay = c.weight_decay;
  Rng dropout_rng(derive_seed(c.seed, seed_stream::kDropout));
  const std::uint64_t neg_seed = derive_seed(c.seed, seed_stream::kNegatives);

  double best_ndcg = -std::numeric_limits<double>::infinity();
  double best_loss = std::numeric_limits<double>::infinity();
  std::vector<Tensor> best = snapshot(named);

  for (std::size_t epoch = 0; epoch < c.epochs; ++epoch) {
    TrainLogEntry entry;
    entry.epoch = epoch + 1;
    entry.lr = cosine_lr(epoch, c.epochs, c.lr_max, c.lr_min);
    {
      Tape tape;
      ForwardOptions fo;
      fo.training = true;
      fo.dropout_rng = &dropout_rng;
      const auto fwd = model.encoder.forward(tape, dataset.graph, fo);
      Rng neg_rng(derive_seed(neg_seed, epoch));
      const Tensor loss =
          total_loss(tape, model, dataset, fwd.embeddings, Split::Train, c, neg_rng);
      entry.train_loss = loss.item();
      if (!std::isfinite(entry.train_loss))
        throw Error(ErrorCode::DivergedLoss,
                    "non-finite training loss at epoch " + std::to_string(entry.epoch));
      for (auto& p : params) p.zero_grad();
      tape.backward(loss);
      opt.lr = entry.lr;
      adamw_step(opt, params);
    }
    {
      Tape tape;
      const auto fwd = model.encoder.forward(tape, dataset.graph, ForwardOptions{});
      Rng neg_rng(derive_seed(neg_seed, std::numeric_limits<std::uint64_t>::max()));
      entry.val_loss =
          total_loss(tape, model, dataset, fwd.embeddings, Split::Val, c, neg_rng).item();
      entry.val_ndcg = evaluate(model, dataset, fwd.embeddings, Split::Val).mean_ndcg;
      if (!std::isfinite(entry.val_loss))
        throw Error(ErrorCode::DivergedLoss,
                    "non-finite validation loss at epoch " + std::to_string(entry.epoch));
    }
    if (entry.val_ndcg > best_ndcg || (entry.val_ndcg == best_ndcg && entry.val_loss <= best_loss)) {
      best_ndcg = entry.val_ndcg;
      best_loss = entry.val_loss;
      result.best_epoch = entry.epoch;
      best = snapshot(named);
    }
    result.log.push_back(entry);
    if (options.on_epoch) options.on_epoch(entry);
  }

  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto src = best[i].data();
    std::copy(src.begin(), src.end(), params[i].mutable_data().begin());
  }
  result.best_val_ndcg = best_ndcg;
  result.best_val_loss = best_loss;
  return result;
}

}  // namespace dhan
