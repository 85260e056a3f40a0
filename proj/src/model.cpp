#include "dhan/model.hpp"

#include "dhan/error.hpp"
#include "dhan/ops.hpp"

namespace dhan {

FusionMode fusion_mode(Variant v) {
  switch (v) {
    case Variant::NoGlobal: return FusionMode::LocalOnly;
    case Variant::NoHierarchy: return FusionMode::Mean;
    default: return FusionMode::GlobalLocal;
  }
}

DhanEncoder::DhanEncoder(ModelConfig config, const BMHGraph& graph, Rng& init_rng)
    : config_(std::move(config)) {
  if (config_.input_dim == 0) config_.input_dim = graph.feature_dim();
  config_.validate();
  params_ = init_encoder_params(config_, graph, init_rng);
}

DhanEncoder::DhanEncoder(ModelConfig config, EncoderParams params)
    : config_(std::move(config)), params_(std::move(params)) {
  config_.validate();
}

void DhanEncoder::check_graph(const BMHGraph& graph) const {
  if (graph.feature_dim() != config_.input_dim)
    throw Error(ErrorCode::ConfigShapeMismatch,
                "graph feature width " + std::to_string(graph.feature_dim()) +
                    " differs from configured input_dim " + std::to_string(config_.input_dim));
  if (params_.layers.size() != config_.layers)
    throw Error(ErrorCode::ConfigShapeMismatch, "parameter stack depth differs from config");
  for (const auto& layer : params_.layers)
    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
      const NodeType t = NodeType(ti);
      if (layer.intra[ti].relations.size() != intra_slots(graph, t, config_.variant).size() ||
          layer.inter[ti].relations.size() != inter_slots(graph, t, config_.variant).size())
        throw Error(ErrorCode::ConfigShapeMismatch,
                    "parameters were built for a different relation schema");
    }
}

namespace {

using TypeArray = std::array<Tensor, kNumNodeTypes>;

struct LayerContext {
  Tape& tape;
  const BMHGraph& graph;
  const ModelConfig& config;
  const ForwardOptions& options;
  std::size_t layer;
  ForwardResult& result;
};

void record_relations(LayerContext& ctx, const std::string& stage, NodeType target,
                      std::span<const RelationSlot> slots,
                      std::span<const NodeAggregation> aggs) {
  for (std::size_t k = 0; k < slots.size(); ++k) {
    AttentionRecord rec;
    rec.layer = ctx.layer;
    rec.stage = stage;
    rec.target = target;
    rec.relation = slots[k].name;
    rec.reverse = slots[k].reverse;
    rec.adjacency = aggs[k].adjacency;
    rec.alpha.assign(aggs[k].attention.data().begin(), aggs[k].attention.data().end());
    ctx.result.attention.push_back(std::move(rec));
  }
}

TypeArray intra_stage(LayerContext& ctx, const LayerParams& lp, const TypeArray& input) {
  TypeArray out;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const NodeType t = NodeType(ti);
    const auto slots = intra_slots(ctx.graph, t, ctx.config.variant);
    auto stage = run_intra_stage(ctx.tape, ctx.graph, t, input, slots, lp.intra[ti],
                                 fusion_mode(ctx.config.variant), ctx.config.slope);
    out[ti] = weighted_residual(ctx.tape, stage.output, input[ti], ctx.config.lambda_intra,
                                lp.intra_residual_norm[ti], ctx.config.slope);
    if (ctx.options.record) {
      record_relations(ctx, "intra", t, slots, stage.relations);
      FusionRecord fr;
      fr.layer = ctx.layer;
      fr.stage = "intra";
      fr.target = t;
      for (const auto& s : slots) fr.relations.push_back(s.name);
      if (stage.fusion.global_weights.defined()) {
        const auto g = stage.fusion.global_weights.data();
        fr.global_weights.assign(g.begin(), g.end());
        fr.smooth = stage.fusion.smooth.item();
      }
      if (stage.fusion.local_weights.defined())
        fr.local_weights = stage.fusion.local_weights.to_matrix();
      fr.coefficients = stage.fusion.coefficients.to_matrix();
      ctx.result.fusion.push_back(std::move(fr));
    }
  }
  return out;
}

TypeArray inter_stage(LayerContext& ctx, const LayerParams& lp, const TypeArray& input) {
  TypeArray mapped;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti)
    mapped[ti] = lp.inter[ti].common_map.defined()
                     ? ops::linear(ctx.tape, input[ti], lp.inter[ti].common_map)
                     : input[ti];
  TypeArray out;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
    const NodeType t = NodeType(ti);
    const auto slots = inter_slots(ctx.graph, t, ctx.config.variant);
    auto stage = run_inter_stage(ctx.tape, ctx.graph, t, input, mapped, slots, lp.inter[ti],
                                 fusion_mode(ctx.config.variant), ctx.config.slope);
    out[ti] = weighted_residual(ctx.tape, stage.output, input[ti], ctx.config.lambda_inter,
                                lp.inter_residual_norm[ti], ctx.config.slope);
    if (ctx.options.record) {
      record_relations(ctx, "inter", t, slots, stage.relations);
      FusionRecord fr;
      fr.layer = ctx.layer;
      fr.stage = "inter";
      fr.target = t;
      for (const auto& s : slots) fr.relations.push_back(s.name);
      if (stage.fusion.weights.defined()) {
        fr.local_weights = stage.fusion.weights.to_matrix();
        fr.coefficients = fr.local_weights;
      }
      ctx.result.fusion.push_back(std::move(fr));
    }
  }
  return out;
}

}  // namespace

ForwardResult DhanEncoder::forward(Tape& tape, const BMHGraph& graph,
                                   const ForwardOptions& options) const {
  check_graph(graph);
  if (options.training && config_.dropout > 0.0 && options.dropout_rng == nullptr)
    throw Error(ErrorCode::InvalidArgument, "training forward with dropout needs an rng");
  Rng unused_rng(0);
  Rng& drop_rng = options.dropout_rng ? *options.dropout_rng : unused_rng;

  ForwardResult result;
  TypeArray x;
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti)
    x[ti] = Tensor::from(graph.features(NodeType(ti)));

  if (params_.layers.empty()) {
    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
      const Tensor xd = ops::dropout(tape, x[ti], config_.dropout, drop_rng, options.training);
      result.embeddings[ti] = ops::linear(tape, xd, params_.input_projection[ti]);
    }
    return result;
  }

  const bool dual = config_.variant != Variant::NoDual;
  for (std::size_t l = 0; l < params_.layers.size(); ++l) {
    const LayerParams& lp = params_.layers[l];
    LayerContext ctx{tape, graph, config_, options, l, result};
    TypeArray projected;
    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
      const Tensor xd = ops::dropout(tape, x[ti], config_.dropout, drop_rng, options.training);
      projected[ti] = ops::linear(tape, xd, lp.projection[ti]);
    }

    TypeArray out;
    if (!dual) {
      out = intra_stage(ctx, lp, projected);
    } else if (config_.ordering == Ordering::IntraThenInter) {
      const TypeArray z = intra_stage(ctx, lp, projected);
      out = inter_stage(ctx, lp, z);
      if (config_.pf_l1_extra_residual)
        for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti)
          out[ti] = weighted_residual(tape, out[ti], projected[ti], config_.lambda_inter,
                                      lp.inter_residual_norm[ti], config_.slope);
    } else if (config_.ordering == Ordering::Inverted) {
      const TypeArray u = inter_stage(ctx, lp, projected);
      out = intra_stage(ctx, lp, u);
    } else {
      const TypeArray z = intra_stage(ctx, lp, projected);
      const TypeArray u = inter_stage(ctx, lp, projected);
      for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
        const std::array<Tensor, 2> both{z[ti], u[ti]};
        out[ti] = ops::linear(tape, ops::concat_cols(tape, both), lp.merge[ti]);
      }
    }
    x = out;
  }
  result.embeddings = x;
  return result;
}

}  // namespace dhan
