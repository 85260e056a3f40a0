#include "dhan/inter_encoder.hpp"

#include "dhan/error.hpp"
#include "dhan/ops.hpp"

namespace dhan {

NodeAggregation inter_node_aggregate(Tape& tape, const std::array<Tensor, kNumNodeTypes>& z,
                                     const BMHGraph& graph, std::uint32_t relation,
                                     InterDirection direction,
                                     const std::array<Tensor, kNumNodeTypes>& common_map,
                                     const RelationAttention& params, double slope) {
  const auto& spec = graph.relation(relation);
  if (spec.is_intra())
    throw Error(ErrorCode::RelationClassMismatch,
                "relation '" + spec.name + "' is not an inter relation");
  NodeType target;
  switch (direction) {
    case InterDirection::Forward: target = spec.src_type; break;
    case InterDirection::Reverse: target = spec.dst_type; break;
    default: throw Error(ErrorCode::DirectionInvalid, "unknown inter direction");
  }
  const NodeType source = other_type(target);
  if (z[type_index(target)].rows() != graph.num_nodes(target) ||
      z[type_index(source)].rows() != graph.num_nodes(source))
    throw Error(ErrorCode::DirectionInvalid,
                "representations do not match the node counts of the requested direction");
  const Tensor mt = ops::linear(tape, z[type_index(target)], common_map[type_index(target)]);
  const Tensor ms = ops::linear(tape, z[type_index(source)], common_map[type_index(source)]);
  return attend_and_aggregate(tape, mt, ms, graph.inter_view(relation, target), params, slope);
}

InterFusion inter_relation_fuse(Tape& tape, const Tensor& z_target,
                                std::span<const NodeAggregation> relations,
                                const Tensor& fuse_query, FusionMode mode) {
  const std::size_t n = z_target.rows(), h = z_target.cols(), mm = relations.size();
  InterFusion out;
  if (mm == 0) {
    out.output = Tensor::zeros(n, h);
    return out;
  }
  std::vector<Tensor> parts;
  for (const auto& r : relations) parts.push_back(r.output);
  out.mask.assign(n * mm, 0);
  for (std::size_t m = 0; m < mm; ++m)
    for (std::size_t i = 0; i < n; ++i) out.mask[i * mm + m] = relations[m].has_neighbors[i];

  if (mode == FusionMode::Mean) {
    std::vector<double> c(n * mm, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double cnt = 0;
      for (std::size_t m = 0; m < mm; ++m) cnt += out.mask[i * mm + m];
      for (std::size_t m = 0; m < mm; ++m)
        if (out.mask[i * mm + m]) c[i * mm + m] = 1.0 / cnt;
    }
    out.weights = Tensor::from(n, mm, std::move(c));
  } else {
    // f_i^m = q~^T [z_i || z_i^m]
    const Tensor q_self = ops::row_slice(tape, fuse_query, 0, h);
    const Tensor q_rel = ops::row_slice(tape, fuse_query, h, 2 * h);
    const Tensor f_self = ops::linear(tape, z_target, q_self);
    std::vector<Tensor> cols;
    for (const auto& p : parts) cols.push_back(ops::add(tape, f_self, ops::linear(tape, p, q_rel)));
    out.weights = ops::masked_softmax_rows(tape, ops::concat_cols(tape, cols), out.mask);
  }
  out.output = ops::weighted_sum_rows(tape, out.weights, parts);
  return out;
}

Tensor weighted_residual(Tape& tape, const Tensor& x_new, const Tensor& x_old, double lambda,
                         const NormParams& norm, double slope) {
  if (!(lambda >= 0.0 && lambda <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "residual weight must lie in [0, 1]");
  if (x_new.rows() != x_old.rows() || x_new.cols() != x_old.cols())
    throw Error(ErrorCode::ShapeMismatch, "weighted_residual: operand shapes differ");
  const Tensor gated = ops::scalar_mul(tape, ops::leaky_relu(tape, x_new, slope), lambda);
  const Tensor mixed = ops::add(tape, gated, ops::scalar_mul(tape, x_old, 1.0 - lambda));
  return ops::layer_norm(tape, mixed, norm.gain, norm.bias);
}

InterStage run_inter_stage(Tape& tape, const BMHGraph& graph, NodeType target,
                           const std::array<Tensor, kNumNodeTypes>& z,
                           const std::array<Tensor, kNumNodeTypes>& mapped,
                           std::span<const RelationSlot> slots, const TypeInterParams& params,
                           FusionMode mode, double slope) {
  if (slots.size() != params.relations.size())
    throw Error(ErrorCode::ConfigShapeMismatch, "inter parameters do not match relation slots");
  InterStage stage;
  for (std::size_t m = 0; m < slots.size(); ++m) {
    const auto& slot = slots[m];
    stage.relations.push_back(attend_and_aggregate(tape, mapped[type_index(target)],
                                                   mapped[type_index(slot.source)],
                                                   slot.adjacency(graph), params.relations[m],
                                                   slope));
  }
  stage.fusion = inter_relation_fuse(tape, z[type_index(target)], stage.relations,
                                     params.fuse_query, mode);
  stage.output = stage.fusion.output;
  return stage;
}

}  // namespace dhan
