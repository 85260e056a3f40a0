#include "dhan/intra_encoder.hpp"

#include "dhan/error.hpp"
#include "dhan/ops.hpp"

namespace dhan {

NodeAggregation attend_and_aggregate(Tape& tape, const Tensor& target_repr,
                                     const Tensor& source_repr, const CsrAdjacency& adj,
                                     const RelationAttention& params, double slope) {
  const std::size_t h = target_repr.cols();
  if (source_repr.cols() != h || params.attention.rows() != 2 * h ||
      target_repr.rows() != adj.num_rows())
    throw Error(ErrorCode::ShapeMismatch, "attend_and_aggregate: inconsistent shapes");

  const Tensor a_target = ops::row_slice(tape, params.attention, 0, h);
  const Tensor a_source = ops::row_slice(tape, params.attention, h, 2 * h);
  const Tensor s = ops::linear(tape, target_repr, a_target);
  const Tensor t = ops::linear(tape, source_repr, a_source);
  const Tensor scores = ops::leaky_relu(tape, ops::edge_pair_sum(tape, s, t, adj), slope);

  NodeAggregation out;
  out.adjacency = &adj;
  out.has_neighbors.resize(adj.num_rows());
  bool all_present = true;
  for (std::size_t i = 0; i < adj.num_rows(); ++i) {
    out.has_neighbors[i] = adj.degree(i) > 0 ? 1 : 0;
    all_present = all_present && out.has_neighbors[i];
  }
  out.attention = ops::segment_softmax(tape, scores, adj.row_offsets, /*allow_empty=*/true);
  const Tensor summed = ops::spmm(tape, out.attention, source_repr, adj);
  Tensor h_rel = ops::leaky_relu(
      tape, ops::layer_norm(tape, summed, params.norm.gain, params.norm.bias), slope);
  if (!all_present) {
    std::vector<double> w(out.has_neighbors.begin(), out.has_neighbors.end());
    h_rel = ops::mul_rows(tape, h_rel, w);
  }
  out.output = h_rel;
  return out;
}

NodeAggregation intra_node_aggregate(Tape& tape, const Tensor& projected, const BMHGraph& graph,
                                     std::uint32_t relation, NodeType type,
                                     const RelationAttention& params, double slope) {
  const auto& spec = graph.relation(relation);
  if (!spec.is_intra() || spec.src_type != type)
    throw Error(ErrorCode::RelationClassMismatch,
                "relation '" + spec.name + "' is not an intra relation of type " +
                    std::string(node_type_name(type)));
  return attend_and_aggregate(tape, projected, projected, graph.attention_adjacency(relation),
                              params, slope);
}

IntraFusion intra_relation_fuse(Tape& tape, const Tensor& projected,
                                std::span<const NodeAggregation> relations,
                                const TypeIntraParams& params, FusionMode mode) {
  if (relations.empty()) throw Error(ErrorCode::NoRelations, "relation-level fusion needs input");
  const std::size_t n = projected.rows(), h = projected.cols(), kk = relations.size();
  std::vector<Tensor> parts;
  parts.reserve(kk);
  for (const auto& r : relations) parts.push_back(r.output);

  std::vector<std::uint8_t> mask(n * kk, 1);
  bool masked = false;
  for (std::size_t r = 0; r < kk; ++r)
    for (std::size_t i = 0; i < n; ++i)
      if (!relations[r].has_neighbors.empty() && !relations[r].has_neighbors[i]) {
        mask[i * kk + r] = 0;
        masked = true;
      }

  IntraFusion out;
  if (mode == FusionMode::Mean) {
    std::vector<double> c(n * kk, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double cnt = 0;
      for (std::size_t r = 0; r < kk; ++r) cnt += mask[i * kk + r];
      for (std::size_t r = 0; r < kk; ++r)
        if (mask[i * kk + r]) c[i * kk + r] = 1.0 / cnt;
    }
    out.coefficients = Tensor::from(n, kk, std::move(c));
    out.output = ops::weighted_sum_rows(tape, out.coefficients, parts);
    return out;
  }

  // g_i^k = q^T [h'_i || h_i^k]
  const Tensor q_self = ops::row_slice(tape, params.local_query, 0, h);
  const Tensor q_rel = ops::row_slice(tape, params.local_query, h, 2 * h);
  const Tensor g_self = ops::linear(tape, projected, q_self);
  std::vector<Tensor> cols;
  cols.reserve(kk);
  for (const auto& p : parts) cols.push_back(ops::add(tape, g_self, ops::linear(tape, p, q_rel)));
  const Tensor g = ops::concat_cols(tape, cols);
  out.local_weights =
      masked ? ops::masked_softmax_rows(tape, g, mask) : ops::softmax_rows(tape, g);

  if (mode == FusionMode::LocalOnly) {
    out.coefficients = out.local_weights;
  } else {
    if (params.global_logits.cols() != kk)
      throw Error(ErrorCode::ConfigShapeMismatch, "global logits do not match relation count");
    out.global_weights = ops::softmax_rows(tape, params.global_logits);
    out.smooth = ops::sigmoid(tape, params.smooth_logit);
    const Tensor one_minus_t = ops::add_scalar(tape, ops::scalar_mul(tape, out.smooth, -1.0), 1.0);
    out.coefficients = ops::add_row_broadcast(tape, ops::scale_by(tape, out.local_weights, one_minus_t),
                                              ops::scale_by(tape, out.global_weights, out.smooth));
  }
  out.output = ops::weighted_sum_rows(tape, out.coefficients, parts);
  return out;
}

IntraStage run_intra_stage(Tape& tape, const BMHGraph& graph, NodeType target,
                           const std::array<Tensor, kNumNodeTypes>& repr,
                           std::span<const RelationSlot> slots, const TypeIntraParams& params,
                           FusionMode mode, double slope) {
  if (slots.size() != params.relations.size())
    throw Error(ErrorCode::ConfigShapeMismatch, "intra parameters do not match relation slots");
  IntraStage stage;
  const Tensor& self = repr[type_index(target)];
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const auto& slot = slots[k];
    stage.relations.push_back(attend_and_aggregate(tape, self, repr[type_index(slot.source)],
                                                   slot.adjacency(graph), params.relations[k],
                                                   slope));
  }
  stage.fusion = intra_relation_fuse(tape, self, stage.relations, params, mode);
  stage.output = stage.fusion.output;
  return stage;
}

}  // namespace dhan
