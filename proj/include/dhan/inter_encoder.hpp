#pragma once

#include <array>
#include <span>
#include <vector>

#include "dhan/intra_encoder.hpp"

namespace dhan {

// Which endpoint type of an inter relation receives messages.
enum class InterDirection : std::uint8_t {
  Forward = 0,  // target = relation source type (e.g. author <- papers)
  Reverse = 1,  // target = relation destination type
};

// Node-level inter-class attention. `z` holds the intra-stage output of both
// types and `common_map` the two type-specific maps W^(1), W^(2); scores use
// [W^(target) z_i || W^(source) z_j] and the aggregate sums W^(source) z_j.
NodeAggregation inter_node_aggregate(Tape& tape, const std::array<Tensor, kNumNodeTypes>& z,
                                     const BMHGraph& graph, std::uint32_t relation,
                                     InterDirection direction,
                                     const std::array<Tensor, kNumNodeTypes>& common_map,
                                     const RelationAttention& params, double slope);

struct InterFusion {
  Tensor output;   // u, n x h; zero rows for nodes with no inter neighbors
  Tensor weights;  // epsilon, n x M; zero where the relation has no neighbors
  std::vector<std::uint8_t> mask;  // n x M participation
};

// Relation-level inter fusion; relations without neighbors for a node are
// left out of that node's softmax (Mean averages the participating ones).
InterFusion inter_relation_fuse(Tape& tape, const Tensor& z_target,
                                std::span<const NodeAggregation> relations,
                                const Tensor& fuse_query, FusionMode mode);

// Norm(lambda * leaky(x_new) + (1 - lambda) * x_old)
Tensor weighted_residual(Tape& tape, const Tensor& x_new, const Tensor& x_old, double lambda,
                         const NormParams& norm, double slope);

struct InterStage {
  Tensor output;
  std::vector<NodeAggregation> relations;
  InterFusion fusion;
};

// Maps both types once, then attention per slot and fusion for `target`.
InterStage run_inter_stage(Tape& tape, const BMHGraph& graph, NodeType target,
                           const std::array<Tensor, kNumNodeTypes>& z,
                           const std::array<Tensor, kNumNodeTypes>& mapped,
                           std::span<const RelationSlot> slots, const TypeInterParams& params,
                           FusionMode mode, double slope);

}  // namespace dhan
