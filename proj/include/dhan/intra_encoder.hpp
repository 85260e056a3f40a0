#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dhan/graph.hpp"
#include "dhan/params.hpp"
#include "dhan/tensor.hpp"

namespace dhan {

// Result of node-level attention under one relation.
struct NodeAggregation {
  Tensor output;     // n_target x h; zero rows for targets without neighbors
  Tensor attention;  // one normalized weight per stored edge of the adjacency
  std::vector<std::uint8_t> has_neighbors;  // per target node
  const CsrAdjacency* adjacency = nullptr;
};

// Scores every edge (i, j) with leaky(a^T [target_i || source_j]), normalizes
// per target with a segment softmax, sums the weighted source rows and
// applies leaky(norm(.)). Targets with no neighbors get a zero row.
NodeAggregation attend_and_aggregate(Tape& tape, const Tensor& target_repr,
                                     const Tensor& source_repr, const CsrAdjacency& adj,
                                     const RelationAttention& params, double slope);

// Intra-class node-level aggregation of type `type` under intra relation
// `relation` (self-loops included), on projected representations H'.
NodeAggregation intra_node_aggregate(Tape& tape, const Tensor& projected, const BMHGraph& graph,
                                     std::uint32_t relation, NodeType type,
                                     const RelationAttention& params, double slope);

enum class FusionMode {
  GlobalLocal,  // t * beta_G + (1 - t) * beta_i
  LocalOnly,    // t fixed at 0
  Mean,         // unweighted mean over relations
};

struct IntraFusion {
  Tensor output;          // z, n x h
  Tensor local_weights;   // beta_i, n x K (undefined under Mean)
  Tensor global_weights;  // beta_G, 1 x K (GlobalLocal only)
  Tensor smooth;          // t, 1 x 1 (GlobalLocal only)
  Tensor coefficients;    // final per-node mixing weights, n x K
};

// Relation-level global-local fusion. `has_neighbors` (optional, one mask per
// relation) removes relations without neighbors from a node's local softmax.
IntraFusion intra_relation_fuse(Tape& tape, const Tensor& projected,
                                std::span<const NodeAggregation> relations,
                                const TypeIntraParams& params, FusionMode mode);

struct IntraStage {
  Tensor output;
  std::vector<NodeAggregation> relations;
  IntraFusion fusion;
};

// Node-level attention for every slot, then relation-level fusion. `repr`
// holds the current representation of both types; slots whose source type
// differs from the target (NoDual) read the other type's rows.
IntraStage run_intra_stage(Tape& tape, const BMHGraph& graph, NodeType target,
                           const std::array<Tensor, kNumNodeTypes>& repr,
                           std::span<const RelationSlot> slots, const TypeIntraParams& params,
                           FusionMode mode, double slope);

}  // namespace dhan
