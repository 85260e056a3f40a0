#pragma once

#include <array>
#include <string>
#include <vector>

#include "dhan/checkpoint.hpp"
#include "dhan/config.hpp"
#include "dhan/graph.hpp"
#include "dhan/rng.hpp"
#include "dhan/tensor.hpp"

namespace dhan {

struct NormParams {
  Tensor gain;  // 1 x h
  Tensor bias;  // 1 x h
};

// Node-level attention vector and the relation-specific norm applied to the
// aggregated neighborhood.
struct RelationAttention {
  Tensor attention;  // 2h x 1
  NormParams norm;
};

// One relation as seen from a target node type: which adjacency to use and
// where the neighbor representations come from.
struct RelationSlot {
  std::uint32_t relation = 0;
  NodeType target = NodeType::A;
  NodeType source = NodeType::A;
  std::string name;
  bool reverse = false;  // inter relation traversed dst -> src

  bool is_intra() const { return target == source; }
  const CsrAdjacency& adjacency(const BMHGraph& graph) const;
};

// Relations feeding the intra-class (first) and inter-class (second) stage of
// a target type. Under NoDual every relation is in the first list.
std::vector<RelationSlot> intra_slots(const BMHGraph& graph, NodeType target, Variant variant);
std::vector<RelationSlot> inter_slots(const BMHGraph& graph, NodeType target, Variant variant);

struct TypeIntraParams {
  std::vector<RelationAttention> relations;  // aligned with intra_slots()
  Tensor local_query;                        // q, 2h x 1
  Tensor global_logits;                      // b_G, 1 x K; beta_G = softmax(b_G)
  Tensor smooth_logit;                       // tau, 1 x 1; t = sigmoid(tau)
};

struct TypeInterParams {
  Tensor common_map;                         // W^(type), h x h
  std::vector<RelationAttention> relations;  // aligned with inter_slots()
  Tensor fuse_query;                         // q~, 2h x 1
};

struct LayerParams {
  std::array<Tensor, kNumNodeTypes> projection;  // W^(a), d_in x h
  std::array<TypeIntraParams, kNumNodeTypes> intra;
  std::array<TypeInterParams, kNumNodeTypes> inter;
  std::array<NormParams, kNumNodeTypes> intra_residual_norm;
  std::array<NormParams, kNumNodeTypes> inter_residual_norm;
  std::array<Tensor, kNumNodeTypes> merge;  // Parallel ordering only, 2h x h
};

struct EncoderParams {
  std::vector<LayerParams> layers;
  // Only used when the stack has no layers.
  std::array<Tensor, kNumNodeTypes> input_projection;

  // Every tensor with a stable name, in serialization order.
  std::vector<NamedTensor> named() const;
};

Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng);
Tensor uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng);
NormParams identity_norm(std::size_t h);

EncoderParams init_encoder_params(const ModelConfig& config, const BMHGraph& graph, Rng& rng);

}  // namespace dhan
