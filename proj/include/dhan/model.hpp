#pragma once

#include <array>
#include <string>
#include <vector>

#include "dhan/config.hpp"
#include "dhan/graph.hpp"
#include "dhan/inter_encoder.hpp"
#include "dhan/intra_encoder.hpp"
#include "dhan/params.hpp"

namespace dhan {

// Node-level attention weights of one relation slot in one layer.
struct AttentionRecord {
  std::size_t layer = 0;
  std::string stage;  // "intra" | "inter"
  NodeType target = NodeType::A;
  std::string relation;
  bool reverse = false;
  const CsrAdjacency* adjacency = nullptr;
  std::vector<double> alpha;  // aligned with adjacency edges
};

// Relation-level weights of one stage for one target type.
struct FusionRecord {
  std::size_t layer = 0;
  std::string stage;
  NodeType target = NodeType::A;
  std::vector<std::string> relations;
  std::vector<double> global_weights;  // beta_G; empty unless global-local fusion
  double smooth = -1.0;                // t; negative when not used
  Matrix local_weights;                // beta_i (intra) or epsilon (inter)
  Matrix coefficients;                 // final mixing weights per node
};

struct ForwardResult {
  std::array<Tensor, kNumNodeTypes> embeddings;
  std::vector<AttentionRecord> attention;
  std::vector<FusionRecord> fusion;
};

struct ForwardOptions {
  bool training = false;
  Rng* dropout_rng = nullptr;  // required when training with dropout > 0
  bool record = false;         // collect attention and fusion records
};

FusionMode fusion_mode(Variant v);

// The stacked dual hierarchical encoder: per layer a type-specific
// projection, then the intra-class and inter-class stages in the configured
// ordering, each closed by a weighted residual.
class DhanEncoder {
 public:
  DhanEncoder(ModelConfig config, const BMHGraph& graph, Rng& init_rng);
  DhanEncoder(ModelConfig config, EncoderParams params);

  ForwardResult forward(Tape& tape, const BMHGraph& graph, const ForwardOptions& options) const;

  const ModelConfig& config() const { return config_; }
  EncoderParams& params() { return params_; }
  const EncoderParams& params() const { return params_; }

 private:
  void check_graph(const BMHGraph& graph) const;

  ModelConfig config_;
  EncoderParams params_;
};

}  // namespace dhan
