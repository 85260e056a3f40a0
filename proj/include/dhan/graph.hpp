#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dhan/matrix.hpp"

namespace dhan {

enum class NodeType : std::uint8_t { A = 0, B = 1 };

inline constexpr std::size_t kNumNodeTypes = 2;

inline constexpr std::size_t type_index(NodeType t) { return static_cast<std::size_t>(t); }
inline constexpr NodeType other_type(NodeType t) {
  return t == NodeType::A ? NodeType::B : NodeType::A;
}
std::string_view node_type_name(NodeType t);
NodeType parse_node_type(std::string_view text);

enum class RelationClass : std::uint8_t { IntraA, IntraB, Inter };

std::string_view relation_class_name(RelationClass k);
RelationClass parse_relation_class(std::string_view text);

struct RelationSpec {
  std::uint32_t id = 0;
  RelationClass klass = RelationClass::IntraA;
  NodeType src_type = NodeType::A;
  NodeType dst_type = NodeType::A;
  std::string name;
  // Intra relations only: both directions are materialized.
  bool symmetric = false;

  bool is_intra() const { return klass != RelationClass::Inter; }
  bool operator==(const RelationSpec&) const = default;
};

struct NodeRef {
  NodeType type = NodeType::A;
  std::uint32_t id = 0;
};

struct Edge {
  std::uint32_t relation = 0;
  NodeRef src;
  NodeRef dst;
};

struct CsrAdjacency {
  std::vector<std::uint32_t> row_offsets{0};
  std::vector<std::uint32_t> col_indices;

  std::size_t num_rows() const { return row_offsets.size() - 1; }
  std::size_t num_edges() const { return col_indices.size(); }
  std::size_t degree(std::size_t row) const {
    return row_offsets[row + 1] - row_offsets[row];
  }
  std::span<const std::uint32_t> row(std::size_t r) const {
    return {col_indices.data() + row_offsets[r], degree(r)};
  }

  // Builds from (row, col) pairs; pairs are sorted and deduplicated.
  static CsrAdjacency from_pairs(std::size_t num_rows,
                                 std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs);
  CsrAdjacency transposed(std::size_t num_cols) const;

  bool operator==(const CsrAdjacency&) const = default;
};

// Immutable bi-typed multi-relational heterogeneous graph. Node ids are dense
// and 0-based per type.
class BMHGraph {
 public:
  const std::array<std::size_t, kNumNodeTypes>& node_counts() const { return counts_; }
  std::size_t num_nodes(NodeType t) const { return counts_[type_index(t)]; }
  std::size_t feature_dim() const { return features_[0].cols; }
  const Matrix& features(NodeType t) const { return features_[type_index(t)]; }

  const std::vector<RelationSpec>& relations() const { return relations_; }
  const RelationSpec& relation(std::uint32_t id) const;
  std::optional<std::uint32_t> find_relation(std::string_view name) const;
  std::vector<std::uint32_t> relations_of(RelationClass klass) const;
  // Intra relations whose endpoints are of type t.
  std::vector<std::uint32_t> intra_relations(NodeType t) const;
  std::vector<std::uint32_t> inter_relations() const;

  // Stored edges (symmetrized, deduplicated), no self-loops added.
  const CsrAdjacency& adjacency(std::uint32_t relation) const;
  // Inter relations only: the transposed edge set.
  const CsrAdjacency& reverse_adjacency(std::uint32_t relation) const;
  // Intra relations only: stored edges plus one self-loop per node.
  const CsrAdjacency& attention_adjacency(std::uint32_t relation) const;
  // Inter relation adjacency seen from `target`: forward if target is the
  // relation's source type, reverse otherwise.
  const CsrAdjacency& inter_view(std::uint32_t relation, NodeType target) const;

  std::span<const std::uint32_t> neighbors(std::uint32_t relation, std::uint32_t node) const;
  std::span<const std::uint32_t> reverse_neighbors(std::uint32_t relation,
                                                   std::uint32_t node) const;
  std::size_t num_edges(std::uint32_t relation) const {
    return adjacency(relation).num_edges();
  }

  // Every stored edge, relation by relation, rows ascending.
  std::vector<Edge> edges() const;

  BMHGraph with_features(NodeType t, Matrix features) const;

 private:
  friend BMHGraph build_graph(std::array<std::size_t, kNumNodeTypes>,
                              std::array<Matrix, kNumNodeTypes>, std::vector<RelationSpec>,
                              std::span<const Edge>);

  struct RelationStore {
    CsrAdjacency forward;
    CsrAdjacency reverse;    // inter only
    CsrAdjacency attention;  // intra only
  };

  const RelationStore& store(std::uint32_t relation) const;

  std::array<std::size_t, kNumNodeTypes> counts_{};
  std::array<Matrix, kNumNodeTypes> features_;
  std::vector<RelationSpec> relations_;
  std::vector<RelationStore> stores_;
};

// Validates typing and ranges, deduplicates, symmetrizes declared-symmetric
// intra relations, and materializes reverse adjacency for inter relations.
// Relation ids must equal their position in `relations`.
BMHGraph build_graph(std::array<std::size_t, kNumNodeTypes> node_counts,
                     std::array<Matrix, kNumNodeTypes> features,
                     std::vector<RelationSpec> relations, std::span<const Edge> edges);

struct AuthorFeatureInit {
  Matrix features;
  // Type-A nodes without any neighbor under the listed relations (zero rows).
  std::vector<std::uint32_t> isolated;
};

// Mean of type-B neighbor features over the union of the given inter
// relations, for every type-A node.
AuthorFeatureInit init_author_features(const BMHGraph& graph,
                                       std::span<const std::uint32_t> inter_relations);

}  // namespace dhan
