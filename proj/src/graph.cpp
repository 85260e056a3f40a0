#include "dhan/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dhan/error.hpp"

namespace dhan {

std::string_view node_type_name(NodeType t) { return t == NodeType::A ? "A" : "B"; }

NodeType parse_node_type(std::string_view text) {
  if (text == "A") return NodeType::A;
  if (text == "B") return NodeType::B;
  throw Error(ErrorCode::ParseError, "unknown node type '" + std::string(text) + "'");
}

std::string_view relation_class_name(RelationClass k) {
  switch (k) {
    case RelationClass::IntraA: return "intra_a";
    case RelationClass::IntraB: return "intra_b";
    case RelationClass::Inter: return "inter";
  }
  return "?";
}

RelationClass parse_relation_class(std::string_view text) {
  if (text == "intra_a") return RelationClass::IntraA;
  if (text == "intra_b") return RelationClass::IntraB;
  if (text == "inter") return RelationClass::Inter;
  throw Error(ErrorCode::ParseError, "unknown relation class '" + std::string(text) + "'");
}

CsrAdjacency CsrAdjacency::from_pairs(
    std::size_t num_rows, std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  CsrAdjacency csr;
  csr.row_offsets.assign(num_rows + 1, 0);
  csr.col_indices.reserve(pairs.size());
  for (const auto& [r, c] : pairs) {
    ++csr.row_offsets[r + 1];
    csr.col_indices.push_back(c);
  }
  for (std::size_t r = 0; r < num_rows; ++r) csr.row_offsets[r + 1] += csr.row_offsets[r];
  return csr;
}

CsrAdjacency CsrAdjacency::transposed(std::size_t num_cols) const {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  pairs.reserve(num_edges());
  for (std::size_t r = 0; r < num_rows(); ++r)
    for (auto c : row(r)) pairs.emplace_back(c, static_cast<std::uint32_t>(r));
  return from_pairs(num_cols, std::move(pairs));
}

const BMHGraph::RelationStore& BMHGraph::store(std::uint32_t relation) const {
  if (relation >= stores_.size())
    throw Error(ErrorCode::UnknownRelation, "unknown relation id " + std::to_string(relation));
  return stores_[relation];
}

const RelationSpec& BMHGraph::relation(std::uint32_t id) const {
  if (id >= relations_.size())
    throw Error(ErrorCode::UnknownRelation, "unknown relation id " + std::to_string(id));
  return relations_[id];
}

std::optional<std::uint32_t> BMHGraph::find_relation(std::string_view name) const {
  for (const auto& r : relations_)
    if (r.name == name) return r.id;
  return std::nullopt;
}

std::vector<std::uint32_t> BMHGraph::relations_of(RelationClass klass) const {
  std::vector<std::uint32_t> out;
  for (const auto& r : relations_)
    if (r.klass == klass) out.push_back(r.id);
  return out;
}

std::vector<std::uint32_t> BMHGraph::intra_relations(NodeType t) const {
  return relations_of(t == NodeType::A ? RelationClass::IntraA : RelationClass::IntraB);
}

std::vector<std::uint32_t> BMHGraph::inter_relations() const {
  return relations_of(RelationClass::Inter);
}

const CsrAdjacency& BMHGraph::adjacency(std::uint32_t relation) const {
  return store(relation).forward;
}

const CsrAdjacency& BMHGraph::reverse_adjacency(std::uint32_t relation) const {
  const auto& s = store(relation);
  if (relations_[relation].is_intra())
    throw Error(ErrorCode::RelationClassMismatch,
                "relation '" + relations_[relation].name + "' has no reverse adjacency");
  return s.reverse;
}

const CsrAdjacency& BMHGraph::attention_adjacency(std::uint32_t relation) const {
  const auto& s = store(relation);
  if (!relations_[relation].is_intra())
    throw Error(ErrorCode::RelationClassMismatch,
                "relation '" + relations_[relation].name + "' is not intra-class");
  return s.attention;
}

const CsrAdjacency& BMHGraph::inter_view(std::uint32_t relation, NodeType target) const {
  const auto& spec = this->relation(relation);
  if (spec.is_intra())
    throw Error(ErrorCode::RelationClassMismatch,
                "relation '" + spec.name + "' is not inter-class");
  return spec.src_type == target ? stores_[relation].forward : stores_[relation].reverse;
}

std::span<const std::uint32_t> BMHGraph::neighbors(std::uint32_t relation,
                                                   std::uint32_t node) const {
  const auto& csr = adjacency(relation);
  if (node >= csr.num_rows())
    throw Error(ErrorCode::NodeOutOfRange, "node " + std::to_string(node) +
                                               " out of range for relation '" +
                                               relations_[relation].name + "'");
  return csr.row(node);
}

std::span<const std::uint32_t> BMHGraph::reverse_neighbors(std::uint32_t relation,
                                                           std::uint32_t node) const {
  const auto& csr = reverse_adjacency(relation);
  if (node >= csr.num_rows())
    throw Error(ErrorCode::NodeOutOfRange, "node " + std::to_string(node) +
                                               " out of range for reverse of '" +
                                               relations_[relation].name + "'");
  return csr.row(node);
}

std::vector<Edge> BMHGraph::edges() const {
  std::vector<Edge> out;
  for (const auto& spec : relations_) {
    const auto& csr = stores_[spec.id].forward;
    for (std::size_t r = 0; r < csr.num_rows(); ++r)
      for (auto c : csr.row(r))
        out.push_back({spec.id, {spec.src_type, static_cast<std::uint32_t>(r)},
                       {spec.dst_type, c}});
  }
  return out;
}

BMHGraph BMHGraph::with_features(NodeType t, Matrix features) const {
  if (features.rows != num_nodes(t) || features.cols != feature_dim())
    throw Error(ErrorCode::DimensionMismatch, "replacement feature matrix has wrong shape");
  BMHGraph g = *this;
  g.features_[type_index(t)] = std::move(features);
  return g;
}

namespace {

void validate_relation(const RelationSpec& spec, std::size_t position) {
  if (spec.id != position)
    throw Error(ErrorCode::InvalidArgument,
                "relation '" + spec.name + "' id does not match its position");
  const bool ok = (spec.klass == RelationClass::IntraA && spec.src_type == NodeType::A &&
                   spec.dst_type == NodeType::A) ||
                  (spec.klass == RelationClass::IntraB && spec.src_type == NodeType::B &&
                   spec.dst_type == NodeType::B) ||
                  (spec.klass == RelationClass::Inter && spec.src_type != spec.dst_type);
  if (!ok)
    throw Error(ErrorCode::TypeMismatch,
                "relation '" + spec.name + "' endpoint types contradict its class");
  if (spec.klass == RelationClass::Inter && spec.symmetric)
    throw Error(ErrorCode::TypeMismatch,
                "inter relation '" + spec.name + "' cannot be symmetric");
}

}  // namespace

BMHGraph build_graph(std::array<std::size_t, kNumNodeTypes> node_counts,
                     std::array<Matrix, kNumNodeTypes> features,
                     std::vector<RelationSpec> relations, std::span<const Edge> edges) {
  for (std::size_t t = 0; t < kNumNodeTypes; ++t) {
    if (features[t].rows != node_counts[t])
      throw Error(ErrorCode::DimensionMismatch,
                  "feature rows for type " + std::string(node_type_name(NodeType(t))) +
                      " do not match node count");
    for (double v : features[t].values)
      if (!std::isfinite(v))
        throw Error(ErrorCode::InvalidArgument, "non-finite feature value");
  }
  if (features[0].cols != features[1].cols)
    throw Error(ErrorCode::DimensionMismatch, "node types have different feature widths");
  for (std::size_t i = 0; i < relations.size(); ++i) validate_relation(relations[i], i);

  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> pairs(relations.size());
  for (const Edge& e : edges) {
    if (e.relation >= relations.size())
      throw Error(ErrorCode::UnknownRelation,
                  "edge references unknown relation id " + std::to_string(e.relation));
    const auto& spec = relations[e.relation];
    if (e.src.type != spec.src_type || e.dst.type != spec.dst_type)
      throw Error(ErrorCode::TypeMismatch,
                  "edge (" + std::string(node_type_name(e.src.type)) +
                      std::to_string(e.src.id) + ", " +
                      std::string(node_type_name(e.dst.type)) + std::to_string(e.dst.id) +
                      ") violates typing of relation '" + spec.name + "'");
    if (e.src.id >= node_counts[type_index(e.src.type)] ||
        e.dst.id >= node_counts[type_index(e.dst.type)])
      throw Error(ErrorCode::DanglingNode,
                  "edge in relation '" + spec.name + "' references a node out of range");
    pairs[e.relation].emplace_back(e.src.id, e.dst.id);
    if (spec.symmetric) pairs[e.relation].emplace_back(e.dst.id, e.src.id);
  }

  BMHGraph g;
  g.counts_ = node_counts;
  g.features_ = std::move(features);
  g.stores_.resize(relations.size());
  for (const auto& spec : relations) {
    auto& store = g.stores_[spec.id];
    const std::size_t n_src = node_counts[type_index(spec.src_type)];
    const std::size_t n_dst = node_counts[type_index(spec.dst_type)];
    store.forward = CsrAdjacency::from_pairs(n_src, pairs[spec.id]);
    if (spec.is_intra()) {
      auto with_loops = std::move(pairs[spec.id]);
      for (std::uint32_t v = 0; v < n_src; ++v) with_loops.emplace_back(v, v);
      store.attention = CsrAdjacency::from_pairs(n_src, std::move(with_loops));
    } else {
      store.reverse = store.forward.transposed(n_dst);
    }
  }
  g.relations_ = std::move(relations);
  return g;
}

AuthorFeatureInit init_author_features(const BMHGraph& graph,
                                       std::span<const std::uint32_t> inter_relations) {
  const std::size_t n = graph.num_nodes(NodeType::A);
  const std::size_t d = graph.feature_dim();
  const Matrix& paper = graph.features(NodeType::B);
  AuthorFeatureInit out{Matrix(n, d), {}};
  std::vector<std::uint32_t> papers;
  for (std::uint32_t a = 0; a < n; ++a) {
    papers.clear();
    for (auto r : inter_relations) {
      const auto nb = graph.inter_view(r, NodeType::A).row(a);
      papers.insert(papers.end(), nb.begin(), nb.end());
    }
    std::sort(papers.begin(), papers.end());
    papers.erase(std::unique(papers.begin(), papers.end()), papers.end());
    if (papers.empty()) {
      out.isolated.push_back(a);
      continue;
    }
    auto dst = out.features.row(a);
    for (auto p : papers) {
      const auto src = paper.row(p);
      for (std::size_t c = 0; c < d; ++c) dst[c] += src[c];
    }
    const double inv = 1.0 / static_cast<double>(papers.size());
    for (auto& v : dst) v *= inv;
  }
  return out;
}

}  // namespace dhan
