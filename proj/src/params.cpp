#include "dhan/params.hpp"

#include <cmath>

namespace dhan {

const CsrAdjacency& RelationSlot::adjacency(const BMHGraph& graph) const {
  if (is_intra()) return graph.attention_adjacency(relation);
  return graph.inter_view(relation, target);
}

namespace {

std::vector<RelationSlot> own_intra(const BMHGraph& graph, NodeType target) {
  std::vector<RelationSlot> out;
  for (auto id : graph.intra_relations(target))
    out.push_back({id, target, target, graph.relation(id).name, false});
  return out;
}

std::vector<RelationSlot> own_inter(const BMHGraph& graph, NodeType target) {
  std::vector<RelationSlot> out;
  for (auto id : graph.inter_relations()) {
    const auto& spec = graph.relation(id);
    out.push_back({id, target, other_type(target), spec.name, spec.src_type != target});
  }
  return out;
}

}  // namespace

std::vector<RelationSlot> intra_slots(const BMHGraph& graph, NodeType target, Variant variant) {
  auto slots = own_intra(graph, target);
  if (variant == Variant::NoDual) {
    auto inter = own_inter(graph, target);
    slots.insert(slots.end(), inter.begin(), inter.end());
  }
  return slots;
}

std::vector<RelationSlot> inter_slots(const BMHGraph& graph, NodeType target, Variant variant) {
  if (variant == Variant::NoDual) return {};
  return own_inter(graph, target);
}

Tensor uniform(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  std::vector<double> v(rows * cols);
  for (auto& x : v) x = uniform_real(rng, -bound, bound);
  return Tensor::from(rows, cols, std::move(v), true);
}

Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  return uniform(rows, cols, std::sqrt(6.0 / static_cast<double>(rows + cols)), rng);
}

NormParams identity_norm(std::size_t h) {
  return {Tensor::from(1, h, std::vector<double>(h, 1.0), true), Tensor::zeros(1, h, true)};
}

namespace {

RelationAttention init_attention(std::size_t h, Rng& rng) {
  return {uniform(2 * h, 1, 1.0 / std::sqrt(2.0 * static_cast<double>(h)), rng),
          identity_norm(h)};
}

}  // namespace

EncoderParams init_encoder_params(const ModelConfig& config, const BMHGraph& graph, Rng& rng) {
  const std::size_t h = config.hidden_dim;
  const std::size_t d = config.input_dim;
  const double vec_bound = 1.0 / std::sqrt(2.0 * static_cast<double>(h));
  EncoderParams p;
  if (config.layers == 0) {
    for (std::size_t t = 0; t < kNumNodeTypes; ++t) p.input_projection[t] = glorot(d, h, rng);
    return p;
  }
  for (std::size_t l = 0; l < config.layers; ++l) {
    LayerParams layer;
    const std::size_t d_in = l == 0 ? d : h;
    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
      const NodeType t = static_cast<NodeType>(ti);
      layer.projection[ti] = glorot(d_in, h, rng);

      auto& intra = layer.intra[ti];
      const auto islots = intra_slots(graph, t, config.variant);
      for (std::size_t k = 0; k < islots.size(); ++k)
        intra.relations.push_back(init_attention(h, rng));
      intra.local_query = uniform(2 * h, 1, vec_bound, rng);
      intra.global_logits = Tensor::zeros(1, islots.size(), true);
      intra.smooth_logit = Tensor::zeros(1, 1, true);
      layer.intra_residual_norm[ti] = identity_norm(h);

      const auto xslots = inter_slots(graph, t, config.variant);
      if (!xslots.empty()) {
        auto& inter = layer.inter[ti];
        inter.common_map = glorot(h, h, rng);
        for (std::size_t m = 0; m < xslots.size(); ++m)
          inter.relations.push_back(init_attention(h, rng));
        inter.fuse_query = uniform(2 * h, 1, vec_bound, rng);
        layer.inter_residual_norm[ti] = identity_norm(h);
      }
      if (config.ordering == Ordering::Parallel) layer.merge[ti] = glorot(2 * h, h, rng);
    }
    p.layers.push_back(std::move(layer));
  }
  return p;
}

std::vector<NamedTensor> EncoderParams::named() const {
  std::vector<NamedTensor> out;
  auto add = [&](std::string name, const Tensor& t) {
    if (t.defined()) out.push_back({std::move(name), t});
  };
  auto add_norm = [&](const std::string& prefix, const NormParams& n) {
    add(prefix + ".gain", n.gain);
    add(prefix + ".bias", n.bias);
  };
  for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti)
    add("input_projection." + std::string(node_type_name(NodeType(ti))), input_projection[ti]);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    for (std::size_t ti = 0; ti < kNumNodeTypes; ++ti) {
      const std::string base =
          "layer" + std::to_string(l) + "." + std::string(node_type_name(NodeType(ti)));
      add(base + ".projection", layer.projection[ti]);
      const auto& intra = layer.intra[ti];
      for (std::size_t k = 0; k < intra.relations.size(); ++k) {
        const std::string r = base + ".intra.rel" + std::to_string(k);
        add(r + ".attention", intra.relations[k].attention);
        add_norm(r + ".norm", intra.relations[k].norm);
      }
      add(base + ".intra.local_query", intra.local_query);
      add(base + ".intra.global_logits", intra.global_logits);
      add(base + ".intra.smooth_logit", intra.smooth_logit);
      add_norm(base + ".intra_residual_norm", layer.intra_residual_norm[ti]);
      const auto& inter = layer.inter[ti];
      add(base + ".inter.common_map", inter.common_map);
      for (std::size_t m = 0; m < inter.relations.size(); ++m) {
        const std::string r = base + ".inter.rel" + std::to_string(m);
        add(r + ".attention", inter.relations[m].attention);
        add_norm(r + ".norm", inter.relations[m].norm);
      }
      add(base + ".inter.fuse_query", inter.fuse_query);
      add_norm(base + ".inter_residual_norm", layer.inter_residual_norm[ti]);
      add(base + ".merge", layer.merge[ti]);
    }
  }
  return out;
}

}  // namespace dhan
