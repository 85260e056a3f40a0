#include "dhan/gradcheck.hpp"

#include <cmath>

#include "dhan/ops.hpp"
#include "dhan/rng.hpp"
#include "dhan/train.hpp"

namespace dhan {

Dataset gradcheck_dataset(std::uint64_t seed) {
  Rng rng(derive_seed(seed, seed_stream::kSynth));
  constexpr std::uint32_t n = 10;
  constexpr std::size_t d = 3;
  const NodeType A = NodeType::A, B = NodeType::B;
  std::vector<RelationSpec> rels{
      {0, RelationClass::IntraA, A, A, "coauthor", true},
      {1, RelationClass::IntraA, A, A, "advisor", false},
      {2, RelationClass::IntraB, B, B, "cite", false},
      {3, RelationClass::IntraB, B, B, "topic", true},
      {4, RelationClass::Inter, A, B, "writes", false},
      {5, RelationClass::Inter, A, B, "reviews", false},
  };
  std::vector<Edge> edges;
  for (std::uint32_t r = 0; r < 4; ++r) {
    const NodeType t = r < 2 ? A : B;
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = 0; j < n; ++j)
        if (i != j && uniform_unit(rng) < 0.25) edges.push_back({r, {t, i}, {t, j}});
  }
  // Author 9 and paper 9 stay outside every inter relation.
  for (std::uint32_t r = 4; r < 6; ++r)
    for (std::uint32_t i = 0; i + 1 < n; ++i)
      for (std::uint32_t j = 0; j + 1 < n; ++j)
        if (uniform_unit(rng) < 0.3) edges.push_back({r, {A, i}, {B, j}});
  std::array<Matrix, kNumNodeTypes> x{Matrix(n, d), Matrix(n, d)};
  for (auto& m : x)
    for (auto& v : m.values) v = standard_normal(rng);

  Dataset ds;
  ds.graph = build_graph({n, n}, std::move(x), rels, edges);
  auto split_for = [](std::uint32_t i) { return i % 3 == 2 ? Split::Val : Split::Train; };
  TaskSpec single{"label", TaskKind::SingleLabel, B, 3, {}, {}, {}};
  TaskSpec multi{"tags", TaskKind::MultiLabel, B, 3, {}, {}, {}};
  TaskSpec link{"link", TaskKind::LinkRanking, A, 0, {}, {}, std::vector<std::int64_t>(n, -1)};
  for (std::uint32_t i = 0; i < n; ++i) {
    single.labels.push_back({static_cast<std::uint32_t>(uniform_index(rng, 3))});
    std::vector<std::uint32_t> tags;
    for (std::uint32_t c = 0; c < 3; ++c)
      if (uniform_unit(rng) < 0.5) tags.push_back(c);
    multi.labels.push_back(tags);
    link.labels.push_back({static_cast<std::uint32_t>(uniform_index(rng, n)),
                           static_cast<std::uint32_t>((i + 5) % n)});
    if (link.labels.back()[0] == link.labels.back()[1]) link.labels.back().pop_back();
    std::sort(link.labels.back().begin(), link.labels.back().end());
    for (auto* t : {&single, &multi, &link}) t->split.push_back(split_for(i));
  }
  ds.tasks = {std::move(single), std::move(multi), std::move(link)};
  for (const auto& t : ds.tasks) t.validate(ds.graph);
  return ds;
}

double gradcheck_rel_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / denom;
}

namespace {

Tensor model_loss(Tape& tape, const Model& model, const Dataset& ds, const ModelConfig& c) {
  const auto fwd = model.encoder.forward(tape, ds.graph, ForwardOptions{});
  Tensor total;
  for (std::size_t k = 0; k < model.heads.size(); ++k) {
    Rng neg(derive_seed(c.seed, seed_stream::kNegatives));
    const LossOptions lo{c.temperature, c.literal_temperature, c.link_negatives, &neg};
    const Tensor l = task_loss(tape, fwd.embeddings, ds.tasks[model.task_index[k]],
                               model.heads[k], Split::Train, lo);
    total = total.defined() ? ops::add(tape, total, l) : l;
  }
  return total;
}

}  // namespace

GradcheckReport gradcheck_model(const Dataset& ds, const ModelConfig& config, double h,
                                const std::string& setting) {
  ModelConfig c = config;
  c.dropout = 0.0;
  Model model = build_model(ds, c);
  const auto params = model.named(ds);
  {
    Tape tape;
    const Tensor loss = model_loss(tape, model, ds, c);
    for (const auto& p : params) p.tensor.zero_grad();
    tape.backward(loss);
  }
  GradcheckReport rep;
  rep.settings.push_back(setting);
  rep.worst.rel_error = -1.0;
  for (const auto& p : params) {
    Tensor t = p.tensor;
    const std::vector<double> analytic(t.grad().begin(), t.grad().end());
    for (std::size_t e = 0; e < t.size(); ++e) {
      const double orig = t.data()[e];
      t.mutable_data()[e] = orig + h;
      double up, down;
      {
        Tape tape;
        up = model_loss(tape, model, ds, c).item();
      }
      t.mutable_data()[e] = orig - h;
      {
        Tape tape;
        down = model_loss(tape, model, ds, c).item();
      }
      t.mutable_data()[e] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double err = gradcheck_rel_error(analytic[e], numeric);
      ++rep.checked;
      if (err > rep.worst.rel_error)
        rep.worst = {setting, p.name, e, analytic[e], numeric, err};
    }
  }
  return rep;
}

GradcheckReport gradcheck_suite(std::uint64_t seed, double h) {
  const Dataset ds = gradcheck_dataset(seed);
  ModelConfig base;
  base.hidden_dim = 4;
  base.layers = 2;
  base.dropout = 0.0;
  base.link_negatives = 2;
  base.seed = seed;
  struct Setting {
    Variant variant;
    Ordering ordering;
  };
  const Setting settings[] = {
      {Variant::Full, Ordering::IntraThenInter}, {Variant::NoDual, Ordering::IntraThenInter},
      {Variant::NoHierarchy, Ordering::IntraThenInter},
      {Variant::NoGlobal, Ordering::IntraThenInter}, {Variant::Full, Ordering::Inverted},
      {Variant::Full, Ordering::Parallel},
  };
  GradcheckReport total;
  total.worst.rel_error = -1.0;
  for (const auto& s : settings) {
    ModelConfig c = base;
    c.variant = s.variant;
    c.ordering = s.ordering;
    const std::string label =
        std::string(variant_name(s.variant)) + "/" + std::string(ordering_name(s.ordering));
    const auto rep = gradcheck_model(ds, c, h, label);
    total.checked += rep.checked;
    total.settings.push_back(label);
    if (rep.worst.rel_error > total.worst.rel_error) total.worst = rep.worst;
  }
  return total;
}

}  // namespace dhan
