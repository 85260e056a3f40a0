#include <gtest/gtest.h>

#include <cmath>

#include "dhan/error.hpp"
#include "dhan/inter_encoder.hpp"
#include "dhan/intra_encoder.hpp"
#include "test_support.hpp"

namespace dhan {
namespace {

const NodeType A = NodeType::A, B = NodeType::B;
const double kC = 1.0 / std::sqrt(1.0 + 1e-5);  // layer norm scale of a row [x, -x] with x = 1

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

RelationAttention relation_params(std::vector<double> a) {
  const std::size_t n = a.size();
  return {Tensor::from(n, 1, std::move(a)), identity_norm(n / 2)};
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::InvalidArgument;
}

// Authors 0..na-1, papers 0..nb-1; relation 0 intra A, 1 intra B, 2 and 3 inter.
BMHGraph small_graph(std::uint32_t na, std::uint32_t nb, const std::vector<Edge>& edges,
                     std::size_t d = 2) {
  std::vector<RelationSpec> rels{
      {0, RelationClass::IntraA, A, A, "colleague", true},
      {1, RelationClass::IntraB, B, B, "cite", false},
      {2, RelationClass::Inter, A, B, "important", false},
      {3, RelationClass::Inter, A, B, "ordinary", false},
  };
  return build_graph({na, nb}, {Matrix(na, d), Matrix(nb, d)}, rels, edges);
}

TEST(IntraNodeAggregate, SelfLoopOnly) {
  const BMHGraph g = small_graph(1, 1, {});
  const Tensor hp = Tensor::from(1, 2, {3, 1});
  Tape tape;
  const auto agg = intra_node_aggregate(tape, hp, g, 0, A, relation_params({0.3, -1, 2, 0.5}), 0.2);
  EXPECT_EQ(values(agg.attention), std::vector<double>{1.0});
  EXPECT_NEAR(agg.output(0, 0), kC, 1e-15);
  EXPECT_NEAR(agg.output(0, 1), -0.2 * kC, 1e-15);
}

TEST(IntraNodeAggregate, EqualScoresSplitEvenly) {
  const BMHGraph g = small_graph(2, 1, {{0, {A, 0}, {A, 1}}});
  const Tensor hp = Tensor::from(2, 2, {1, 2, -3, 0.5});
  Tape tape;
  const auto agg = intra_node_aggregate(tape, hp, g, 0, A, relation_params({0, 0, 0, 0}), 0.2);
  EXPECT_EQ(values(agg.attention), (std::vector<double>{0.5, 0.5, 0.5, 0.5}));
}

TEST(IntraNodeAggregate, HandEvaluatedSingleNeighbor) {
  const auto adj = CsrAdjacency::from_pairs(1, {{0, 0}});
  Tape tape;
  const auto agg = attend_and_aggregate(tape, Tensor::from(1, 2, {0, 0}), Tensor::from(1, 2, {1, -1}),
                                        adj, relation_params({1, 1, 1, 1}), 0.2);
  EXPECT_NEAR(agg.output(0, 0), kC, 1e-15);
  EXPECT_NEAR(agg.output(0, 1), -0.2 * kC, 1e-15);
  EXPECT_NEAR(agg.output(0, 0), 1.0, 1e-5);
  EXPECT_NEAR(agg.output(0, 1), -0.2, 1e-5);
}

TEST(IntraNodeAggregate, RejectsInterRelationAndWrongType) {
  const BMHGraph g = small_graph(1, 1, {});
  Tape tape;
  const Tensor hp = Tensor::zeros(1, 2);
  EXPECT_EQ(code_of([&] { intra_node_aggregate(tape, hp, g, 2, A, relation_params({0, 0, 0, 0}), 0.2); }),
            ErrorCode::RelationClassMismatch);
  EXPECT_EQ(code_of([&] { intra_node_aggregate(tape, hp, g, 1, A, relation_params({0, 0, 0, 0}), 0.2); }),
            ErrorCode::RelationClassMismatch);
}

NodeAggregation fixed_aggregation(Tensor out) {
  NodeAggregation agg;
  agg.has_neighbors.assign(out.rows(), 1);
  agg.output = std::move(out);
  return agg;
}

TypeIntraParams fusion_params(std::vector<double> q, std::vector<double> b, double tau) {
  TypeIntraParams p;
  const std::size_t nq = q.size(), nb = b.size();
  p.local_query = Tensor::from(nq, 1, std::move(q));
  p.global_logits = Tensor::from(1, nb, std::move(b));
  p.smooth_logit = Tensor::scalar(tau);
  return p;
}

TEST(IntraRelationFuse, SingleRelationIsReturnedUnchanged) {
  Rng rng(1);
  const Tensor hp = testing::random_tensor(5, 3, rng, false);
  const Tensor h1 = testing::random_tensor(5, 3, rng, false);
  const std::vector<NodeAggregation> rels{fixed_aggregation(h1)};
  for (double tau : {-4.0, 0.0, 2.5}) {
    for (FusionMode mode : {FusionMode::GlobalLocal, FusionMode::LocalOnly, FusionMode::Mean}) {
      Tape tape;
      const auto z = intra_relation_fuse(tape, hp, rels, fusion_params({1, 2, 3, -1, 0, 2}, {0.7}, tau), mode);
      EXPECT_EQ(values(z.output), values(h1));
    }
  }
}

TEST(IntraRelationFuse, SmoothAtOneUsesGlobalWeightsOnly) {
  Rng rng(2);
  const Tensor hp = testing::random_tensor(4, 2, rng, false);
  const std::vector<NodeAggregation> rels{fixed_aggregation(testing::random_tensor(4, 2, rng, false)),
                                          fixed_aggregation(testing::random_tensor(4, 2, rng, false))};
  Tape tape;
  const auto z = intra_relation_fuse(tape, hp, rels, fusion_params({1, -2, 0.5, 3}, {0, std::log(3.0)}, 1e3),
                                     FusionMode::GlobalLocal);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_NEAR(z.coefficients(i, 0), 0.25, 1e-15);
    EXPECT_NEAR(z.coefficients(i, 1), 0.75, 1e-15);
    for (std::size_t c = 0; c < 2; ++c)
      EXPECT_NEAR(z.output(i, c), 0.25 * rels[0].output(i, c) + 0.75 * rels[1].output(i, c), 1e-15);
  }
}

TEST(IntraRelationFuse, SmoothAtZeroMatchesLocalOnly) {
  Rng rng(3);
  const Tensor hp = testing::random_tensor(4, 2, rng, false);
  const std::vector<NodeAggregation> rels{fixed_aggregation(testing::random_tensor(4, 2, rng, false)),
                                          fixed_aggregation(testing::random_tensor(4, 2, rng, false))};
  Tape tape;
  const auto p = fusion_params({1, -2, 0.5, 3}, {2, -1}, -1e3);
  const auto full = intra_relation_fuse(tape, hp, rels, p, FusionMode::GlobalLocal);
  const auto local = intra_relation_fuse(tape, hp, rels, p, FusionMode::LocalOnly);
  const auto a = values(full.output), b = values(local.output);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(IntraRelationFuse, HandEvaluatedOneNodeTwoRelations) {
  const Tensor hp = Tensor::from(1, 2, {1, 0});
  const std::vector<NodeAggregation> rels{fixed_aggregation(Tensor::from(1, 2, {1, 0})),
                                          fixed_aggregation(Tensor::from(1, 2, {0, 1}))};
  Tape tape;
  // g = [0.5 + 1, 0.5 - 1]; local = softmax(g); global = [1/4, 3/4]; t = 1/2
  const auto z = intra_relation_fuse(tape, hp, rels, fusion_params({0.5, 0, 1, -1}, {0, std::log(3.0)}, 0.0),
                                     FusionMode::GlobalLocal);
  const double e2 = std::exp(2.0);
  const double c1 = 0.5 * 0.25 + 0.5 * e2 / (1 + e2), c2 = 0.5 * 0.75 + 0.5 / (1 + e2);
  EXPECT_NEAR(z.local_weights(0, 0), e2 / (1 + e2), 1e-15);
  EXPECT_NEAR(z.smooth.item(), 0.5, 0.0);
  EXPECT_NEAR(z.output(0, 0), c1, 1e-15);
  EXPECT_NEAR(z.output(0, 1), c2, 1e-15);
  EXPECT_NEAR(c1 + c2, 1.0, 1e-15);
}

TEST(IntraRelationFuse, MeanIgnoresQueries) {
  const Tensor hp = Tensor::from(1, 2, {1, 0});
  const std::vector<NodeAggregation> rels{fixed_aggregation(Tensor::from(1, 2, {1, 3})),
                                          fixed_aggregation(Tensor::from(1, 2, {0, 1}))};
  Tape tape;
  const auto z = intra_relation_fuse(tape, hp, rels, fusion_params({9, 9, 9, 9}, {5, 0}, 3), FusionMode::Mean);
  EXPECT_EQ(values(z.output), (std::vector<double>{0.5, 2}));
}

TEST(IntraRelationFuse, NoRelations) {
  Tape tape;
  EXPECT_EQ(code_of([&] {
              intra_relation_fuse(tape, Tensor::zeros(1, 2), {}, fusion_params({0, 0, 0, 0}, {}, 0),
                                  FusionMode::GlobalLocal);
            }),
            ErrorCode::NoRelations);
}

std::array<Tensor, 2> hand_maps() {
  return {Tensor::from(2, 2, {1, 0, 0, 1}), Tensor::from(2, 2, {2, 1, 1, -1})};
}

TEST(InterNodeAggregate, HandEvaluatedOneAuthorOnePaper) {
  const BMHGraph g = small_graph(1, 1, {{2, {A, 0}, {B, 0}}});
  const std::array<Tensor, 2> z{Tensor::from(1, 2, {1, 2}), Tensor::from(1, 2, {0, 1})};
  Tape tape;
  const auto to_author = inter_node_aggregate(tape, z, g, 2, InterDirection::Forward, hand_maps(),
                                              relation_params({0.3, 0.1, -2, 1}), 0.2);
  EXPECT_EQ(values(to_author.attention), std::vector<double>{1.0});
  // W_B z_B = [1, -1]
  EXPECT_NEAR(to_author.output(0, 0), kC, 1e-15);
  EXPECT_NEAR(to_author.output(0, 1), -0.2 * kC, 1e-15);

  const auto to_paper = inter_node_aggregate(tape, z, g, 2, InterDirection::Reverse, hand_maps(),
                                             relation_params({0.3, 0.1, -2, 1}), 0.2);
  // W_A z_A = [1, 2]: mean 1.5, variance 0.25
  const double s = std::sqrt(0.25 + 1e-5);
  EXPECT_NEAR(to_paper.output(0, 0), -0.2 * 0.5 / s, 1e-15);
  EXPECT_NEAR(to_paper.output(0, 1), 0.5 / s, 1e-15);
}

TEST(InterNodeAggregate, IdenticalNeighborsMatchSingleNeighbor) {
  const BMHGraph one = small_graph(1, 2, {{2, {A, 0}, {B, 0}}});
  const BMHGraph two = small_graph(1, 2, {{2, {A, 0}, {B, 0}}, {2, {A, 0}, {B, 1}}});
  const std::array<Tensor, 2> z{Tensor::from(1, 2, {1, 2}), Tensor::from(2, 2, {0.4, 1, 0.4, 1})};
  const auto p = relation_params({0.3, 0.1, -2, 1});
  Tape tape;
  const auto a = inter_node_aggregate(tape, z, one, 2, InterDirection::Forward, hand_maps(), p, 0.2);
  const auto b = inter_node_aggregate(tape, z, two, 2, InterDirection::Forward, hand_maps(), p, 0.2);
  EXPECT_EQ(values(b.attention), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(values(a.output), values(b.output));
}

TEST(InterNodeAggregate, NodeWithoutNeighborsGetsZeroRow) {
  const BMHGraph g = small_graph(2, 1, {{2, {A, 0}, {B, 0}}});
  const std::array<Tensor, 2> z{Tensor::from(2, 2, {1, 2, 3, 4}), Tensor::from(1, 2, {0, 1})};
  Tape tape;
  const auto agg = inter_node_aggregate(tape, z, g, 2, InterDirection::Forward, hand_maps(),
                                        relation_params({1, 1, 1, 1}), 0.2);
  EXPECT_EQ(agg.has_neighbors, (std::vector<std::uint8_t>{1, 0}));
  EXPECT_EQ(agg.output(1, 0), 0.0);
  EXPECT_EQ(agg.output(1, 1), 0.0);
}

TEST(InterNodeAggregate, Errors) {
  const BMHGraph g = small_graph(2, 1, {{2, {A, 0}, {B, 0}}});
  const std::array<Tensor, 2> z{Tensor::zeros(2, 2), Tensor::zeros(1, 2)};
  const auto p = relation_params({1, 1, 1, 1});
  Tape tape;
  EXPECT_EQ(code_of([&] { inter_node_aggregate(tape, z, g, 0, InterDirection::Forward, hand_maps(), p, 0.2); }),
            ErrorCode::RelationClassMismatch);
  EXPECT_EQ(code_of([&] { inter_node_aggregate(tape, z, g, 2, InterDirection(7), hand_maps(), p, 0.2); }),
            ErrorCode::DirectionInvalid);
  const std::array<Tensor, 2> swapped{Tensor::zeros(1, 2), Tensor::zeros(2, 2)};
  EXPECT_EQ(code_of([&] { inter_node_aggregate(tape, swapped, g, 2, InterDirection::Forward, hand_maps(), p, 0.2); }),
            ErrorCode::DirectionInvalid);
}

TEST(InterNodeAggregate, TypeSwapSymmetry) {
  Rng rng(5);
  const std::uint32_t na = 4, nb = 5;
  std::vector<Edge> forward, swapped;
  for (std::uint32_t i = 0; i < na; ++i)
    for (std::uint32_t j = 0; j < nb; ++j)
      if (uniform_unit(rng) < 0.5) {
        forward.push_back({0, {A, i}, {B, j}});
        swapped.push_back({0, {A, j}, {B, i}});
      }
  const std::vector<RelationSpec> rel{{0, RelationClass::Inter, A, B, "writes", false}};
  const BMHGraph g = build_graph({na, nb}, {Matrix(na, 2), Matrix(nb, 2)}, rel, forward);
  const BMHGraph h = build_graph({nb, na}, {Matrix(nb, 2), Matrix(na, 2)}, rel, swapped);
  const Tensor za = testing::random_tensor(na, 3, rng, false), zb = testing::random_tensor(nb, 3, rng, false);
  const Tensor wa = testing::random_tensor(3, 3, rng, false), wb = testing::random_tensor(3, 3, rng, false);
  const auto p = RelationAttention{testing::random_tensor(6, 1, rng, false), identity_norm(3)};
  Tape tape;
  for (auto dir : {InterDirection::Forward, InterDirection::Reverse}) {
    const auto other = dir == InterDirection::Forward ? InterDirection::Reverse : InterDirection::Forward;
    const auto a = inter_node_aggregate(tape, {za, zb}, g, 0, dir, {wa, wb}, p, 0.2);
    const auto b = inter_node_aggregate(tape, {zb, za}, h, 0, other, {wb, wa}, p, 0.2);
    EXPECT_EQ(values(a.output), values(b.output));
    EXPECT_EQ(values(a.attention), values(b.attention));
  }
}

TEST(InterRelationFuse, SingleRelationIsReturnedUnchanged) {
  Rng rng(6);
  const Tensor z = testing::random_tensor(3, 2, rng, false);
  const std::vector<NodeAggregation> rels{fixed_aggregation(testing::random_tensor(3, 2, rng, false))};
  Tape tape;
  const auto u = inter_relation_fuse(tape, z, rels, Tensor::from(4, 1, {1, -1, 2, 0.3}), FusionMode::GlobalLocal);
  EXPECT_EQ(values(u.output), values(rels[0].output));
}

TEST(InterRelationFuse, EqualScoresGiveMean) {
  const Tensor z = Tensor::from(1, 2, {1, 1});
  const std::vector<NodeAggregation> rels{fixed_aggregation(Tensor::from(1, 2, {1, 3})),
                                          fixed_aggregation(Tensor::from(1, 2, {0, 1}))};
  Tape tape;
  const auto u = inter_relation_fuse(tape, z, rels, Tensor::from(4, 1, {3, 1, 0, 0}), FusionMode::GlobalLocal);
  EXPECT_EQ(values(u.output), (std::vector<double>{0.5, 2}));
}

TEST(InterRelationFuse, HandEvaluatedTwoWaySoftmax) {
  const Tensor z = Tensor::from(1, 2, {1, 0});
  const std::vector<NodeAggregation> rels{fixed_aggregation(Tensor::from(1, 2, {2, 0})),
                                          fixed_aggregation(Tensor::from(1, 2, {0, 1}))};
  Tape tape;
  // f = [0.2 + 2, 0.2 - 1], a gap of 3
  const auto u = inter_relation_fuse(tape, z, rels, Tensor::from(4, 1, {0.2, 5, 1, -1}), FusionMode::GlobalLocal);
  const double e = 1.0 / (1.0 + std::exp(-3.0));
  EXPECT_NEAR(u.weights(0, 0), e, 1e-15);
  EXPECT_NEAR(u.weights(0, 1), 1 - e, 1e-15);
}

TEST(InterRelationFuse, RelationsWithoutNeighborsAreExcluded) {
  const Tensor z = Tensor::from(2, 2, {1, 0, 0, 1});
  auto r0 = fixed_aggregation(Tensor::from(2, 2, {2, 0, 0, 0}));
  auto r1 = fixed_aggregation(Tensor::from(2, 2, {0, 1, 0, 0}));
  r0.has_neighbors = {1, 0};
  r1.has_neighbors = {0, 0};
  const std::vector<NodeAggregation> rels{r0, r1};
  Tape tape;
  for (FusionMode mode : {FusionMode::GlobalLocal, FusionMode::Mean}) {
    const auto u = inter_relation_fuse(tape, z, rels, Tensor::from(4, 1, {1, 2, 3, 4}), mode);
    EXPECT_EQ(values(u.weights), (std::vector<double>{1, 0, 0, 0}));
    EXPECT_EQ(values(u.output), (std::vector<double>{2, 0, 0, 0}));
  }
}

TEST(WeightedResidual, Examples) {
  const Tensor x_new = Tensor::from(1, 2, {2, 0}), x_old = Tensor::from(1, 2, {0, 2});
  const NormParams norm = identity_norm(2);
  Tape tape;
  const double s = 1.0 / std::sqrt(1.0 + 1e-5);
  EXPECT_EQ(values(weighted_residual(tape, x_new, x_old, 0.5, norm, 0.2)), (std::vector<double>{0, 0}));
  const auto gated_off = values(weighted_residual(tape, x_new, x_old, 0.0, norm, 0.2));
  EXPECT_NEAR(gated_off[0], -s, 1e-15);
  EXPECT_NEAR(gated_off[1], s, 1e-15);
  const auto only_new = values(weighted_residual(tape, Tensor::from(1, 2, {1, -5}), x_old, 1.0, norm, 0.2));
  EXPECT_NEAR(only_new[0], s, 1e-15);
  EXPECT_NEAR(only_new[1], -s, 1e-15);
  const NormParams shifted{Tensor::from(1, 2, {1, 1}), Tensor::from(1, 2, {0.3, -0.3})};
  EXPECT_EQ(values(weighted_residual(tape, x_new, x_old, 0.5, shifted, 0.2)), (std::vector<double>{0.3, -0.3}));
}

TEST(WeightedResidual, Errors) {
  Tape tape;
  EXPECT_EQ(code_of([&] { weighted_residual(tape, Tensor::zeros(1, 2), Tensor::zeros(2, 2), 0.5, identity_norm(2), 0.2); }),
            ErrorCode::ShapeMismatch);
  EXPECT_EQ(code_of([&] { weighted_residual(tape, Tensor::zeros(1, 2), Tensor::zeros(1, 2), 1.5, identity_norm(2), 0.2); }),
            ErrorCode::InvalidArgument);
}

TEST(Slots, NoDualMergesAllRelationsIntoFirstStage) {
  const BMHGraph g = testing::random_graph(3);
  EXPECT_EQ(intra_slots(g, A, Variant::Full).size(), 2u);
  EXPECT_EQ(inter_slots(g, A, Variant::Full).size(), 2u);
  const auto merged = intra_slots(g, B, Variant::NoDual);
  EXPECT_EQ(merged.size(), 4u);
  EXPECT_TRUE(inter_slots(g, B, Variant::NoDual).empty());
  std::size_t cross = 0;
  for (const auto& s : merged) cross += !s.is_intra();
  EXPECT_EQ(cross, 2u);
}

}  // namespace
}  // namespace dhan
