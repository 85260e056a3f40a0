#include <gtest/gtest.h>

#include <cmath>

#include "dense_reference.hpp"
#include "dhan/error.hpp"
#include "dhan/model.hpp"
#include "dhan/ops.hpp"
#include "test_support.hpp"

namespace dhan {
namespace {

using testing::random_graph;

std::vector<double> values(const Tensor& t) { return {t.data().begin(), t.data().end()}; }

ModelConfig small_config(std::size_t layers = 2, Variant v = Variant::Full,
                         Ordering o = Ordering::IntraThenInter) {
  ModelConfig cfg;
  cfg.hidden_dim = 4;
  cfg.layers = layers;
  cfg.dropout = 0.0;
  cfg.variant = v;
  cfg.ordering = o;
  cfg.lambda_intra = 0.3;
  cfg.lambda_inter = 0.6;
  return cfg;
}

DhanEncoder random_encoder(const BMHGraph& g, const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  DhanEncoder enc(cfg, g, rng);
  testing::perturb_params(enc.params(), rng);
  return enc;
}

ForwardResult eval_forward(const DhanEncoder& enc, const BMHGraph& g, bool record = false) {
  Tape tape;
  ForwardOptions opt;
  opt.record = record;
  return enc.forward(tape, g, opt);
}

double max_abs_diff(const Tensor& a, const reference::Dense& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) worst = std::max(worst, std::abs(a(i, j) - b[i][j]));
  return worst;
}

TEST(Forward, EmptyStackIsInputProjection) {
  const BMHGraph g = random_graph(1);
  const auto enc = random_encoder(g, small_config(0), 2);
  const auto fr = eval_forward(enc, g);
  for (std::size_t t = 0; t < 2; ++t) {
    Tape tape;
    const Tensor expect = ops::linear(tape, Tensor::from(g.features(NodeType(t))),
                                      enc.params().input_projection[t]);
    EXPECT_EQ(values(fr.embeddings[t]), values(expect));
  }
}

TEST(Forward, NoInterEdgesLeavesNormOfIntraResidual) {
  testing::RandomGraphOptions opt;
  opt.inter_p = 0.0;
  const BMHGraph g = random_graph(4, opt);
  for (double lam : {0.0, 0.25, 0.9}) {
    ModelConfig cfg = small_config(1);
    cfg.lambda_inter = lam;
    const auto enc = random_encoder(g, cfg, 5);
    const auto fr = eval_forward(enc, g);
    const LayerParams& lp = enc.params().layers[0];
    Tape tape;
    std::array<Tensor, 2> hp;
    for (std::size_t t = 0; t < 2; ++t)
      hp[t] = ops::linear(tape, Tensor::from(g.features(NodeType(t))), lp.projection[t]);
    for (std::size_t t = 0; t < 2; ++t) {
      const NodeType nt = NodeType(t);
      const auto slots = intra_slots(g, nt, cfg.variant);
      const auto stage = run_intra_stage(tape, g, nt, hp, slots, lp.intra[t], FusionMode::GlobalLocal, cfg.slope);
      const Tensor zbar = weighted_residual(tape, stage.output, hp[t], cfg.lambda_intra,
                                            lp.intra_residual_norm[t], cfg.slope);
      const Tensor expect = ops::layer_norm(tape, ops::scalar_mul(tape, zbar, 1.0 - lam),
                                            lp.inter_residual_norm[t].gain, lp.inter_residual_norm[t].bias);
      const auto a = values(fr.embeddings[t]), b = values(expect);
      for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
    }
  }
}

TEST(Forward, NoGlobalEqualsFullWithSmoothForcedToZero) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BMHGraph g = random_graph(10 + seed);
    auto full = random_encoder(g, small_config(2), seed);
    for (auto& lp : full.params().layers)
      for (auto& ip : lp.intra) ip.smooth_logit.mutable_data()[0] = -1e3;
    ModelConfig ng_cfg = full.config();
    ng_cfg.variant = Variant::NoGlobal;
    const DhanEncoder no_global(ng_cfg, full.params());
    const auto a = eval_forward(full, g), b = eval_forward(no_global, g);
    for (std::size_t t = 0; t < 2; ++t) {
      const auto x = values(a.embeddings[t]), y = values(b.embeddings[t]);
      for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(x[i], y[i], 1e-12);
    }
  }
}

TEST(Forward, TrainWithoutDropoutEqualsEvalBitwise) {
  const BMHGraph g = random_graph(20);
  const auto enc = random_encoder(g, small_config(2), 21);
  const auto eval = eval_forward(enc, g);
  Tape tape;
  Rng drop(3);
  ForwardOptions opt;
  opt.training = true;
  opt.dropout_rng = &drop;
  const auto train = enc.forward(tape, g, opt);
  for (std::size_t t = 0; t < 2; ++t) EXPECT_EQ(values(train.embeddings[t]), values(eval.embeddings[t]));
}

TEST(Forward, DropoutNeedsRngWhenTraining) {
  const BMHGraph g = random_graph(22);
  ModelConfig cfg = small_config(1);
  cfg.dropout = 0.5;
  Rng rng(1);
  const DhanEncoder enc(cfg, g, rng);
  Tape tape;
  ForwardOptions opt;
  opt.training = true;
  EXPECT_THROW(enc.forward(tape, g, opt), Error);
}

TEST(Forward, ConfigShapeMismatch) {
  const BMHGraph g = random_graph(30);
  testing::RandomGraphOptions wide;
  wide.feature_dim = 5;
  const BMHGraph other = random_graph(30, wide);
  const auto enc = random_encoder(g, small_config(2), 31);
  try {
    eval_forward(enc, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigShapeMismatch);
  }
  const auto nodual = random_encoder(g, small_config(2, Variant::NoDual), 32);
  ModelConfig full_cfg = nodual.config();
  full_cfg.variant = Variant::Full;
  const DhanEncoder mixed(full_cfg, nodual.params());
  try {
    eval_forward(mixed, g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigShapeMismatch);
  }
}

struct Setting {
  Variant variant;
  Ordering ordering;
  bool extra_residual;
};

class DenseOracle : public ::testing::TestWithParam<Setting> {};

TEST_P(DenseOracle, MatchesCsrForward) {
  const Setting s = GetParam();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    testing::RandomGraphOptions opt;
    opt.isolate_inter = seed % 2 == 0;
    const BMHGraph g = random_graph(100 + seed, opt);
    ModelConfig cfg = small_config(1 + seed % 2, s.variant, s.ordering);
    cfg.pf_l1_extra_residual = s.extra_residual;
    const auto enc = random_encoder(g, cfg, 200 + seed);
    const auto fr = eval_forward(enc, g);
    const auto ref = reference::forward(g, enc.config(), enc.params());
    for (std::size_t t = 0; t < 2; ++t) EXPECT_LT(max_abs_diff(fr.embeddings[t], ref[t]), 1e-9);
  }
}

INSTANTIATE_TEST_SUITE_P(
    Settings, DenseOracle,
    ::testing::Values(Setting{Variant::Full, Ordering::IntraThenInter, false},
                      Setting{Variant::Full, Ordering::IntraThenInter, true},
                      Setting{Variant::Full, Ordering::Inverted, false},
                      Setting{Variant::Full, Ordering::Parallel, false},
                      Setting{Variant::NoDual, Ordering::IntraThenInter, false},
                      Setting{Variant::NoHierarchy, Ordering::IntraThenInter, false},
                      Setting{Variant::NoGlobal, Ordering::IntraThenInter, false}));

TEST(Forward, RecordedWeightsAreNormalized) {
  for (Variant v : {Variant::Full, Variant::NoDual, Variant::NoHierarchy, Variant::NoGlobal}) {
    const BMHGraph g = random_graph(40 + static_cast<int>(v));
    const auto enc = random_encoder(g, small_config(2, v), 41);
    const auto fr = eval_forward(enc, g, true);
    const auto rep = testing::normalization_errors(fr);
    EXPECT_GT(rep.segments, 0u);
    EXPECT_LT(rep.attention, 1e-9);
    EXPECT_LT(rep.relation, 1e-9);
    EXPECT_LT(rep.coefficients, 1e-6);
  }
}

TEST(Forward, RecordsFollowStageOrder) {
  const BMHGraph g = random_graph(50);
  const auto enc = random_encoder(g, small_config(1), 51);
  const auto fr = eval_forward(enc, g, true);
  ASSERT_EQ(fr.fusion.size(), 4u);
  EXPECT_EQ(fr.fusion[0].stage, "intra");
  EXPECT_EQ(fr.fusion[0].target, NodeType::A);
  EXPECT_EQ(fr.fusion[3].stage, "inter");
  EXPECT_EQ(fr.fusion[3].target, NodeType::B);
  EXPECT_EQ(fr.attention.size(), 8u);
  EXPECT_GT(fr.fusion[0].smooth, 0.0);
  EXPECT_EQ(fr.fusion[0].global_weights.size(), 2u);
}

TEST(Forward, PermutationEquivariance) {
  Rng rng(60);
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    const BMHGraph g = random_graph(600 + trial);
    std::array<std::vector<std::uint32_t>, 2> perm{testing::random_permutation(g.num_nodes(NodeType::A), rng),
                                                   testing::random_permutation(g.num_nodes(NodeType::B), rng)};
    const BMHGraph pg = testing::permute_graph(g, perm);
    const auto enc = random_encoder(g, small_config(2), 700 + trial);
    const auto a = eval_forward(enc, g), b = eval_forward(enc, pg);
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t i = 0; i < perm[t].size(); ++i)
        for (std::size_t c = 0; c < 4; ++c)
          EXPECT_NEAR(a.embeddings[t](i, c), b.embeddings[t](perm[t][i], c), 1e-12);
  }
}

TEST(FusionModeOf, Variants) {
  EXPECT_EQ(fusion_mode(Variant::Full), FusionMode::GlobalLocal);
  EXPECT_EQ(fusion_mode(Variant::NoDual), FusionMode::GlobalLocal);
  EXPECT_EQ(fusion_mode(Variant::NoGlobal), FusionMode::LocalOnly);
  EXPECT_EQ(fusion_mode(Variant::NoHierarchy), FusionMode::Mean);
}

}  // namespace
}  // namespace dhan
