// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails. Arguments select a subset by number.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dense_reference.hpp"
#include "dhan/cli.hpp"
#include "dhan/gradcheck.hpp"
#include "dhan/metrics.hpp"
#include "dhan/synth.hpp"
#include "dhan/train.hpp"
#include "test_support.hpp"

namespace dhan {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

const Variant kVariants[] = {Variant::Full, Variant::NoDual, Variant::NoHierarchy, Variant::NoGlobal};
const Ordering kOrderings[] = {Ordering::IntraThenInter, Ordering::Inverted, Ordering::Parallel};

DhanEncoder random_encoder(const BMHGraph& g, const ModelConfig& cfg, std::uint64_t seed) {
  Rng rng(seed);
  DhanEncoder enc(cfg, g, rng);
  testing::perturb_params(enc.params(), rng);
  return enc;
}

ModelConfig small_model(std::size_t trial) {
  ModelConfig cfg;
  cfg.hidden_dim = 4;
  cfg.layers = 1 + trial % 2;
  cfg.dropout = 0.0;
  cfg.variant = kVariants[trial % 4];
  cfg.ordering = cfg.variant == Variant::NoDual ? Ordering::IntraThenInter : kOrderings[(trial / 4) % 3];
  cfg.pf_l1_extra_residual = trial % 5 == 3;
  cfg.lambda_intra = 0.3;
  cfg.lambda_inter = 0.6;
  return cfg;
}

ForwardResult eval_forward(const DhanEncoder& enc, const BMHGraph& g, bool record) {
  Tape tape;
  ForwardOptions opt;
  opt.record = record;
  return enc.forward(tape, g, opt);
}

Outcome gradient_suite() {
  const auto start = Clock::now();
  const GradcheckReport rep = gradcheck_suite(0, 1e-5);
  const double secs = seconds_since(start);
  return {rep.worst.rel_error < 1e-3 && secs < 60.0,
          fmt("max_rel_error=%.3g over %zu entries in %zu settings, %.1fs (worst %s:%s)",
              rep.worst.rel_error, rep.checked, rep.settings.size(), secs,
              rep.worst.setting.c_str(), rep.worst.parameter.c_str())};
}

Outcome normalization() {
  double attention = 0.0, relation = 0.0, coefficients = 0.0;
  std::size_t segments = 0, rows = 0;
  for (std::size_t trial = 0; trial < 100; ++trial) {
    testing::RandomGraphOptions opt;
    opt.isolate_inter = trial % 3 == 0;
    const BMHGraph g = testing::random_graph(1000 + trial, opt);
    const auto enc = random_encoder(g, small_model(trial), 2000 + trial);
    const auto rep = testing::normalization_errors(eval_forward(enc, g, true));
    attention = std::max(attention, rep.attention);
    relation = std::max(relation, rep.relation);
    coefficients = std::max(coefficients, rep.coefficients);
    segments += rep.segments;
    rows += rep.rows;
  }
  return {attention <= 1e-9 && relation <= 1e-9 && coefficients <= 1e-6,
          fmt("node-level %.2g over %zu segments, relation-level %.2g, coefficients %.2g over %zu rows",
              attention, segments, relation, coefficients, rows)};
}

Outcome dense_oracle() {
  double worst = 0.0;
  for (std::size_t trial = 0; trial < 50; ++trial) {
    testing::RandomGraphOptions opt;
    opt.isolate_inter = trial % 2 == 0;
    const BMHGraph g = testing::random_graph(3000 + trial, opt);
    const auto enc = random_encoder(g, small_model(trial), 4000 + trial);
    const auto fr = eval_forward(enc, g, false);
    const auto ref = reference::forward(g, enc.config(), enc.params());
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t i = 0; i < fr.embeddings[t].rows(); ++i)
        for (std::size_t j = 0; j < fr.embeddings[t].cols(); ++j)
          worst = std::max(worst, std::abs(fr.embeddings[t](i, j) - ref[t][i][j]));
  }
  return {worst <= 1e-9, fmt("max |csr - dense| = %.3g over 50 graphs", worst)};
}

Outcome permutation() {
  Rng rng(5000);
  double worst = 0.0;
  for (std::size_t trial = 0; trial < 20; ++trial) {
    const BMHGraph g = testing::random_graph(6000 + trial);
    const std::array<std::vector<std::uint32_t>, 2> perm{
        testing::random_permutation(g.num_nodes(NodeType::A), rng),
        testing::random_permutation(g.num_nodes(NodeType::B), rng)};
    const BMHGraph pg = testing::permute_graph(g, perm);
    ModelConfig cfg = small_model(trial);
    cfg.layers = 2;
    const auto enc = random_encoder(g, cfg, 7000 + trial);
    const auto a = eval_forward(enc, g, false), b = eval_forward(enc, pg, false);
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t i = 0; i < perm[t].size(); ++i)
        for (std::size_t c = 0; c < cfg.hidden_dim; ++c)
          worst = std::max(worst, std::abs(a.embeddings[t](i, c) - b.embeddings[t](perm[t][i], c)));
  }
  return {worst <= 1e-12, fmt("max deviation %.3g over 20 trials", worst)};
}

double venue_accuracy(const Dataset& ds, const ModelConfig& cfg) {
  const TrainResult res = train(ds, cfg);
  const SplitReport rep = evaluate(res.model, ds, embed(res.model, ds.graph), Split::Test);
  for (const auto& [name, m] : rep.tasks)
    if (name == "pv") return m.acc;
  return 0.0;
}

Outcome learnability() {
  std::string detail;
  bool pass = true;
  double slowest = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig sc;
    sc.seed = seed;
    const Dataset ds = generate(sc);
    ModelConfig mc;
    mc.seed = seed;
    const auto start = Clock::now();
    const double acc = venue_accuracy(ds, mc);
    const double secs = seconds_since(start);
    slowest = std::max(slowest, secs);

    Dataset control = ds;
    auto& labels = control.tasks[0].labels;
    Rng rng(derive_seed(seed, seed_stream::kControl));
    for (std::size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[uniform_index(rng, i)]);
    const double control_acc = venue_accuracy(control, mc);

    pass = pass && acc >= 0.9 && control_acc <= 0.35 && secs < 300.0;
    detail += fmt("seed %llu acc=%.4f control=%.4f %.0fs; ", static_cast<unsigned long long>(seed), acc,
                  control_acc, secs);
  }
  return {pass, detail + fmt("slowest %.0fs", slowest)};
}

// Planted dataset for the ablation: noisy features, sparse informative
// relations diluted by random ones, and a larger validation period.
SynthConfig ablation_synth() {
  SynthConfig sc;
  sc.n_papers = 1200;
  sc.n_authors = 600;
  sc.noise = 8.0;
  sc.same_venue_in = 0.01;
  sc.cite_in = 0.005;
  sc.cite_out = 0.002;
  sc.same_field_in = 0.01;
  sc.noise_relations = 16;
  sc.noise_relation_p = 0.01;
  sc.train_years = 4;
  sc.val_years = 4;
  sc.seed = 1;
  return sc;
}

Outcome ablation() {
  const Dataset ds = generate(ablation_synth());
  const Variant order[] = {Variant::Full, Variant::NoGlobal, Variant::NoHierarchy};
  std::array<std::vector<double>, 3> val;
  for (std::size_t v = 0; v < 3; ++v)
    for (std::uint64_t s = 0; s < 5; ++s) {
      ModelConfig mc;
      mc.hidden_dim = 32;
      mc.tasks = {"pv"};
      mc.variant = order[v];
      mc.seed = 1 + s;
      val[v].push_back(train(ds, mc).best_val_ndcg);
    }
  auto mean = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) m += v;
    return m / static_cast<double>(x.size());
  };
  const double full = mean(val[0]), no_global = mean(val[1]), no_hier = mean(val[2]);
  std::size_t wins = 0;
  for (std::size_t s = 0; s < 5; ++s) wins += val[0][s] > val[2][s];
  const bool tie = no_global > full && no_global - full <= 0.005;
  const bool pass = (full >= no_global || tie) && no_global >= no_hier && wins == 5;
  double closest = 1.0;
  for (std::size_t s = 0; s < 5; ++s) closest = std::min(closest, val[0][s] - val[2][s]);
  std::string detail = fmt("val NDCG full=%.4f no-global=%.4f no-hier=%.4f; full>no-hier on %zu/5 seeds "
                           "(smallest margin %.4f)",
                           full, no_global, no_hier, wins, closest);
  if (tie) detail += fmt("; no-global ties full within 0.005 (%+.4f)", no_global - full);
  return {pass, detail};
}

Outcome metric_oracles() {
  using L = std::vector<std::uint32_t>;
  const double inv_log3 = 1.0 / std::log2(3.0);
  const std::vector<std::pair<double, double>> cases{
      {ndcg({{0.9, 0.8, 0.1}, {1, 1, 0}}), 1.0},
      {ndcg({{0.2, 0.9, 0.1}, {1, 0, 0}}), inv_log3},
      {ndcg({{0.9, 0.3, 0.2, 0.1}, {1, 0, 0, 0}}), 1.0},
      {ndcg({{3, 2, 1}, {1, 0, 1}}), 1.5 / (1.0 + inv_log3)},
      {mrr({{0.9, 0.1}, {1, 0}}), 1.0},
      {mrr({{4, 3, 2, 1}, {0, 0, 0, 1}}), 0.25},
      {mean_mrr(std::vector<RankingInstance>{{{2, 1}, {1, 0}}, {{2, 1}, {0, 1}}}), 0.75},
      {accuracy(L{1, 2, 3}, L{1, 2, 3}), 1.0},
      {accuracy(L{1, 2, 3}, L{0, 0, 0}), 0.0},
      {accuracy(L{1, 2, 3, 4}, L{1, 2, 3, 0}), 0.75},
      {nmi(L{0, 0, 1, 1, 2}, L{2, 2, 0, 0, 1}), 1.0},
      {ari(L{0, 0, 1, 1, 2}, L{2, 2, 0, 0, 1}), 1.0},
      {ari(L{3, 3, 3, 3}, L{0, 1, 0, 2}), 0.0},
      {ari(L{0, 0, 1, 1}, L{0, 1, 0, 1}), -0.5},
      {ari(L{0, 0, 0, 1, 1, 1}, L{0, 0, 1, 1, 2, 2}), 8.0 / 33.0},
  };
  std::size_t exact = 0;
  double worst = 0.0;
  for (const auto& [got, want] : cases) {
    exact += got == want;
    worst = std::max(worst, std::abs(got - want));
  }
  // Closed forms that go through logarithms are compared to one ulp-scale bound.
  const double nmi_six = nmi(L{0, 0, 0, 1, 1, 1}, L{0, 0, 1, 1, 2, 2});
  const double nmi_want = (4.0 / 3.0) * std::log(2.0) / (std::log(2.0) + std::log(3.0));
  const double nmi_err = std::abs(nmi_six - nmi_want);
  return {exact == cases.size() && nmi_err <= 1e-15,
          fmt("%zu/%zu exact (worst %.3g), nmi closed form off by %.3g", exact, cases.size(), worst, nmi_err)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  testing::TempDir dir("acceptance_det");
  const auto cfg = dir.path() / "run.json";
  std::ofstream(cfg) << R"({"model": {"hidden_dim": 32, "epochs": 20, "dropout": 0.2}})";
  std::ostringstream out, err;
  for (const char* run : {"a", "b"}) {
    const std::vector<std::string> args{"train", "--config", cfg.string(), "--out",
                                        (dir.path() / run).string(), "--seed", "42"};
    if (run_cli(args, out, err) != 0) return {false, "train failed: " + err.str()};
  }
  const auto log_a = slurp(dir.path() / "a" / "train_log.jsonl");
  const auto ckpt_a = slurp(dir.path() / "a" / "checkpoint.bin");
  const bool logs = log_a == slurp(dir.path() / "b" / "train_log.jsonl");
  const bool ckpts = ckpt_a == slurp(dir.path() / "b" / "checkpoint.bin");
  return {logs && ckpts && !log_a.empty() && !ckpt_a.empty(),
          fmt("log %s (%zu bytes), checkpoint %s (%zu bytes)", logs ? "identical" : "differs",
              log_a.size(), ckpts ? "identical" : "differs", ckpt_a.size())};
}

bool same_neighbor_sets(const BMHGraph& a, const BMHGraph& b) {
  if (a.relations().size() != b.relations().size()) return false;
  for (std::uint32_t r = 0; r < a.relations().size(); ++r) {
    const auto& spec = a.relation(r);
    if (!(spec == b.relation(r))) return false;
    for (std::uint32_t i = 0; i < a.num_nodes(spec.src_type); ++i) {
      const auto x = a.neighbors(r, i), y = b.neighbors(r, i);
      if (std::set<std::uint32_t>(x.begin(), x.end()) != std::set<std::uint32_t>(y.begin(), y.end()))
        return false;
    }
  }
  return true;
}

Outcome round_trip() {
  std::size_t ok = 0;
  std::string first_failure;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthConfig sc;
    sc.n_papers = 80 + 20 * (seed % 5);
    sc.n_authors = 40 + 10 * (seed % 3);
    sc.feature_dim = 4 + seed % 4;
    sc.paper_meta_paths = seed % 2 == 1;
    sc.noise_relations = seed % 3;
    sc.seed = seed;
    const Dataset ds = generate(sc);
    testing::TempDir dir("acceptance_rt");
    export_dataset(ds, dir.path());
    const Dataset back = import_dataset(dir.path());
    const std::string diff = testing::dataset_diff(ds, back);
    const bool good = diff.empty() && same_neighbor_sets(ds.graph, back.graph);
    ok += good;
    if (!good && first_failure.empty()) first_failure = fmt(" (seed %llu: %s)", static_cast<unsigned long long>(seed),
                                                            diff.empty() ? "neighbor sets" : diff.c_str());
  }
  return {ok == 20, fmt("%zu/20 datasets identical after export and import", ok) + first_failure};
}

}  // namespace
}  // namespace dhan

int main(int argc, char** argv) {
  using namespace dhan;
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"gradient suite", gradient_suite},
      {"normalization invariants", normalization},
      {"dense oracle equivalence", dense_oracle},
      {"permutation equivariance", permutation},
      {"learnability", learnability},
      {"ablation ordering", ablation},
      {"metric oracles", metric_oracles},
      {"determinism", determinism},
      {"round trip", round_trip},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k + 1);
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.pass;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", id, criteria[k].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
