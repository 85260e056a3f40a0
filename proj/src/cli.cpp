#include "dhan/cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <ostream>

#include "dhan/checkpoint.hpp"
#include "dhan/config_io.hpp"
#include "dhan/error.hpp"
#include "dhan/export.hpp"
#include "dhan/gradcheck.hpp"
#include "dhan/kernels.hpp"
#include "dhan/metrics.hpp"
#include "dhan/synth.hpp"
#include "dhan/train.hpp"

namespace dhan {

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> variant;
  std::optional<std::string> ordering;
  bool literal_temperature = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool needs_out) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  auto* out = cmd->add_option("--out", f.out, "output directory");
  if (needs_out) out->required();
  cmd->add_option("--seed", f.seed, "seed for every random stream");
  cmd->add_option("--variant", f.variant, "full | no-dual | no-hier | no-global");
  cmd->add_option("--ordering", f.ordering, "standard | inverted | parallel");
  cmd->add_flag("--compat-literal-temperature", f.literal_temperature,
                "use the literal -sum y log(softmax(z)/T) loss");
}

RunConfig resolve(const CommonFlags& f, bool prefer_saved) {
  RunConfig rc;
  if (!f.config.empty()) {
    rc = load_run_config(f.config);
  } else if (prefer_saved && !f.out.empty() && fs::exists(fs::path(f.out) / "config.json")) {
    rc = load_run_config(fs::path(f.out) / "config.json");
  }
  if (f.seed) {
    rc.model.seed = *f.seed;
    rc.synth.seed = *f.seed;
  }
  if (f.variant) rc.model.variant = parse_variant(*f.variant);
  if (f.ordering) rc.model.ordering = parse_ordering(*f.ordering);
  if (f.literal_temperature) rc.model.literal_temperature = true;
  rc.model.validate();
  return rc;
}

Dataset load_dataset(const RunConfig& rc) {
  return rc.dataset ? import_dataset(*rc.dataset) : generate(rc.synth);
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

Model load_model(const Dataset& ds, const RunConfig& rc, const fs::path& dir) {
  Model model = build_model(ds, rc.model);
  auto named = model.named(ds);
  load_checkpoint(dir / "checkpoint.bin", named);
  return model;
}

int cmd_generate(const CommonFlags& f, std::ostream& out) {
  const RunConfig rc = resolve(f, false);
  const Dataset ds = generate(rc.synth);
  export_dataset(ds, f.out);
  write_text(fs::path(f.out) / "config.json", run_config_json(rc));
  out << "generated " << ds.graph.num_nodes(NodeType::A) << " authors, "
      << ds.graph.num_nodes(NodeType::B) << " papers in " << f.out << "\n";
  return 0;
}

int cmd_train(const CommonFlags& f, std::ostream& out) {
  RunConfig rc = resolve(f, false);
  const Dataset ds = load_dataset(rc);
  const fs::path dir = f.out;
  ensure_dir(dir);
  std::ofstream log(dir / "train_log.jsonl", std::ios::binary);
  if (!log) throw Error(ErrorCode::IoFailure, "cannot write training log");
  TrainOptions opts;
  opts.on_epoch = [&](const TrainLogEntry& e) { log << log_line(e) << '\n'; };
  const TrainResult res = train(ds, rc.model, opts);
  log.close();
  rc.model = res.model.encoder.config();
  const auto named = res.model.named(ds);
  save_checkpoint(dir / "checkpoint.bin", named);
  write_text(dir / "config.json", run_config_json(rc));
  out << "best epoch " << res.best_epoch << " val_ndcg " << std::setprecision(6)
      << res.best_val_ndcg << " val_loss " << res.best_val_loss << "\n";
  return 0;
}

int cmd_eval(const CommonFlags& f, std::ostream& out) {
  const RunConfig rc = resolve(f, true);
  const Dataset ds = load_dataset(rc);
  const fs::path dir = f.out;
  const Model model = load_model(ds, rc, dir);
  const TypeEmbeddings emb = embed(model, ds.graph);
  const SplitReport test = evaluate(model, ds, emb, Split::Test);
  nlohmann::ordered_json report;
  for (const auto& [name, m] : test.tasks)
    report[name] = {{"ndcg", m.ndcg}, {"mrr", m.mrr}, {"acc", m.acc}};

  // Clustering of the first single-label task's nodes by their labels.
  for (const auto& t : ds.tasks) {
    if (t.kind != TaskKind::SingleLabel) continue;
    std::vector<std::uint32_t> nodes, labels;
    for (std::uint32_t i = 0; i < t.labels.size(); ++i)
      if (!t.labels[i].empty()) {
        nodes.push_back(i);
        labels.push_back(t.labels[i][0]);
      }
    const Tensor& e = emb[type_index(t.target)];
    Matrix pts(nodes.size(), e.cols());
    for (std::size_t r = 0; r < nodes.size(); ++r)
      for (std::size_t j = 0; j < e.cols(); ++j) pts(r, j) = e(nodes[r], j);
    const auto cl = kmeans_cluster_eval(pts, labels, t.num_classes, rc.cluster_repeats,
                                        derive_seed(rc.model.seed, seed_stream::kKMeans));
    report["clustering"] = {{"nmi_mean", cl.nmi_mean},
                            {"nmi_std", cl.nmi_std},
                            {"ari_mean", cl.ari_mean},
                            {"ari_std", cl.ari_std}};
    break;
  }
  write_text(dir / "eval_report.json", report.dump(2) + "\n");
  out << report.dump() << "\n";
  return 0;
}

int cmd_ablate(const CommonFlags& f, std::ostream& out) {
  const RunConfig rc = resolve(f, false);
  const Dataset ds = load_dataset(rc);
  const fs::path dir = f.out;
  ensure_dir(dir);
  const Variant variants[] = {Variant::Full, Variant::NoDual, Variant::NoHierarchy,
                              Variant::NoGlobal};
  std::ostringstream table, summary;
  table << "variant\tseed\tbest_epoch\tval_ndcg\ttest_ndcg\n";
  summary << "variant\tval_ndcg_mean\tval_ndcg_std\ttest_ndcg_mean\ttest_ndcg_std\n";
  table << std::setprecision(17);
  summary << std::setprecision(17);
  for (Variant v : variants) {
    std::vector<double> val, test;
    for (std::size_t s = 0; s < rc.ablation_seeds; ++s) {
      ModelConfig mc = rc.model;
      mc.variant = v;
      mc.seed = rc.model.seed + s;
      const TrainResult res = train(ds, mc);
      const TypeEmbeddings emb = embed(res.model, ds.graph);
      val.push_back(res.best_val_ndcg);
      test.push_back(evaluate(res.model, ds, emb, Split::Test).mean_ndcg);
      table << variant_name(v) << '\t' << mc.seed << '\t' << res.best_epoch << '\t' << val.back()
            << '\t' << test.back() << '\n';
    }
    auto stats = [](const std::vector<double>& x) {
      double m = 0.0, s = 0.0;
      for (double v : x) m += v;
      m /= static_cast<double>(x.size());
      for (double v : x) s += (v - m) * (v - m);
      return std::pair{m, std::sqrt(s / static_cast<double>(x.size()))};
    };
    const auto [vm, vs] = stats(val);
    const auto [tm, ts] = stats(test);
    summary << variant_name(v) << '\t' << vm << '\t' << vs << '\t' << tm << '\t' << ts << '\n';
  }
  write_text(dir / "ablation.tsv", table.str());
  write_text(dir / "ablation_summary.tsv", summary.str());
  out << summary.str();
  return 0;
}

int cmd_gradcheck(const CommonFlags& f, std::ostream& out) {
  const std::uint64_t seed = f.seed.value_or(0);
  const GradcheckReport rep = gradcheck_suite(seed);
  out << "max_rel_error " << std::setprecision(6) << rep.worst.rel_error << " checked "
      << rep.checked << " worst " << rep.worst.setting << ":" << rep.worst.parameter << "["
      << rep.worst.element << "]\n";
  return rep.worst.rel_error < 1e-3 ? 0 : 1;
}

int cmd_export(const CommonFlags& f, std::ostream& out, bool attention) {
  const RunConfig rc = resolve(f, true);
  const Dataset ds = load_dataset(rc);
  const fs::path dir = f.out;
  const Model model = load_model(ds, rc, dir);
  if (attention) {
    Tape tape;
    ForwardOptions fo;
    fo.record = true;
    write_attention(model.encoder.forward(tape, ds.graph, fo), dir);
    out << "wrote " << (dir / "attention.tsv").string() << "\n";
  } else {
    write_embeddings(embed(model, ds.graph), dir);
    out << "wrote " << (dir / "embeddings.tsv").string() << "\n";
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dual hierarchical attention networks on bi-typed heterogeneous graphs", "dhan"};
  app.require_subcommand(1);
  CommonFlags flags;
  struct Cmd {
    const char* name;
    const char* help;
    bool needs_out;
  };
  const Cmd cmds[] = {
      {"generate", "write a synthetic dataset", true},
      {"train", "train a model and write checkpoint and log", true},
      {"eval", "evaluate a trained checkpoint on the test split", true},
      {"ablate", "train every variant over several seeds", true},
      {"gradcheck", "compare analytic and finite-difference gradients", false},
      {"export-attn", "write learned attention weights", true},
      {"export-emb", "write embeddings and their PCA projection", true},
  };
  for (const auto& c : cmds) add_common(app.add_subcommand(c.name, c.help), flags, c.needs_out);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return 2;
  }

  try {
    kernels::configure_threads_from_env();
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "generate") return cmd_generate(flags, out);
    if (cmd == "train") return cmd_train(flags, out);
    if (cmd == "eval") return cmd_eval(flags, out);
    if (cmd == "ablate") return cmd_ablate(flags, out);
    if (cmd == "gradcheck") return cmd_gradcheck(flags, out);
    if (cmd == "export-attn") return cmd_export(flags, out, true);
    return cmd_export(flags, out, false);
  } catch (const Error& e) {
    err << "error: code=" << error_code_name(e.code()) << " message=" << std::quoted(e.what())
        << "\n";
  } catch (const std::exception& e) {
    err << "error: code=Internal message=" << std::quoted(e.what()) << "\n";
  }
  return 1;
}

}  // namespace dhan
