#include "dhan/config_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dhan/error.hpp"

namespace dhan {

using Json = nlohmann::ordered_json;

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::NoDual: return "no-dual";
    case Variant::NoHierarchy: return "no-hier";
    case Variant::NoGlobal: return "no-global";
  }
  return "?";
}

Variant parse_variant(std::string_view text) {
  for (Variant v : {Variant::Full, Variant::NoDual, Variant::NoHierarchy, Variant::NoGlobal})
    if (variant_name(v) == text) return v;
  throw Error(ErrorCode::InvalidArgument, "unknown variant '" + std::string(text) + "'");
}

std::string_view ordering_name(Ordering o) {
  switch (o) {
    case Ordering::IntraThenInter: return "standard";
    case Ordering::Inverted: return "inverted";
    case Ordering::Parallel: return "parallel";
  }
  return "?";
}

Ordering parse_ordering(std::string_view text) {
  for (Ordering o : {Ordering::IntraThenInter, Ordering::Inverted, Ordering::Parallel})
    if (ordering_name(o) == text) return o;
  throw Error(ErrorCode::InvalidArgument, "unknown ordering '" + std::string(text) + "'");
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidArgument, msg); };
  if (hidden_dim < 2) fail("hidden_dim must be at least 2");
  if (!(dropout >= 0.0 && dropout < 1.0)) fail("dropout must lie in [0, 1)");
  if (!(temperature > 0.0)) fail("temperature must be positive");
  if (!(lambda_intra >= 0.0 && lambda_intra <= 1.0) ||
      !(lambda_inter >= 0.0 && lambda_inter <= 1.0))
    fail("residual weights must lie in [0, 1]");
  if (!(slope >= 0.0)) fail("slope must be non-negative");
  if (!(weight_decay >= 0.0)) fail("weight_decay must be non-negative");
  if (!(lr_max >= 0.0) || !(lr_min >= 0.0) || lr_min > lr_max)
    fail("need 0 <= lr_min <= lr_max");
  if (link_negatives == 0) fail("link_negatives must be positive");
}

namespace {

// Reads known keys into fields and rejects everything else.
class Reader {
 public:
  Reader(const Json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object())
      throw Error(ErrorCode::ParseError, "config section '" + section_ + "' must be an object");
  }

  template <typename T>
  void get(const char* key, T& field) {
    seen_.push_back(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      field = it->template get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, section_ + "." + key + ": " + e.what());
    }
  }

  template <typename T, typename Parse>
  void get_enum(const char* key, T& field, Parse parse) {
    std::string text;
    const bool present = j_.contains(key);
    get(key, text);
    if (present) field = parse(text);
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (std::find(seen_.begin(), seen_.end(), key) == seen_.end())
        throw Error(ErrorCode::ParseError, "unknown config key '" + section_ + "." + key + "'");
  }

 private:
  const Json& j_;
  std::string section_;
  std::vector<std::string> seen_;
};

void read_model(const Json& j, ModelConfig& m) {
  Reader r(j, "model");
  r.get("input_dim", m.input_dim);
  r.get("hidden_dim", m.hidden_dim);
  r.get("layers", m.layers);
  r.get("dropout", m.dropout);
  r.get("temperature", m.temperature);
  r.get("lambda_intra", m.lambda_intra);
  r.get("lambda_inter", m.lambda_inter);
  r.get("slope", m.slope);
  r.get("weight_decay", m.weight_decay);
  r.get("lr_max", m.lr_max);
  r.get("lr_min", m.lr_min);
  r.get("epochs", m.epochs);
  r.get("seed", m.seed);
  r.get_enum("variant", m.variant, parse_variant);
  r.get_enum("ordering", m.ordering, parse_ordering);
  r.get("pf_l1_extra_residual", m.pf_l1_extra_residual);
  r.get("literal_temperature", m.literal_temperature);
  r.get("link_negatives", m.link_negatives);
  r.get("tasks", m.tasks);
  r.finish();
}

Json write_model(const ModelConfig& m) {
  Json j;
  j["input_dim"] = m.input_dim;
  j["hidden_dim"] = m.hidden_dim;
  j["layers"] = m.layers;
  j["dropout"] = m.dropout;
  j["temperature"] = m.temperature;
  j["lambda_intra"] = m.lambda_intra;
  j["lambda_inter"] = m.lambda_inter;
  j["slope"] = m.slope;
  j["weight_decay"] = m.weight_decay;
  j["lr_max"] = m.lr_max;
  j["lr_min"] = m.lr_min;
  j["epochs"] = m.epochs;
  j["seed"] = m.seed;
  j["variant"] = variant_name(m.variant);
  j["ordering"] = ordering_name(m.ordering);
  j["pf_l1_extra_residual"] = m.pf_l1_extra_residual;
  j["literal_temperature"] = m.literal_temperature;
  j["link_negatives"] = m.link_negatives;
  j["tasks"] = m.tasks;
  return j;
}

#define DHAN_SYNTH_FIELDS(X)                                                                 \
  X(n_papers) X(n_authors) X(n_venues) X(n_fields_l1) X(n_fields_l2) X(feature_dim)          \
  X(venue_signal) X(field_signal) X(noise) X(cite_in) X(cite_out) X(same_venue_in)           \
  X(same_venue_out) X(same_field_in) X(same_field_out) X(colleague_in) X(colleague_out)      \
  X(noise_relations) X(noise_relation_p) X(paper_meta_paths) X(author_affinity)              \
  X(min_authors_per_paper) X(max_authors_per_paper) X(primary_field_affinity)                \
  X(secondary_field_p) X(n_years) X(train_years) X(val_years) X(name_group_size)             \
  X(ad_author_fraction) X(ad_holdout) X(seed)

void read_synth(const Json& j, SynthConfig& s) {
  Reader r(j, "synth");
#define X(name) r.get(#name, s.name);
  DHAN_SYNTH_FIELDS(X)
#undef X
  r.finish();
}

Json write_synth(const SynthConfig& s) {
  Json j;
#define X(name) j[#name] = s.name;
  DHAN_SYNTH_FIELDS(X)
#undef X
  return j;
}

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  RunConfig rc;
  Reader r(j, "config");
  if (j.contains("model")) read_model(j["model"], rc.model);
  if (j.contains("synth")) read_synth(j["synth"], rc.synth);
  Json unused;
  r.get("model", unused);
  r.get("synth", unused);
  std::string dataset;
  if (j.contains("dataset")) {
    r.get("dataset", dataset);
    rc.dataset = dataset;
  }
  r.get("dataset", dataset);
  r.get("ablation_seeds", rc.ablation_seeds);
  r.get("cluster_repeats", rc.cluster_repeats);
  r.finish();
  rc.model.validate();
  rc.synth.validate();
  if (rc.ablation_seeds == 0 || rc.cluster_repeats == 0)
    throw Error(ErrorCode::InvalidArgument, "ablation_seeds and cluster_repeats must be positive");
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig rc = parse_run_config(ss.str());
  if (rc.dataset && rc.dataset->is_relative()) rc.dataset = path.parent_path() / *rc.dataset;
  return rc;
}

std::string run_config_json(const RunConfig& rc) {
  Json j;
  j["model"] = write_model(rc.model);
  j["synth"] = write_synth(rc.synth);
  if (rc.dataset) j["dataset"] = rc.dataset->string();
  j["ablation_seeds"] = rc.ablation_seeds;
  j["cluster_repeats"] = rc.cluster_repeats;
  return j.dump(2) + "\n";
}

}  // namespace dhan
