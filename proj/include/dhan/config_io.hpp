#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "dhan/config.hpp"
#include "dhan/synth.hpp"

namespace dhan {

// Everything a command reads from --config. All sections are optional and
// unknown keys are rejected.
//   {"model": {...ModelConfig...}, "synth": {...SynthConfig...},
//    "dataset": "<dir of TSV files>", "ablation_seeds": 5, "cluster_repeats": 10}
// Without "dataset" the commands generate the data from "synth".
struct RunConfig {
  ModelConfig model;
  SynthConfig synth;
  std::optional<std::filesystem::path> dataset;
  std::size_t ablation_seeds = 5;
  std::size_t cluster_repeats = 10;
};

RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string run_config_json(const RunConfig& config);

}  // namespace dhan
