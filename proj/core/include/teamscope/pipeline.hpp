#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "teamscope/cognitive.hpp"
#include "teamscope/cooc.hpp"
#include "teamscope/corpus.hpp"
#include "teamscope/novelty.hpp"
#include "teamscope/regression.hpp"

namespace teamscope {

inline constexpr const char* kEngineVersion = "0.1.0";

// One config drives the whole run; every stochastic step derives its stream
// from `seed`, so reruns are reproducible by construction.
struct RunConfig {
  std::filesystem::path corpus;
  std::filesystem::path journals;
  std::optional<std::filesystem::path> labels;
  std::optional<std::filesystem::path> vectors;  // absent: fallback embedding
  std::filesystem::path out = "run_out";
  std::uint64_t seed = 42;
  int jobs = 0;  // 0 = hardware concurrency

  FilterConfig filter;
  int embed_dim = 64;

  CognitiveParams cognitive;
  double exploratory_q = 90.0;
  double exploitative_q = 50.0;
  std::size_t min_threshold_scores = 10;

  EntityKind entity_kind = EntityKind::journal;
  NullModelParams null_model;
  double partition_resolution = 1.0;

  double uzzi_q = 10.0;
  bool uzzi_mean = false;
  double lee_q = 10.0;
  WangParams wang;
  bool shibayama_mean = false;
  double shibayama_q = 90.0;

  std::optional<int> horizon;  // citation window for impact scores

  std::vector<std::string> fw_columns;  // empty: every indicator column
  int bins = 20;
  std::vector<RegressionSpec> models;                  // empty: bundled defaults
  std::vector<std::array<std::string, 3>> surfaces;    // empty: bundled default
  std::vector<std::string> correlogram_columns;        // empty: the FW columns
};

// JSON file; relative paths resolve against the config file's directory
RunConfig load_run_config(const std::filesystem::path& path);

// canonical echo used for digesting and the manifest
std::string run_config_to_json(const RunConfig& config);

struct StageReport {
  std::string name;
  bool skipped = false;
  std::int64_t rows = 0;
  double seconds = 0.0;
};

struct RunResult {
  int exit_code = 0;
  std::string error;  // empty on success
  std::vector<StageReport> stages;
};

// Executes ingest -> embed -> cooc -> cognitive -> novelty -> disruption ->
// normalize -> regress -> report. Stages whose inputs and outputs match the
// recorded stamps are skipped unless `force` or an upstream stage reran.
// A failing stage moves its partial outputs under failed/<stage>/ and aborts
// the run; manifest.json is written either way. A non-empty `until` stops
// after that stage (upstreams still run as needed).
RunResult run_pipeline(const RunConfig& config, bool force = false,
                       const std::string& until = {});

// stage names in execution order
const std::vector<std::string>& pipeline_stages();

}  // namespace teamscope
