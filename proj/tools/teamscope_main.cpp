// teamscope: build indicator tables and regression artifacts from a document
// corpus, or generate synthetic corpora to exercise the pipeline.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "teamscope/errors.hpp"
#include "teamscope/pipeline.hpp"
#include "teamscope/synth.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> out;
  bool force = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool config_required = true) {
  auto* c = cmd->add_option("--config", opts.config, "JSON config file");
  if (config_required) c->required();
  cmd->add_option("--seed", opts.seed, "override the config seed");
  cmd->add_option("--jobs", opts.jobs, "worker threads (0 = hardware)");
  cmd->add_option("--out", opts.out, "override the output directory");
  cmd->add_flag("--force", opts.force, "ignore stamps and rerun everything");
}

int run_stages(const CommonOpts& opts, const std::string& until) {
  teamscope::RunConfig config = teamscope::load_run_config(opts.config);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.jobs) config.jobs = *opts.jobs;
  if (opts.out) config.out = *opts.out;
  teamscope::RunResult result = teamscope::run_pipeline(config, opts.force, until);
  for (const auto& s : result.stages)
    std::printf("%-10s %s rows=%lld seconds=%.3f\n", s.name.c_str(),
                s.skipped ? "skipped" : "ran    ", static_cast<long long>(s.rows), s.seconds);
  if (result.exit_code != 0) std::fprintf(stderr, "error: %s\n", result.error.c_str());
  return result.exit_code;
}

int run_synth(const CommonOpts& opts) {
  teamscope::SynthConfig config = teamscope::load_synth_config(opts.config);
  if (opts.seed) config.seed = *opts.seed;
  if (!opts.out) throw teamscope::ConfigError("synth needs --out");
  teamscope::generate_corpus(config, *opts.out);
  std::printf("synth: %d docs, %d authors, %d journals -> %s\n", config.n_docs,
              config.n_authors, config.n_journals, opts.out->c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scientometrics indicator engine"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string until;

  // one subcommand per pipeline stage, plus synth and the full run
  for (const auto& stage : teamscope::pipeline_stages()) {
    auto* cmd = app.add_subcommand(stage, "run the pipeline through the " + stage + " stage");
    add_common(cmd, opts);
    cmd->callback([&until, stage] { until = stage; });
  }
  auto* run_cmd = app.add_subcommand("run", "run the full pipeline");
  add_common(run_cmd, opts);
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  add_common(synth_cmd, opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return run_synth(opts);
    return run_stages(opts, until);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
