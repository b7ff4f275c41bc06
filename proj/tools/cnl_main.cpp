#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "cnl/commands.hpp"
#include "cnl/config.hpp"
#include "cnl/errors.hpp"

namespace {

// --out beats CNL_OUT beats the config's output_dir.
void resolve_output_dir(cnl::ExperimentConfig& cfg, const std::string& out_flag) {
  if (!out_flag.empty()) {
    cfg.output_dir = out_flag;
    return;
  }
  const char* env = std::getenv("CNL_OUT");
  if (env != nullptr && env[0] != '\0') cfg.output_dir = env;
}

cnl::ExperimentConfig load(const std::string& config_path, const std::string& out_flag,
                           bool seed_override, std::int64_t seed) {
  cnl::ExperimentConfig cfg = cnl::load_config_file(config_path);
  resolve_output_dir(cfg, out_flag);
  if (seed_override) {
    if (seed < 0) throw cnl::ConfigError("--seed-override must be nonnegative");
    cfg.seeds = {static_cast<std::uint64_t>(seed)};
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gradient-similarity analysis and masked-update training on synthetic tasks"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_flag;
  std::string checkpoint_path;
  std::string run_dir;
  std::int64_t seed = -1;
  bool have_seed = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    if (needs_config) {
      cmd->add_option("--config", config_path, "experiment config (JSON)")->required();
    }
    cmd->add_option("--out", out_flag, "output directory (overrides config and CNL_OUT)");
    cmd->add_option_function<std::int64_t>(
           "--seed-override",
           [&](const std::int64_t& v) {
             seed = v;
             have_seed = true;
           },
           "replace the config's seed list with one seed");
  };

  CLI::App* split = app.add_subcommand("split", "pretrain and report mastered/injection counts");
  add_common(split, true);

  CLI::App* train = app.add_subcommand("train", "run the configured method per seed");
  add_common(train, true);

  CLI::App* analyze = app.add_subcommand("analyze", "similarity report for a checkpoint");
  add_common(analyze, true);
  analyze->add_option("--checkpoint", checkpoint_path, "checkpoint file")->required();

  CLI::App* curves = app.add_subcommand("curves", "collect run records into curve data");
  curves->add_option("--run-dir", run_dir, "directory holding seed*/ run records")->required();
  curves->add_option("--out", out_flag, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (split->parsed()) {
      cnl::cmd_split(load(config_path, out_flag, have_seed, seed));
    } else if (train->parsed()) {
      cnl::cmd_train(load(config_path, out_flag, have_seed, seed));
    } else if (analyze->parsed()) {
      cnl::cmd_analyze(load(config_path, out_flag, have_seed, seed), checkpoint_path);
    } else if (curves->parsed()) {
      cnl::cmd_curves(run_dir, out_flag);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cnl::exit_code_for(e);
  }
  return cnl::kExitOk;
}
