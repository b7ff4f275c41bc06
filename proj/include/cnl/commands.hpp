#pragma once

#include <string>

#include "cnl/config.hpp"

namespace cnl {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitNumerical = 4;
inline constexpr int kExitIo = 5;

// Maps the error taxonomy onto process exit codes.
int exit_code_for(const std::exception& e);

// Pretrains and splits per seed; writes <out>/split.csv with one row per
// (seed, task segment) plus a per-seed total.
void cmd_split(const ExperimentConfig& cfg);

// Runs the configured method for every seed.  Per (seed, arm) writes
// <out>/seed<k>/<ARM>.csv, <ARM>_steps.csv, <ARM>.json, and start/end
// checkpoints.  Reruns with the same config are byte-identical.
void cmd_train(const ExperimentConfig& cfg);

// Gradient-similarity report for a saved checkpoint against the configured
// task, plus the similarity-group forgetting table.  Writes
// <out>/analysis/gradsim.csv, groups.csv, analysis.json.
void cmd_analyze(const ExperimentConfig& cfg, const std::string& checkpoint_path);

// Collects RunRecord CSVs under run_dir into one long-format
// <out>/curves.csv with columns arm,optimizer,epoch,metric,value.
void cmd_curves(const std::string& run_dir, const std::string& out_dir);

}  // namespace cnl
