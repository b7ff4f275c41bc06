#pragma once

#include "cnl/config.hpp"
#include "cnl/gradsim.hpp"
#include "cnl/optimizer.hpp"
#include "cnl/task.hpp"
#include "cnl/types.hpp"

namespace cnl {

// Partition of a source set by prediction correctness at fixed parameters.
// Indices point into the source set's rows.
struct SplitResult {
  SampleSet mastered;
  SampleSet injection;
  std::vector<std::size_t> mastered_indices;
  std::vector<std::size_t> injection_indices;
};

struct EpochStat {
  std::size_t epoch = 0;  // 0 = before any update
  double loss_injection = 0.0;
  double loss_mastered = 0.0;
  std::size_t learned = 0;
  std::size_t forgot = 0;
};

struct RunRecord {
  std::vector<EpochStat> per_epoch;  // epochs 0..N inclusive
  std::size_t learned = 0;
  std::size_t forgot = 0;
  double learned_pct = 0.0;
  double forgot_pct = 0.0;
  std::size_t eval_injection_size = 0;
  std::size_t eval_mastered_size = 0;
  // Final-state flags aligned with the eval-subset positions.
  std::vector<std::uint8_t> learned_flags;
  std::vector<std::uint8_t> forgot_flags;
  std::vector<StepDiagnostics> diagnostics;
  std::string diagnostics_path;  // filled in when persisted
  double resolved_eta = 0.0;
};

SampleSet subset(const SampleSet& set, const std::vector<std::size_t>& indices);

// Plain sgd on the whole set for a fixed epoch budget (one full-batch step
// per epoch).  Appends the post-step loss to *loss_trace when given.
ParamVector pretrain_reference(const TaskSpec& spec, const ModelArch& arch, std::size_t epochs,
                               std::uint64_t seed, double eta = PretrainConfig{}.eta,
                               std::vector<double>* loss_trace = nullptr);

// Splits by correctness at `params`.  Throws DegenerateError naming the side
// that came out empty.
SplitResult split_mastered_injection(const ParamVector& params, const SampleSet& set,
                                     const ModelArch& arch);

// Deterministic shuffle, then cut: train gets clamp(floor(ratio*n + 0.5),
// 1, n-1) indices, eval the rest.  Needs at least 2 indices.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out_of_set_split(
    const std::vector<std::size_t>& indices, double ratio, std::uint64_t seed);

// learned = newly correct injection samples, forgot = newly incorrect
// mastered samples; both masks are aligned with the split's source set.
std::pair<std::size_t, std::size_t> measure_learning_forgetting(const CorrectnessMask& before,
                                                                const CorrectnessMask& after,
                                                                const SplitResult& split);

struct GroupForgetting {
  std::size_t size = 0;
  std::size_t forgot = 0;
  double rate = 0.0;
};

struct GroupForgettingTable {
  GroupForgetting sim;
  GroupForgetting middle;
  GroupForgetting dissim;
  GroupForgetting excluded;
};

// forgot_flags[k] refers to the same position k the group indices do.
GroupForgettingTable forgetting_by_group(const SimGroupAssignment& groups,
                                         const std::vector<std::uint8_t>& forgot_flags);

// Runs one (seed, method) arm from the pre-trained parameters.  The split
// must come from those parameters over the full task set.  Derives the
// protocol subsets, resolves eta when the config asks for auto, and records
// per-epoch metrics plus per-step diagnostics.
std::pair<ParamVector, RunRecord> train(const ExperimentConfig& cfg, std::uint64_t seed,
                                        const ParamVector& start, const SampleSet& source,
                                        const SplitResult& split);

// eta such that the first step's sup-norm displacement is kSmallEtaScale,
// bounded by kSmallEtaScale / ||gI||_inf.
double resolve_auto_eta(const OptimizerConfig& opt, const ParamVector& start,
                        const SampleSet& train_injection, const ModelArch& arch);

inline constexpr double kSmallEtaScale = 1e-4;
inline constexpr double kEvalSplitRatio = 0.5;

}  // namespace cnl
