#pragma once

#include "cnl/types.hpp"

namespace cnl {

enum class Generator { gaussian_mixture, xor_bands, merged };

struct TaskSpec {
  Generator generator = Generator::gaussian_mixture;
  std::size_t n_samples = 0;
  std::size_t input_dim = 0;
  std::size_t classes = 2;
  double cluster_overlap = 0.0;  // 0 = separable, grows toward chance level
  std::uint64_t seed = 0;
  std::vector<TaskSpec> sub_tasks;  // merged only

  // Class count of the generated set (max over sub-tasks when merged).
  std::size_t effective_classes() const;
  std::size_t effective_samples() const;
};

void validate_task(const TaskSpec& spec);

// Deterministic in the spec.  Labels are balanced: exact round-robin counts
// for the cluster generators, within noise for xor_bands label flips.
SampleSet synth_dataset(const TaskSpec& spec);

// Per-sub-task [begin, end) row ranges in the concatenated merged set.
// Single-generator specs report one segment covering everything.
std::vector<std::pair<std::size_t, std::size_t>> task_segments(const TaskSpec& spec);

}  // namespace cnl
