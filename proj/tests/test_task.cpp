#include <array>
#include <cstring>
#include <vector>

#include "cnl/autodiff.hpp"
#include "cnl/errors.hpp"
#include "cnl/harness.hpp"
#include "cnl/model.hpp"
#include "cnl/task.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cnl;

namespace {

std::vector<std::size_t> label_counts(const SampleSet& set, std::size_t classes) {
  std::vector<std::size_t> counts(classes, 0);
  for (std::size_t lbl : set.labels) counts[lbl]++;
  return counts;
}

}  // namespace

TEST_CASE("generation is deterministic in the spec and sensitive to the seed") {
  TaskSpec spec;
  spec.generator = Generator::gaussian_mixture;
  spec.n_samples = 120;
  spec.input_dim = 2;
  spec.classes = 3;
  spec.cluster_overlap = 0.3;
  spec.seed = 7;
  const SampleSet a = synth_dataset(spec);
  const SampleSet b = synth_dataset(spec);
  CHECK(a.labels == b.labels);
  CHECK(std::memcmp(a.inputs.data.data(), b.inputs.data.data(),
                    a.inputs.size() * sizeof(double)) == 0);
  spec.seed = 8;
  const SampleSet c = synth_dataset(spec);
  CHECK(a.inputs.data != c.inputs.data);
}

TEST_CASE("gaussian mixture balances labels exactly") {
  TaskSpec spec;
  spec.generator = Generator::gaussian_mixture;
  spec.n_samples = 121;  // not divisible by 3
  spec.input_dim = 4;
  spec.classes = 3;
  spec.cluster_overlap = 0.5;
  spec.seed = 9;
  const SampleSet set = synth_dataset(spec);
  CHECK_NOTHROW(validate_sample_set(set, 3));
  const auto counts = label_counts(set, 3);
  CHECK(counts[0] == 41);
  CHECK(counts[1] == 40);
  CHECK(counts[2] == 40);
}

TEST_CASE("xor bands stays near balance under label noise") {
  TaskSpec spec;
  spec.generator = Generator::xor_bands;
  spec.n_samples = 400;
  spec.input_dim = 2;
  spec.classes = 2;
  spec.cluster_overlap = 0.2;
  spec.seed = 11;
  const SampleSet set = synth_dataset(spec);
  CHECK_NOTHROW(validate_sample_set(set, 2));
  const auto counts = label_counts(set, 2);
  CHECK(counts[0] >= 160);  // within 10% of half
  CHECK(counts[1] >= 160);
}

TEST_CASE("zero overlap is cleanly learnable") {
  TaskSpec spec;
  spec.generator = Generator::gaussian_mixture;
  spec.n_samples = 150;
  spec.input_dim = 2;
  spec.classes = 3;
  spec.cluster_overlap = 0.0;
  spec.seed = 13;
  const SampleSet set = synth_dataset(spec);
  const ModelArch arch{2, {16}, 3, Activation::relu};
  const ParamVector params = pretrain_reference(spec, arch, 400, 13, 0.5);
  const CorrectnessMask mask = evaluate_correctness(params, set, arch);
  std::size_t right = 0;
  for (auto f : mask.flags) right += f;
  CHECK(right == set.size());
  // Everything mastered: carving out an injection set must fail loudly.
  CHECK_THROWS_AS(split_mastered_injection(params, set, arch), DegenerateError);
}

TEST_CASE("moderate overlap leaves both mastered and missed samples") {
  TaskSpec spec;
  spec.generator = Generator::gaussian_mixture;
  spec.n_samples = 600;
  spec.input_dim = 2;
  spec.classes = 3;
  spec.cluster_overlap = 0.3;
  spec.seed = 17;
  const SampleSet set = synth_dataset(spec);
  const ModelArch arch{2, {32}, 3, Activation::relu};
  const PretrainConfig pre;
  const ParamVector params = pretrain_reference(spec, arch, pre.epochs, 17, pre.eta);
  const CorrectnessMask mask = evaluate_correctness(params, set, arch);
  std::size_t right = 0;
  for (auto f : mask.flags) right += f;
  const double acc = static_cast<double>(right) / static_cast<double>(set.size());
  CHECK(acc > 0.2);
  CHECK(acc < 0.95);
}

TEST_CASE("xor bands defeats a linear model but not a hidden layer") {
  TaskSpec spec;
  spec.generator = Generator::xor_bands;
  spec.n_samples = 300;
  spec.input_dim = 2;
  spec.classes = 2;
  spec.cluster_overlap = 0.0;
  spec.seed = 19;
  const SampleSet set = synth_dataset(spec);

  const ModelArch linear{2, {}, 2, Activation::relu};
  const ParamVector lin = pretrain_reference(spec, linear, 400, 19, 0.5);
  const CorrectnessMask lin_mask = evaluate_correctness(lin, set, linear);
  std::size_t lin_right = 0;
  for (auto f : lin_mask.flags) lin_right += f;

  const ModelArch mlp{2, {16}, 2, Activation::tanh};
  const ParamVector net = pretrain_reference(spec, mlp, 400, 19, 0.5);
  const CorrectnessMask net_mask = evaluate_correctness(net, set, mlp);
  std::size_t net_right = 0;
  for (auto f : net_mask.flags) net_right += f;

  CHECK(lin_right < set.size() * 7 / 10);  // stuck near chance on a checkerboard
  CHECK(net_right > set.size() * 8 / 10);
}

TEST_CASE("merged specs validate their sub-tasks") {
  TaskSpec sub1;
  sub1.generator = Generator::gaussian_mixture;
  sub1.n_samples = 50;
  sub1.input_dim = 2;
  sub1.classes = 2;
  sub1.seed = 1;
  TaskSpec sub2 = sub1;
  sub2.generator = Generator::xor_bands;
  sub2.classes = 3;
  sub2.seed = 2;

  TaskSpec merged;
  merged.generator = Generator::merged;
  merged.sub_tasks = {sub1, sub2};
  CHECK_NOTHROW(validate_task(merged));
  CHECK(merged.effective_classes() == 3);
  CHECK(merged.effective_samples() == 100);

  TaskSpec lone = merged;
  lone.sub_tasks = {sub1};
  CHECK_THROWS_AS(validate_task(lone), ConfigError);

  TaskSpec nested = merged;
  nested.sub_tasks[0] = merged;
  CHECK_THROWS_AS(validate_task(nested), ConfigError);

  TaskSpec mismatched = merged;
  mismatched.sub_tasks[1].input_dim = 5;
  CHECK_THROWS_AS(validate_task(mismatched), ConfigError);

  TaskSpec plain_with_subs = sub1;
  plain_with_subs.sub_tasks = {sub2};
  CHECK_THROWS_AS(validate_task(plain_with_subs), ConfigError);
}

TEST_CASE("merged sets concatenate sub-task rows in order") {
  TaskSpec sub1;
  sub1.generator = Generator::gaussian_mixture;
  sub1.n_samples = 40;
  sub1.input_dim = 2;
  sub1.classes = 2;
  sub1.cluster_overlap = 0.1;
  sub1.seed = 31;
  TaskSpec sub2 = sub1;
  sub2.n_samples = 25;
  sub2.seed = 32;
  TaskSpec sub3 = sub1;
  sub3.generator = Generator::xor_bands;
  sub3.n_samples = 35;
  sub3.classes = 3;
  sub3.seed = 33;

  TaskSpec merged;
  merged.generator = Generator::merged;
  merged.sub_tasks = {sub1, sub2, sub3};

  const SampleSet whole = synth_dataset(merged);
  REQUIRE(whole.size() == 100);
  CHECK_NOTHROW(validate_sample_set(whole, merged.effective_classes()));

  const auto segs = task_segments(merged);
  REQUIRE(segs.size() == 3);
  CHECK(segs[0] == std::pair<std::size_t, std::size_t>{0, 40});
  CHECK(segs[1] == std::pair<std::size_t, std::size_t>{40, 65});
  CHECK(segs[2] == std::pair<std::size_t, std::size_t>{65, 100});

  // Each segment is byte-identical to generating its sub-task alone.
  const std::array<const TaskSpec*, 3> subs{&sub1, &sub2, &sub3};
  for (std::size_t k = 0; k < 3; ++k) {
    const SampleSet alone = synth_dataset(*subs[k]);
    const auto [begin, end] = segs[k];
    for (std::size_t i = begin; i < end; ++i) {
      CHECK(whole.labels[i] == alone.labels[i - begin]);
      CHECK(std::memcmp(whole.inputs.row(i), alone.inputs.row(i - begin),
                        2 * sizeof(double)) == 0);
    }
  }

  // Single-generator specs report one covering segment.
  const auto solo = task_segments(sub1);
  REQUIRE(solo.size() == 1);
  CHECK(solo[0] == std::pair<std::size_t, std::size_t>{0, 40});
}

TEST_CASE("task validation rejects malformed fields") {
  TaskSpec spec;
  spec.generator = Generator::gaussian_mixture;
  spec.n_samples = 0;
  spec.input_dim = 2;
  spec.classes = 2;
  CHECK_THROWS_AS(validate_task(spec), ConfigError);
  spec.n_samples = 10;
  spec.classes = 1;
  CHECK_THROWS_AS(validate_task(spec), ConfigError);
  spec.classes = 2;
  spec.cluster_overlap = 1.5;
  CHECK_THROWS_AS(validate_task(spec), ConfigError);
  spec.cluster_overlap = 0.2;
  CHECK_NOTHROW(validate_task(spec));
}
