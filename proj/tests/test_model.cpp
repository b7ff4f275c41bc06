#include <cmath>
#include <vector>

#include "cnl/errors.hpp"
#include "cnl/model.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cnl;

namespace {

// Independent forward pass: explicit loops over the manifest slices, written
// without reuse of the library's layer walk.
std::vector<double> reference_forward(const ParamVector& params, const ModelArch& arch,
                                      const std::vector<double>& x) {
  std::vector<double> act = x;
  std::vector<std::size_t> dims;
  dims.push_back(arch.input_dim);
  for (std::size_t h : arch.hidden) dims.push_back(h);
  dims.push_back(arch.classes);
  for (std::size_t layer = 0; layer + 1 < dims.size(); ++layer) {
    const ManifestEntry& w = params.manifest[2 * layer];
    const ManifestEntry& b = params.manifest[2 * layer + 1];
    const double* wp = params.values.data() + w.offset;
    const double* bp = params.values.data() + b.offset;
    const std::size_t in = dims[layer];
    const std::size_t out = dims[layer + 1];
    std::vector<double> next(out);
    for (std::size_t o = 0; o < out; ++o) {
      double z = bp[o];
      for (std::size_t i = 0; i < in; ++i) z += act[i] * wp[i * out + o];
      next[o] = z;
    }
    const bool last = layer + 2 == dims.size();
    if (!last) {
      for (double& v : next) {
        v = arch.activation == Activation::relu ? (v > 0.0 ? v : 0.0) : std::tanh(v);
      }
    }
    act = std::move(next);
  }
  return act;
}

}  // namespace

TEST_CASE("manifest matches the layer structure") {
  const ModelArch arch{3, {5, 4}, 2, Activation::relu};
  const auto manifest = arch_manifest(arch);
  REQUIRE(manifest.size() == 6);
  CHECK(manifest[0].name == "layer0.weight");
  CHECK(manifest[0].shape == std::vector<std::size_t>{3, 5});
  CHECK(manifest[1].name == "layer0.bias");
  CHECK(manifest[1].shape == std::vector<std::size_t>{5});
  CHECK(manifest[4].name == "layer2.weight");
  CHECK(manifest[4].shape == std::vector<std::size_t>{4, 2});
  CHECK(manifest[5].shape == std::vector<std::size_t>{2});
  CHECK(param_count(arch) == 3 * 5 + 5 + 5 * 4 + 4 + 4 * 2 + 2);

  // No hidden layers: a single linear map.
  const ModelArch linear{4, {}, 3, Activation::tanh};
  const auto lin = arch_manifest(linear);
  REQUIRE(lin.size() == 2);
  CHECK(lin[0].shape == std::vector<std::size_t>{4, 3});
  CHECK(param_count(linear) == 4 * 3 + 3);
}

TEST_CASE("init is deterministic, bounded, and zeros biases") {
  const ModelArch arch{4, {9}, 3, Activation::relu};
  const ParamVector a = init_model(arch, 1234);
  const ParamVector b = init_model(arch, 1234);
  const ParamVector c = init_model(arch, 1235);
  REQUIRE(a.size() == param_count(arch));
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
  CHECK_NOTHROW(validate_params(a, arch));
  CHECK_NOTHROW(validate_manifest(a));

  // Weight magnitudes respect the fan-in bound; biases are exactly zero.
  const double bound0 = 1.0 / std::sqrt(4.0);
  const double bound1 = 1.0 / std::sqrt(9.0);
  for (std::size_t i = 0; i < 4 * 9; ++i) CHECK(std::abs(a.values[a.manifest[0].offset + i]) < bound0);
  for (std::size_t i = 0; i < 9; ++i) CHECK(a.values[a.manifest[1].offset + i] == 0.0);
  for (std::size_t i = 0; i < 9 * 3; ++i) CHECK(std::abs(a.values[a.manifest[2].offset + i]) < bound1);
  for (std::size_t i = 0; i < 3; ++i) CHECK(a.values[a.manifest[3].offset + i] == 0.0);

  // Some weight must be negative and some positive for a symmetric draw.
  bool neg = false, pos = false;
  for (std::size_t i = 0; i < 4 * 9; ++i) {
    const double v = a.values[a.manifest[0].offset + i];
    neg = neg || v < 0.0;
    pos = pos || v > 0.0;
  }
  CHECK(neg);
  CHECK(pos);
}

TEST_CASE("validate_params rejects foreign vectors") {
  const ModelArch arch{4, {9}, 3, Activation::relu};
  const ModelArch other{4, {8}, 3, Activation::relu};
  const ParamVector p = init_model(arch, 7);
  CHECK_THROWS_AS(validate_params(p, other), ConfigError);
  ParamVector truncated = p;
  truncated.values.pop_back();
  CHECK_THROWS_AS(validate_params(truncated, arch), ConfigError);
}

TEST_CASE("forward matches an independent loop implementation") {
  for (const auto act : {Activation::relu, Activation::tanh}) {
    const ModelArch arch{3, {7, 5}, 4, act};
    const ParamVector params = init_model(arch, 42);
    Rng rng(mix_seed(99, 1));
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<double> x(3);
      for (double& v : x) v = rng.uniform(-2.0, 2.0);
      std::vector<double> logits;
      forward_logits(params, arch, x.data(), logits);
      const std::vector<double> want = reference_forward(params, arch, x);
      REQUIRE(logits.size() == want.size());
      for (std::size_t i = 0; i < want.size(); ++i) {
        CHECK(testutil::rel_diff(logits[i], want[i]) < 1e-13);
      }
    }
  }
}

TEST_CASE("predict breaks logit ties toward the lowest class") {
  // All-zero parameters give identical logits for every class.
  const ModelArch arch{2, {}, 3, Activation::relu};
  ParamVector params;
  params.manifest = arch_manifest(arch);
  params.values.assign(param_count(arch), 0.0);
  DenseArray inputs({4, 2}, {1, 2, -1, 0, 3, 3, 0, 0});
  const auto preds = predict(params, inputs, arch);
  REQUIRE(preds.size() == 4);
  for (std::size_t p : preds) CHECK(p == 0);

  // Bias pushes class 2 ahead; prediction follows.
  params.values[params.manifest[1].offset + 2] = 1.0;
  const auto preds2 = predict(params, inputs, arch);
  for (std::size_t p : preds2) CHECK(p == 2);
}

TEST_CASE("evaluate_correctness flags exactly the agreeing rows") {
  const ModelArch arch{2, {}, 2, Activation::relu};
  ParamVector params;
  params.manifest = arch_manifest(arch);
  params.values.assign(param_count(arch), 0.0);
  // logits = (x0, x1): class 1 wins iff x1 > x0 (ties to class 0).
  params.values[0] = 1.0;  // w[0][0]
  params.values[3] = 1.0;  // w[1][1]
  SampleSet set;
  set.inputs = DenseArray({4, 2}, {2, 1, 1, 2, 0, 0, -1, 5});
  set.labels = {0, 1, 1, 0};
  const CorrectnessMask mask = evaluate_correctness(params, set, arch);
  REQUIRE(mask.size() == 4);
  CHECK(mask.flags[0] == 1);  // 2 > 1 -> class 0, label 0
  CHECK(mask.flags[1] == 1);  // class 1, label 1
  CHECK(mask.flags[2] == 0);  // tie -> class 0, label 1
  CHECK(mask.flags[3] == 0);  // class 1, label 0
}
