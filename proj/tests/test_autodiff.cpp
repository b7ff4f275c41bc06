#include <cmath>
#include <limits>

#include "cnl/autodiff.hpp"
#include "cnl/errors.hpp"
#include "cnl/model.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace cnl;

TEST_CASE("central-difference checker on a quadratic") {
  auto f = [](const std::vector<double>& x) {
    double acc = 0.0;
    for (double v : x) acc += 0.5 * v * v;
    return acc;
  };
  const std::vector<double> at = {1.0, -2.0, 0.25, 3.5};
  const std::vector<double> grad = at;  // d/dx of x^2/2
  CHECK(max_rel_grad_error(f, grad, at, 1e-6) <= 1e-9);

  // A corrupted coordinate must surface.
  std::vector<double> bad = grad;
  bad[2] += 1e-3;
  CHECK(max_rel_grad_error(f, bad, at, 1e-6) >= 5e-4);
}

TEST_CASE("central-difference checker accepts an empty parameter vector") {
  auto f = [](const std::vector<double>&) { return 7.0; };
  CHECK(max_rel_grad_error(f, {}, {}, 1e-6) == 0.0);
}

TEST_CASE("loss gradient matches finite differences") {
  const ModelArch arch{2, {8}, 3, Activation::tanh};
  const SampleSet set = testutil::random_set(5, 2, 3, 401);
  const ParamVector params = init_model(arch, 77);
  CHECK(grad_check(params, set, arch) <= 1e-6);

  const ModelArch relu_arch{3, {6, 4}, 2, Activation::relu};
  const SampleSet relu_set = testutil::random_set(6, 3, 2, 402);
  const ParamVector relu_params = init_model(relu_arch, 78);
  CHECK(grad_check(relu_params, relu_set, relu_arch) <= 1e-6);
}

TEST_CASE("perfectly separated pair gives near-zero loss and gradient") {
  const ModelArch arch{2, {}, 2, Activation::relu};
  ParamVector params = init_model(arch, 1);
  // Large-margin linear separator along x0.
  params.values.assign(params.size(), 0.0);
  params.values[0] = 20.0;   // w[0][0]
  params.values[1] = -20.0;  // w[0][1]

  SampleSet set;
  set.inputs = DenseArray({2, 2}, {1.0, 0.0, -1.0, 0.0});
  set.labels = {0, 1};

  const LossGrad lg = loss_and_grad(params, set, arch);
  CHECK(lg.loss <= 1e-6);
  for (double g : lg.grad.values) CHECK(std::fabs(g) <= 1e-6);
}

TEST_CASE("duplicating every sample leaves loss and gradient unchanged") {
  const ModelArch arch{2, {5}, 3, Activation::relu};
  const SampleSet set = testutil::random_set(7, 2, 3, 403);
  const ParamVector params = init_model(arch, 79);

  SampleSet doubled;
  doubled.inputs = DenseArray::zeros({14, 2});
  doubled.labels.resize(14);
  for (std::size_t copy = 0; copy < 2; ++copy) {
    for (std::size_t i = 0; i < 7; ++i) {
      const std::size_t r = copy * 7 + i;
      doubled.labels[r] = set.labels[i];
      for (std::size_t k = 0; k < 2; ++k) doubled.inputs.row(r)[k] = set.inputs.row(i)[k];
    }
  }

  const LossGrad a = loss_and_grad(params, set, arch);
  const LossGrad b = loss_and_grad(params, doubled, arch);
  CHECK(testutil::rel_diff(a.loss, b.loss) <= 1e-14);
  for (std::size_t j = 0; j < a.grad.size(); ++j) {
    CHECK(testutil::rel_diff(a.grad.values[j], b.grad.values[j]) <= 1e-13);
  }
}

TEST_CASE("repeated evaluation is bit-identical") {
  const ModelArch arch{4, {9}, 4, Activation::tanh};
  const SampleSet set = testutil::random_set(11, 4, 4, 404);
  const ParamVector params = init_model(arch, 80);
  const LossGrad a = loss_and_grad(params, set, arch);
  const LossGrad b = loss_and_grad(params, set, arch);
  CHECK(a.loss == b.loss);
  CHECK(a.grad.values == b.grad.values);
  CHECK(loss_only(params, set, arch) == a.loss);
}

TEST_CASE("set mean composes over disjoint halves") {
  const ModelArch arch{2, {6}, 3, Activation::relu};
  const SampleSet whole = testutil::random_set(10, 2, 3, 405);
  const ParamVector params = init_model(arch, 81);

  auto piece = [&](std::size_t begin, std::size_t end) {
    SampleSet part;
    part.inputs = DenseArray::zeros({end - begin, 2});
    part.labels.assign(whole.labels.begin() + begin, whole.labels.begin() + end);
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t k = 0; k < 2; ++k) part.inputs.row(i - begin)[k] = whole.inputs.row(i)[k];
    }
    return part;
  };

  const double la = loss_only(params, piece(0, 4), arch);
  const double lb = loss_only(params, piece(4, 10), arch);
  const double lw = loss_only(params, whole, arch);
  CHECK(testutil::rel_diff(lw, (4.0 * la + 6.0 * lb) / 10.0) <= 1e-12);
}

TEST_CASE("loss errors") {
  const ModelArch arch{2, {4}, 3, Activation::relu};
  const ParamVector params = init_model(arch, 82);

  SampleSet empty;
  empty.inputs = DenseArray::zeros({0, 2});
  CHECK_THROWS_AS(loss_and_grad(params, empty, arch), ConfigError);

  SampleSet bad_label = testutil::random_set(3, 2, 3, 406);
  bad_label.labels[1] = 3;
  CHECK_THROWS_AS(loss_and_grad(params, bad_label, arch), ConfigError);

  const SampleSet set = testutil::random_set(3, 2, 3, 406);
  ParamVector poisoned = params;
  poisoned.values[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_WITH_AS(loss_and_grad(poisoned, set, arch), "non-finite loss at sample 0",
                       NumericalError);
}

TEST_CASE("grad_check flags a broken gradient") {
  // If the analytic side were wrong by 1e-3 the check must not pass the 1e-6
  // gate; exercised through the generic checker with a shifted gradient.
  const ModelArch arch{2, {4}, 2, Activation::tanh};
  const SampleSet set = testutil::random_set(4, 2, 2, 407);
  ParamVector params = init_model(arch, 83);
  const LossGrad lg = loss_and_grad(params, set, arch);
  std::vector<double> shifted = lg.grad.values;
  shifted[0] += 1e-3;
  ParamVector probe = params;
  auto f = [&](const std::vector<double>& theta) {
    probe.values = theta;
    return loss_only(probe, set, arch);
  };
  CHECK(max_rel_grad_error(f, shifted, params.values, 1e-6) >= 1e-4);
}
