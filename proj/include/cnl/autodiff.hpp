#pragma once

#include <functional>

#include "cnl/types.hpp"

namespace cnl {

struct LossGrad {
  double loss = 0.0;
  ParamVector grad;  // same manifest as the parameters
};

// Mean softmax cross-entropy over the set plus its gradient.  Per-sample
// contributions accumulate in sample order, so results are bit-stable for a
// given input order.  Throws NumericalError naming the sample whose loss
// comes out non-finite.
LossGrad loss_and_grad(const ParamVector& params, const SampleSet& set, const ModelArch& arch);

// Same loss without the gradient work.
double loss_only(const ParamVector& params, const SampleSet& set, const ModelArch& arch);

// Central-difference check of an arbitrary scalar function:
// max_j |analytic_j - numeric_j| / max(1, |analytic_j|).
double max_rel_grad_error(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& analytic, std::vector<double> at,
                          double step);

// Central-difference check of loss_and_grad over every parameter.
double grad_check(const ParamVector& params, const SampleSet& set, const ModelArch& arch,
                  double step = 1e-6);

}  // namespace cnl
