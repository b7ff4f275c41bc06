#pragma once

#include "cnl/gradsim.hpp"
#include "cnl/types.hpp"

namespace cnl {

enum class OptKind { sgd, momentum, adam, adamw };

struct OptHyper {
  double eta = 0.0;
  double beta = 0.9;       // momentum coefficient
  double beta1 = 0.9;      // adam first-moment decay
  double beta2 = 0.999;    // adam second-moment decay
  double epsilon = 1e-8;
  double lambda = 0.1;     // adamw decoupled weight decay
};

OptHyper default_hyper(OptKind kind);

// Accumulators always see the raw gradient; masking happens at apply time.
struct OptimizerState {
  OptKind kind = OptKind::sgd;
  OptHyper hyper;
  std::uint64_t t = 0;     // completed step count
  std::vector<double> m;   // first moment / momentum buffer
  std::vector<double> v;   // second moment (adam family)

  static OptimizerState make(OptKind kind, OptHyper hyper, std::size_t dim);
};

struct UpdateDirection {
  std::vector<double> u;

  std::size_t size() const { return u.size(); }
};

struct StepDiagnostics {
  std::uint64_t t = 0;
  double s_opt = 0.0;        // sum of gM[j] * u[j]; NaN when no mastered gradient
  double masked_sum = 0.0;   // same sum over kept coordinates; NaN when unmasked
  double mask_density = 1.0; // kept fraction
  double eta = 0.0;
};

// Advances the accumulators for the step state.t already points at and
// returns the raw (unmasked) update direction.  `params` feeds only the
// adamw decay term.  Requires state.t >= 1 for adam/adamw (bias correction
// divides by 1 - beta^t).
UpdateDirection update_direction(OptimizerState& state, const ParamVector& gi,
                                 const ParamVector& params);

// keep[j] = (gM[j] * u[j] >= 0): drop coordinates whose update direction
// conflicts with the mastered gradient.
NeuronMask cnl_mask(const ParamVector& gm, const UpdateDirection& u);

// theta' = theta - eta * (mask ? mask . u : u).  Masked coordinates keep
// their exact bit pattern; under adamw that also skips the decay shrink.
ParamVector apply_update(const ParamVector& params, const UpdateDirection& u, double eta,
                         const NeuronMask* mask);

// One full step: bumps state.t, forms the direction, masks it against gm
// when gm is present, applies it.  gm == nullptr runs the plain update.
std::pair<ParamVector, StepDiagnostics> optimizer_step(OptimizerState& state,
                                                       const ParamVector& params,
                                                       const ParamVector* gm,
                                                       const ParamVector& gi,
                                                       const NeuronMask* reuse_mask = nullptr);

}  // namespace cnl
