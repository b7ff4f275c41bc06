#include "cnl/optimizer.hpp"

#include <cmath>
#include <limits>

#include "cnl/errors.hpp"

namespace cnl {

OptHyper default_hyper(OptKind kind) {
  OptHyper h;
  (void)kind;  // one shared set of defaults; eta stays unset
  return h;
}

OptimizerState OptimizerState::make(OptKind kind, OptHyper hyper, std::size_t dim) {
  OptimizerState st;
  st.kind = kind;
  st.hyper = hyper;
  st.t = 0;
  if (kind == OptKind::momentum || kind == OptKind::adam || kind == OptKind::adamw) {
    st.m.assign(dim, 0.0);
  }
  if (kind == OptKind::adam || kind == OptKind::adamw) {
    st.v.assign(dim, 0.0);
  }
  return st;
}

UpdateDirection update_direction(OptimizerState& state, const ParamVector& gi,
                                 const ParamVector& params) {
  const std::size_t n = gi.size();
  if (params.size() != n) throw ConfigError("update_direction: params/gradient size mismatch");
  UpdateDirection dir;
  dir.u.resize(n);

  switch (state.kind) {
    case OptKind::sgd: {
      for (std::size_t j = 0; j < n; ++j) dir.u[j] = gi.values[j];
      break;
    }
    case OptKind::momentum: {
      if (state.m.size() != n) throw ConfigError("update_direction: momentum buffer size");
      const double beta = state.hyper.beta;
      for (std::size_t j = 0; j < n; ++j) {
        state.m[j] = beta * state.m[j] + gi.values[j];
        dir.u[j] = state.m[j];
      }
      break;
    }
    case OptKind::adam:
    case OptKind::adamw: {
      if (state.t == 0) {
        throw ConfigError("update_direction: adam bias correction needs t >= 1");
      }
      if (state.m.size() != n || state.v.size() != n) {
        throw ConfigError("update_direction: moment buffer size");
      }
      const double b1 = state.hyper.beta1;
      const double b2 = state.hyper.beta2;
      const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
      const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
      for (std::size_t j = 0; j < n; ++j) {
        const double g = gi.values[j];
        state.m[j] = b1 * state.m[j] + (1.0 - b1) * g;
        state.v[j] = b2 * state.v[j] + (1.0 - b2) * g * g;
        const double mhat = state.m[j] / c1;
        const double vhat = state.v[j] / c2;
        dir.u[j] = mhat / (std::sqrt(vhat) + state.hyper.epsilon);
      }
      if (state.kind == OptKind::adamw) {
        const double lambda = state.hyper.lambda;
        for (std::size_t j = 0; j < n; ++j) dir.u[j] += lambda * params.values[j];
      }
      break;
    }
  }
  return dir;
}

NeuronMask cnl_mask(const ParamVector& gm, const UpdateDirection& u) {
  if (gm.size() != u.size()) throw ConfigError("cnl_mask: size mismatch");
  NeuronMask mask;
  mask.keep.resize(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) {
    mask.keep[j] = gm.values[j] * u.u[j] >= 0.0 ? 1 : 0;
  }
  return mask;
}

ParamVector apply_update(const ParamVector& params, const UpdateDirection& u, double eta,
                         const NeuronMask* mask) {
  if (params.size() != u.size()) throw ConfigError("apply_update: size mismatch");
  if (mask != nullptr && mask->size() != u.size()) {
    throw ConfigError("apply_update: mask size mismatch");
  }
  ParamVector out = params;
  for (std::size_t j = 0; j < u.size(); ++j) {
    if (mask != nullptr && !mask->keep[j]) continue;  // frozen coordinate, bits untouched
    out.values[j] = params.values[j] - eta * u.u[j];
  }
  return out;
}

std::pair<ParamVector, StepDiagnostics> optimizer_step(OptimizerState& state,
                                                       const ParamVector& params,
                                                       const ParamVector* gm,
                                                       const ParamVector& gi,
                                                       const NeuronMask* reuse_mask) {
  state.t += 1;
  const UpdateDirection dir = update_direction(state, gi, params);

  NeuronMask fresh;
  const NeuronMask* mask = reuse_mask;
  if (mask == nullptr && gm != nullptr) {
    fresh = cnl_mask(*gm, dir);
    mask = &fresh;
  }

  StepDiagnostics diag;
  diag.t = state.t;
  diag.eta = state.hyper.eta;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (gm != nullptr) {
    double s_opt = 0.0;
    double kept = 0.0;
    for (std::size_t j = 0; j < dir.size(); ++j) {
      const double prod = gm->values[j] * dir.u[j];
      s_opt += prod;
      if (mask == nullptr || mask->keep[j]) kept += prod;
    }
    diag.s_opt = s_opt;
    diag.masked_sum = kept;
  } else {
    diag.s_opt = nan;
    diag.masked_sum = nan;
  }
  diag.mask_density =
      mask == nullptr ? 1.0
                      : static_cast<double>(mask->kept()) / static_cast<double>(mask->size());

  ParamVector next = apply_update(params, dir, state.hyper.eta, mask);
  return {std::move(next), diag};
}

}  // namespace cnl
