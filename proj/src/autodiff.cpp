#include "cnl/autodiff.hpp"

#include <cmath>

#include "cnl/errors.hpp"
#include "cnl/model.hpp"

namespace cnl {

namespace {

std::vector<std::size_t> layer_widths(const ModelArch& arch) {
  std::vector<std::size_t> w;
  w.push_back(arch.input_dim);
  for (std::size_t h : arch.hidden) w.push_back(h);
  w.push_back(arch.classes);
  return w;
}

// Activations per layer for one sample, retained for the backward sweep.
struct Workspace {
  std::vector<std::vector<double>> pre;   // pre-activation per non-input layer
  std::vector<std::vector<double>> post;  // post-activation (post[0] is the input copy)
  std::vector<double> delta;              // gradient w.r.t. current layer's pre-activation
  std::vector<double> delta_prev;

  explicit Workspace(const std::vector<std::size_t>& w) {
    pre.resize(w.size() - 1);
    post.resize(w.size());
    for (std::size_t l = 0; l + 1 < w.size(); ++l) pre[l].resize(w[l + 1]);
    for (std::size_t l = 0; l < w.size(); ++l) post[l].resize(w[l]);
  }
};

// Softmax cross-entropy for one sample, stabilized by the max logit.
// Returns the loss and writes softmax probabilities over logits in place.
double softmax_xent(std::vector<double>& logits, std::size_t label) {
  double mx = logits[0];
  for (double v : logits) mx = v > mx ? v : mx;
  double sum = 0.0;
  for (double v : logits) sum += std::exp(v - mx);
  const double lse = mx + std::log(sum);
  const double loss = lse - logits[label];
  for (double& v : logits) v = std::exp(v - lse);
  return loss;
}

}  // namespace

LossGrad loss_and_grad(const ParamVector& params, const SampleSet& set, const ModelArch& arch) {
  validate_params(params, arch);
  validate_sample_set(set, arch.classes);
  if (set.inputs.cols() != arch.input_dim) {
    throw ConfigError("loss_and_grad: input width does not match arch");
  }

  LossGrad out;
  out.grad.manifest = params.manifest;
  out.grad.values.assign(params.values.size(), 0.0);

  const std::vector<std::size_t> w = layer_widths(arch);
  const std::size_t n_layers = w.size() - 1;
  Workspace ws(w);
  std::vector<double> probs(arch.classes);

  double loss_sum = 0.0;
  for (std::size_t s = 0; s < set.size(); ++s) {
    // Forward, caching pre/post activations.
    const double* x = set.inputs.row(s);
    for (std::size_t i = 0; i < arch.input_dim; ++i) ws.post[0][i] = x[i];
    for (std::size_t l = 0; l < n_layers; ++l) {
      const std::size_t in = w[l];
      const std::size_t nout = w[l + 1];
      const double* weight = params.slice(2 * l);
      const double* bias = params.slice(2 * l + 1);
      std::vector<double>& pre = ws.pre[l];
      for (std::size_t o = 0; o < nout; ++o) pre[o] = bias[o];
      for (std::size_t i = 0; i < in; ++i) {
        const double xi = ws.post[l][i];
        const double* wrow = weight + i * nout;
        for (std::size_t o = 0; o < nout; ++o) pre[o] += xi * wrow[o];
      }
      std::vector<double>& post = ws.post[l + 1];
      if (l + 1 == n_layers) {
        post = pre;  // logits stay linear
      } else if (arch.activation == Activation::relu) {
        for (std::size_t o = 0; o < nout; ++o) post[o] = pre[o] > 0.0 ? pre[o] : 0.0;
      } else {
        for (std::size_t o = 0; o < nout; ++o) post[o] = std::tanh(pre[o]);
      }
    }

    probs = ws.post[n_layers];
    const double loss = softmax_xent(probs, set.labels[s]);
    if (!std::isfinite(loss)) {
      throw NumericalError("non-finite loss at sample " + std::to_string(s));
    }
    loss_sum += loss;

    // Backward.  delta holds dL/dpre for the layer being processed.
    ws.delta.assign(arch.classes, 0.0);
    for (std::size_t k = 0; k < arch.classes; ++k) ws.delta[k] = probs[k];
    ws.delta[set.labels[s]] -= 1.0;

    for (std::size_t l = n_layers; l-- > 0;) {
      const std::size_t in = w[l];
      const std::size_t nout = w[l + 1];
      const double* weight = params.slice(2 * l);
      double* gweight = out.grad.slice(2 * l);
      double* gbias = out.grad.slice(2 * l + 1);
      for (std::size_t o = 0; o < nout; ++o) gbias[o] += ws.delta[o];
      for (std::size_t i = 0; i < in; ++i) {
        const double xi = ws.post[l][i];
        double* grow = gweight + i * nout;
        for (std::size_t o = 0; o < nout; ++o) grow[o] += xi * ws.delta[o];
      }
      if (l == 0) break;
      ws.delta_prev.assign(in, 0.0);
      for (std::size_t i = 0; i < in; ++i) {
        const double* wrow = weight + i * nout;
        double acc = 0.0;
        for (std::size_t o = 0; o < nout; ++o) acc += wrow[o] * ws.delta[o];
        ws.delta_prev[i] = acc;
      }
      // Through the activation of layer l's output.
      if (arch.activation == Activation::relu) {
        for (std::size_t i = 0; i < in; ++i) {
          if (ws.pre[l - 1][i] <= 0.0) ws.delta_prev[i] = 0.0;
        }
      } else {
        for (std::size_t i = 0; i < in; ++i) {
          const double t = ws.post[l][i];
          ws.delta_prev[i] *= 1.0 - t * t;
        }
      }
      ws.delta.swap(ws.delta_prev);
    }
  }

  const double inv_n = 1.0 / static_cast<double>(set.size());
  out.loss = loss_sum * inv_n;
  for (double& g : out.grad.values) g *= inv_n;
  return out;
}

double loss_only(const ParamVector& params, const SampleSet& set, const ModelArch& arch) {
  validate_params(params, arch);
  validate_sample_set(set, arch.classes);
  std::vector<double> logits;
  double loss_sum = 0.0;
  for (std::size_t s = 0; s < set.size(); ++s) {
    forward_logits(params, arch, set.inputs.row(s), logits);
    const double loss = softmax_xent(logits, set.labels[s]);
    if (!std::isfinite(loss)) {
      throw NumericalError("non-finite loss at sample " + std::to_string(s));
    }
    loss_sum += loss;
  }
  return loss_sum / static_cast<double>(set.size());
}

double max_rel_grad_error(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& analytic, std::vector<double> at,
                          double step) {
  if (analytic.size() != at.size()) {
    throw ConfigError("max_rel_grad_error: gradient and point sizes differ");
  }
  if (!(step > 0.0)) throw ConfigError("max_rel_grad_error: step must be positive");
  double worst = 0.0;
  for (std::size_t j = 0; j < at.size(); ++j) {
    const double saved = at[j];
    at[j] = saved + step;
    const double fp = f(at);
    at[j] = saved - step;
    const double fm = f(at);
    at[j] = saved;
    const double numeric = (fp - fm) / (2.0 * step);
    const double denom = std::fabs(analytic[j]) > 1.0 ? std::fabs(analytic[j]) : 1.0;
    const double err = std::fabs(analytic[j] - numeric) / denom;
    if (err > worst) worst = err;
  }
  return worst;
}

double grad_check(const ParamVector& params, const SampleSet& set, const ModelArch& arch,
                  double step) {
  const LossGrad lg = loss_and_grad(params, set, arch);
  ParamVector probe = params;
  auto f = [&](const std::vector<double>& theta) {
    probe.values = theta;
    return loss_only(probe, set, arch);
  };
  return max_rel_grad_error(f, lg.grad.values, params.values, step);
}

}  // namespace cnl
