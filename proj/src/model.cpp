#include "cnl/model.hpp"

#include <cmath>

#include "cnl/errors.hpp"
#include "cnl/rng.hpp"

namespace cnl {

namespace {

// Widths of each layer boundary: input, hidden..., classes.
std::vector<std::size_t> layer_widths(const ModelArch& arch) {
  std::vector<std::size_t> w;
  w.reserve(arch.hidden.size() + 2);
  w.push_back(arch.input_dim);
  for (std::size_t h : arch.hidden) w.push_back(h);
  w.push_back(arch.classes);
  return w;
}

}  // namespace

std::vector<ManifestEntry> arch_manifest(const ModelArch& arch) {
  validate_arch(arch);
  const std::vector<std::size_t> w = layer_widths(arch);
  std::vector<ManifestEntry> manifest;
  manifest.reserve(2 * (w.size() - 1));
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l);
    manifest.push_back({prefix + ".weight", offset, {w[l], w[l + 1]}});
    offset += w[l] * w[l + 1];
    manifest.push_back({prefix + ".bias", offset, {w[l + 1]}});
    offset += w[l + 1];
  }
  return manifest;
}

std::size_t param_count(const ModelArch& arch) {
  std::size_t n = 0;
  for (const ManifestEntry& e : arch_manifest(arch)) n += e.size();
  return n;
}

ParamVector init_model(const ModelArch& arch, std::uint64_t seed) {
  ParamVector pv;
  pv.manifest = arch_manifest(arch);
  pv.values.assign(param_count(arch), 0.0);
  Rng rng(mix_seed(seed, 0x696e6974ULL));  // init stream
  for (std::size_t e = 0; e < pv.manifest.size(); ++e) {
    const ManifestEntry& entry = pv.manifest[e];
    if (entry.shape.size() != 2) continue;  // biases stay zero
    const double bound = 1.0 / std::sqrt(static_cast<double>(entry.shape[0]));
    double* dst = pv.slice(e);
    for (std::size_t i = 0; i < entry.size(); ++i) dst[i] = rng.uniform(-bound, bound);
  }
  return pv;
}

void validate_params(const ParamVector& params, const ModelArch& arch) {
  const std::vector<ManifestEntry> expect = arch_manifest(arch);
  if (params.manifest.size() != expect.size()) {
    throw ConfigError("params do not match arch: entry count");
  }
  for (std::size_t i = 0; i < expect.size(); ++i) {
    const ManifestEntry& a = params.manifest[i];
    const ManifestEntry& b = expect[i];
    if (a.name != b.name || a.offset != b.offset || a.shape != b.shape) {
      throw ConfigError("params do not match arch at entry '" + b.name + "'");
    }
  }
  validate_manifest(params);
}

void forward_logits(const ParamVector& params, const ModelArch& arch, const double* x,
                    std::vector<double>& logits) {
  const std::vector<std::size_t> w = layer_widths(arch);
  std::vector<double> cur(x, x + arch.input_dim);
  std::vector<double> next;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    const std::size_t in = w[l];
    const std::size_t out = w[l + 1];
    const double* weight = params.slice(2 * l);
    const double* bias = params.slice(2 * l + 1);
    next.assign(out, 0.0);
    for (std::size_t o = 0; o < out; ++o) next[o] = bias[o];
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = cur[i];
      const double* wrow = weight + i * out;
      for (std::size_t o = 0; o < out; ++o) next[o] += xi * wrow[o];
    }
    const bool last = (l + 2 == w.size());
    if (!last) {
      if (arch.activation == Activation::relu) {
        for (double& v : next) v = v > 0.0 ? v : 0.0;
      } else {
        for (double& v : next) v = std::tanh(v);
      }
    }
    cur.swap(next);
  }
  logits = std::move(cur);
}

std::vector<std::size_t> predict(const ParamVector& params, const DenseArray& inputs,
                                 const ModelArch& arch) {
  validate_params(params, arch);
  if (inputs.shape.size() != 2 || inputs.cols() != arch.input_dim) {
    throw ConfigError("predict: inputs must be (n, input_dim)");
  }
  std::vector<std::size_t> out(inputs.rows());
  std::vector<double> logits;
  for (std::size_t r = 0; r < inputs.rows(); ++r) {
    forward_logits(params, arch, inputs.row(r), logits);
    std::size_t best = 0;
    for (std::size_t k = 1; k < logits.size(); ++k) {
      if (logits[k] > logits[best]) best = k;  // strict: ties keep the lowest index
    }
    out[r] = best;
  }
  return out;
}

CorrectnessMask evaluate_correctness(const ParamVector& params, const SampleSet& set,
                                     const ModelArch& arch) {
  validate_sample_set(set, arch.classes);
  const std::vector<std::size_t> pred = predict(params, set.inputs, arch);
  CorrectnessMask mask;
  mask.flags.resize(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    mask.flags[i] = pred[i] == set.labels[i] ? 1 : 0;
  }
  return mask;
}

}  // namespace cnl
