#include "cnl/gradsim.hpp"

#include <algorithm>
#include <cmath>

#include "cnl/autodiff.hpp"
#include "cnl/errors.hpp"

namespace cnl {

std::size_t NeuronMask::kept() const {
  std::size_t n = 0;
  for (std::uint8_t k : keep) n += k;
  return n;
}

double global_similarity(const std::vector<double>& gm, const std::vector<double>& gi) {
  if (gm.size() != gi.size()) throw ConfigError("global_similarity: length mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < gm.size(); ++j) acc += gm[j] * gi[j];
  return acc;
}

double global_similarity(const ParamVector& gm, const ParamVector& gi) {
  return global_similarity(gm.values, gi.values);
}

SimilarityVector per_param_similarity(const ParamVector& gm, const ParamVector& gi) {
  if (gm.size() != gi.size()) throw ConfigError("per_param_similarity: length mismatch");
  SimilarityVector out;
  out.s.resize(gm.size());
  for (std::size_t j = 0; j < gm.size(); ++j) out.s[j] = gm.values[j] * gi.values[j];
  return out;
}

NeuronMask classify_neurons(const SimilarityVector& sims) {
  NeuronMask mask;
  mask.keep.resize(sims.size());
  for (std::size_t j = 0; j < sims.size(); ++j) {
    mask.keep[j] = sims.s[j] >= 0.0 ? 1 : 0;  // zero counts as collaborative
  }
  return mask;
}

GradSimReport neuron_distribution_report(const SimilarityVector& sims) {
  if (sims.size() == 0) throw ConfigError("neuron_distribution_report: empty similarities");
  GradSimReport rep;
  std::size_t n_collab = 0;
  for (double v : sims.s) {
    if (v >= 0.0) {
      rep.grad_collaborative += v;
      ++n_collab;
    } else {
      rep.grad_conflicting += v;
    }
  }
  const double n = static_cast<double>(sims.size());
  rep.prop_collaborative = static_cast<double>(n_collab) / n;
  rep.prop_conflicting = static_cast<double>(sims.size() - n_collab) / n;
  rep.total = rep.grad_collaborative + rep.grad_conflicting;
  return rep;
}

double per_sample_similarity(const ParamVector& params, const SampleSet& set,
                             std::size_t sample_index, const ParamVector& gi,
                             const ModelArch& arch) {
  if (sample_index >= set.size()) throw ConfigError("per_sample_similarity: index out of range");
  SampleSet one;
  one.inputs = DenseArray({1, set.inputs.cols()},
                          std::vector<double>(set.inputs.row(sample_index),
                                              set.inputs.row(sample_index) + set.inputs.cols()));
  one.labels = {set.labels[sample_index]};
  const LossGrad lg = loss_and_grad(params, one, arch);
  return global_similarity(lg.grad, gi);
}

std::vector<double> per_sample_similarities(const ParamVector& params, const SampleSet& set,
                                            const ParamVector& gi, const ModelArch& arch) {
  std::vector<double> out(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    out[i] = per_sample_similarity(params, set, i, gi, arch);
  }
  return out;
}

SimGroupAssignment sim_dissim_groups(const std::vector<double>& sample_sims) {
  std::vector<std::size_t> negative;
  SimGroupAssignment groups;
  for (std::size_t i = 0; i < sample_sims.size(); ++i) {
    if (sample_sims[i] < 0.0) {
      negative.push_back(i);
    } else {
      groups.excluded.push_back(i);
    }
  }
  if (negative.size() < 3) {
    throw DegenerateError("sim_dissim_groups: only " + std::to_string(negative.size()) +
                          " samples with negative similarity; need at least 3");
  }
  std::stable_sort(negative.begin(), negative.end(), [&](std::size_t a, std::size_t b) {
    return std::fabs(sample_sims[a]) > std::fabs(sample_sims[b]);
  });
  const std::size_t k = negative.size() / 3;
  groups.sim.assign(negative.begin(), negative.begin() + k);
  groups.middle.assign(negative.begin() + k, negative.end() - k);
  groups.dissim.assign(negative.end() - k, negative.end());
  return groups;
}

double predicted_loss_change(double eta, double similarity) { return -eta * similarity; }

double predicted_cnl_loss_change(double eta, const SimilarityVector& sims,
                                 const NeuronMask& mask) {
  if (sims.size() != mask.size()) throw ConfigError("predicted_cnl_loss_change: size mismatch");
  double kept_sum = 0.0;
  for (std::size_t j = 0; j < sims.size(); ++j) {
    if (mask.keep[j]) kept_sum += sims.s[j];
  }
  return predicted_loss_change(eta, kept_sum);
}

}  // namespace cnl
