#pragma once

#include "cnl/types.hpp"

namespace cnl {

// Per-parameter products gM[j] * gI[j]; aligned with the parameter vector.
struct SimilarityVector {
  std::vector<double> s;

  std::size_t size() const { return s.size(); }
};

// keep[j] == 1 where the coordinate is collaborative (s[j] >= 0).
struct NeuronMask {
  std::vector<std::uint8_t> keep;

  std::size_t size() const { return keep.size(); }
  std::size_t kept() const;
};

struct GradSimReport {
  double prop_collaborative = 0.0;
  double prop_conflicting = 0.0;
  double grad_collaborative = 0.0;  // sum of nonnegative products
  double grad_conflicting = 0.0;    // sum of negative products
  double total = 0.0;               // grad_collaborative + grad_conflicting
};

// Membership in the similarity-ranked sample groups.  Indices refer to
// positions in the similarity vector handed to sim_dissim_groups.
struct SimGroupAssignment {
  std::vector<std::size_t> sim;       // most negative third (by magnitude)
  std::vector<std::size_t> middle;
  std::vector<std::size_t> dissim;    // least negative third
  std::vector<std::size_t> excluded;  // nonnegative similarities
};

// Dot product of two aligned gradient vectors, accumulated in index order.
double global_similarity(const std::vector<double>& gm, const std::vector<double>& gi);
double global_similarity(const ParamVector& gm, const ParamVector& gi);

SimilarityVector per_param_similarity(const ParamVector& gm, const ParamVector& gi);

NeuronMask classify_neurons(const SimilarityVector& sims);

GradSimReport neuron_distribution_report(const SimilarityVector& sims);

// Similarity between one sample's mastered-side gradient and a fixed
// injection gradient, both taken at the same parameters.
double per_sample_similarity(const ParamVector& params, const SampleSet& set,
                             std::size_t sample_index, const ParamVector& gi,
                             const ModelArch& arch);

// One value per sample row.
std::vector<double> per_sample_similarities(const ParamVector& params, const SampleSet& set,
                                            const ParamVector& gi, const ModelArch& arch);

// Ranks negative similarities by |s| descending (stable; ties keep the lower
// index first) and takes floor(n_neg/3)-sized outer groups; the remainder
// stays in the middle.  Throws DegenerateError when fewer than 3 samples
// have negative similarity, naming the count.
SimGroupAssignment sim_dissim_groups(const std::vector<double>& sample_sims);

// First-order loss change from one plain step against similarity S.
double predicted_loss_change(double eta, double similarity);

// First-order loss change from one masked step; never positive when the mask
// came from classify_neurons on the same similarities.
double predicted_cnl_loss_change(double eta, const SimilarityVector& sims,
                                 const NeuronMask& mask);

}  // namespace cnl
