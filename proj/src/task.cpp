#include "cnl/task.hpp"

#include <cmath>

#include "cnl/errors.hpp"
#include "cnl/rng.hpp"

namespace cnl {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Evenly spread class centers: around the unit circle in the first two
// dimensions, or along a line when only one dimension exists.
std::vector<std::vector<double>> class_centers(std::size_t classes, std::size_t dim) {
  std::vector<std::vector<double>> centers(classes, std::vector<double>(dim, 0.0));
  for (std::size_t c = 0; c < classes; ++c) {
    if (dim == 1) {
      centers[c][0] = classes == 1 ? 0.0
                                   : -1.0 + 2.0 * static_cast<double>(c) /
                                                static_cast<double>(classes - 1);
    } else {
      const double angle = 2.0 * kPi * static_cast<double>(c) / static_cast<double>(classes);
      centers[c][0] = std::cos(angle);
      centers[c][1] = std::sin(angle);
    }
  }
  return centers;
}

double nearest_center_distance(const std::vector<std::vector<double>>& centers) {
  double best = -1.0;
  for (std::size_t a = 0; a < centers.size(); ++a) {
    for (std::size_t b = a + 1; b < centers.size(); ++b) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < centers[a].size(); ++k) {
        const double diff = centers[a][k] - centers[b][k];
        d2 += diff * diff;
      }
      const double d = std::sqrt(d2);
      if (best < 0.0 || d < best) best = d;
    }
  }
  return best;
}

SampleSet gen_gaussian_mixture(const TaskSpec& spec) {
  const auto centers = class_centers(spec.classes, spec.input_dim);
  // Noise scale tied to center spacing; overlap 0.3 puts sigma near half the
  // spacing so class regions interleave heavily.
  const double spacing = nearest_center_distance(centers);
  const double sigma = spacing * (0.02 + 1.6 * spec.cluster_overlap);

  SampleSet set;
  set.inputs = DenseArray::zeros({spec.n_samples, spec.input_dim});
  set.labels.resize(spec.n_samples);
  Rng rng(mix_seed(spec.seed, 0x676d6978ULL));
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const std::size_t label = i % spec.classes;  // exact balance
    set.labels[i] = label;
    double* row = set.inputs.row(i);
    for (std::size_t k = 0; k < spec.input_dim; ++k) {
      row[k] = centers[label][k] + sigma * rng.normal();
    }
  }
  return set;
}

// Checkerboard over the first two dimensions: cell parity sums to the class,
// so no linear model separates it.  Overlap injects label noise.
SampleSet gen_xor_bands(const TaskSpec& spec) {
  const std::size_t bands = spec.classes;
  SampleSet set;
  set.inputs = DenseArray::zeros({spec.n_samples, spec.input_dim});
  set.labels.resize(spec.n_samples);
  Rng rng(mix_seed(spec.seed, 0x786f72ULL));

  auto cell_of = [&](double v) {
    auto cell = static_cast<std::size_t>((v + 1.0) * 0.5 * static_cast<double>(bands));
    return cell >= bands ? bands - 1 : cell;
  };

  std::vector<double> x(spec.input_dim);
  for (std::size_t i = 0; i < spec.n_samples; ++i) {
    const std::size_t want = i % spec.classes;  // stratified: draw until the cell matches
    for (;;) {
      for (std::size_t k = 0; k < spec.input_dim; ++k) x[k] = rng.uniform(-1.0, 1.0);
      const std::size_t cx = cell_of(x[0]);
      const std::size_t cy = spec.input_dim > 1 ? cell_of(x[1]) : 0;
      if ((cx + cy) % spec.classes == want) break;
    }
    double* row = set.inputs.row(i);
    for (std::size_t k = 0; k < spec.input_dim; ++k) row[k] = x[k];
    std::size_t label = want;
    if (rng.uniform() < 0.5 * spec.cluster_overlap) {
      label = (label + 1 + rng.bounded(spec.classes - 1)) % spec.classes;
    }
    set.labels[i] = label;
  }
  return set;
}

}  // namespace

std::size_t TaskSpec::effective_classes() const {
  if (generator != Generator::merged) return classes;
  std::size_t c = 0;
  for (const TaskSpec& sub : sub_tasks) c = std::max(c, sub.effective_classes());
  return c;
}

std::size_t TaskSpec::effective_samples() const {
  if (generator != Generator::merged) return n_samples;
  std::size_t n = 0;
  for (const TaskSpec& sub : sub_tasks) n += sub.effective_samples();
  return n;
}

void validate_task(const TaskSpec& spec) {
  if (spec.generator == Generator::merged) {
    if (spec.sub_tasks.size() < 2) {
      throw ConfigError("merged task needs at least 2 sub_tasks");
    }
    const std::size_t dim = spec.sub_tasks.front().input_dim;
    for (const TaskSpec& sub : spec.sub_tasks) {
      if (sub.generator == Generator::merged) {
        throw ConfigError("merged sub_tasks cannot nest");
      }
      if (sub.input_dim != dim) {
        throw ConfigError("merged sub_tasks must share input_dim");
      }
      validate_task(sub);
    }
    return;
  }
  if (spec.n_samples == 0) throw ConfigError("task: n_samples must be positive");
  if (spec.input_dim == 0) throw ConfigError("task: input_dim must be positive");
  if (spec.classes < 2) throw ConfigError("task: need at least 2 classes");
  if (!(spec.cluster_overlap >= 0.0) || !(spec.cluster_overlap <= 1.0)) {
    throw ConfigError("task: cluster_overlap must lie in [0, 1]");
  }
  if (!spec.sub_tasks.empty()) {
    throw ConfigError("task: sub_tasks only apply to the merged generator");
  }
}

SampleSet synth_dataset(const TaskSpec& spec) {
  validate_task(spec);
  switch (spec.generator) {
    case Generator::gaussian_mixture:
      return gen_gaussian_mixture(spec);
    case Generator::xor_bands:
      return gen_xor_bands(spec);
    case Generator::merged: {
      SampleSet merged;
      merged.inputs = DenseArray::zeros({spec.effective_samples(), spec.sub_tasks[0].input_dim});
      merged.labels.reserve(spec.effective_samples());
      std::size_t row = 0;
      for (const TaskSpec& sub : spec.sub_tasks) {
        const SampleSet part = synth_dataset(sub);
        for (std::size_t i = 0; i < part.size(); ++i, ++row) {
          double* dst = merged.inputs.row(row);
          const double* src = part.inputs.row(i);
          for (std::size_t k = 0; k < part.inputs.cols(); ++k) dst[k] = src[k];
          merged.labels.push_back(part.labels[i]);
        }
      }
      return merged;
    }
  }
  throw ConfigError("task: unknown generator");
}

std::vector<std::pair<std::size_t, std::size_t>> task_segments(const TaskSpec& spec) {
  validate_task(spec);
  std::vector<std::pair<std::size_t, std::size_t>> segments;
  if (spec.generator != Generator::merged) {
    segments.emplace_back(0, spec.n_samples);
    return segments;
  }
  std::size_t at = 0;
  for (const TaskSpec& sub : spec.sub_tasks) {
    segments.emplace_back(at, at + sub.n_samples);
    at += sub.n_samples;
  }
  return segments;
}

}  // namespace cnl
