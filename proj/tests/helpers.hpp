#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "cnl/model.hpp"
#include "cnl/rng.hpp"
#include "cnl/types.hpp"

namespace testutil {

// Random inputs with round-robin labels; independent of the task generators.
inline cnl::SampleSet random_set(std::size_t n, std::size_t dim, std::size_t classes,
                                 std::uint64_t seed) {
  cnl::Rng rng(seed);
  cnl::SampleSet set;
  set.inputs = cnl::DenseArray::zeros({n, dim});
  set.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    set.labels[i] = i % classes;
    for (std::size_t k = 0; k < dim; ++k) set.inputs.row(i)[k] = rng.uniform(-2.0, 2.0);
  }
  return set;
}

inline double rel_diff(double a, double b) {
  const double scale = std::fabs(a) > std::fabs(b) ? std::fabs(a) : std::fabs(b);
  return scale > 1.0 ? std::fabs(a - b) / scale : std::fabs(a - b);
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double mx = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > mx) mx = d;
  }
  return a.size() == b.size() ? mx : 1e300;
}

}  // namespace testutil
