#include "cnl/types.hpp"

#include <cmath>

#include "cnl/errors.hpp"

namespace cnl {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

}  // namespace

DenseArray::DenseArray(std::vector<std::size_t> shape_in, std::vector<double> data_in)
    : shape(std::move(shape_in)), data(std::move(data_in)) {
  if (shape_product(shape) != data.size()) {
    throw ConfigError("DenseArray: shape does not match data length");
  }
}

DenseArray DenseArray::zeros(std::vector<std::size_t> shape_in) {
  const std::size_t n = shape_product(shape_in);
  return DenseArray(std::move(shape_in), std::vector<double>(n, 0.0));
}

std::size_t ManifestEntry::size() const { return shape_product(shape); }

void validate_manifest(const ParamVector& pv) {
  std::size_t expect = 0;
  for (const ManifestEntry& e : pv.manifest) {
    if (e.offset != expect) {
      throw ConfigError("manifest: entry '" + e.name + "' offset " + std::to_string(e.offset) +
                        " leaves a gap or overlap at " + std::to_string(expect));
    }
    if (e.size() == 0) {
      throw ConfigError("manifest: entry '" + e.name + "' is empty");
    }
    expect += e.size();
  }
  if (expect != pv.values.size()) {
    throw ConfigError("manifest tiles " + std::to_string(expect) + " values but vector holds " +
                      std::to_string(pv.values.size()));
  }
}

void validate_sample_set(const SampleSet& set, std::size_t classes) {
  if (set.labels.empty()) throw ConfigError("sample set is empty");
  if (set.inputs.shape.size() != 2) throw ConfigError("sample inputs must be 2-d (n, dim)");
  if (set.inputs.rows() != set.labels.size()) {
    throw ConfigError("sample inputs and labels are misaligned");
  }
  for (std::size_t i = 0; i < set.labels.size(); ++i) {
    if (set.labels[i] >= classes) {
      throw ConfigError("label out of range at sample " + std::to_string(i));
    }
  }
}

void validate_arch(const ModelArch& arch) {
  if (arch.input_dim == 0) throw ConfigError("arch: input_dim must be positive");
  if (arch.classes < 2) throw ConfigError("arch: need at least 2 classes");
  for (std::size_t w : arch.hidden) {
    if (w == 0) throw ConfigError("arch: zero-width hidden layer");
  }
}

}  // namespace cnl
