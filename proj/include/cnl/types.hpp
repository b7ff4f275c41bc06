#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cnl {

// Row-major dense array of doubles.
struct DenseArray {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  DenseArray() = default;
  // Throws ConfigError if data.size() != product(shape).
  DenseArray(std::vector<std::size_t> shape_in, std::vector<double> data_in);
  static DenseArray zeros(std::vector<std::size_t> shape_in);

  std::size_t size() const { return data.size(); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  const double* row(std::size_t r) const { return data.data() + r * cols(); }
  double* row(std::size_t r) { return data.data() + r * cols(); }
};

struct ManifestEntry {
  std::string name;
  std::size_t offset = 0;
  std::vector<std::size_t> shape;

  std::size_t size() const;
};

// Flat parameter vector; the manifest names disjoint slices that tile it.
struct ParamVector {
  std::vector<double> values;
  std::vector<ManifestEntry> manifest;

  std::size_t size() const { return values.size(); }
  const double* slice(std::size_t entry) const { return values.data() + manifest[entry].offset; }
  double* slice(std::size_t entry) { return values.data() + manifest[entry].offset; }
};

// Throws ConfigError unless manifest entries are contiguous, in offset order,
// and tile values exactly.
void validate_manifest(const ParamVector& pv);

struct SampleSet {
  DenseArray inputs;                // (n, input_dim)
  std::vector<std::size_t> labels;  // aligned with input rows

  std::size_t size() const { return labels.size(); }
};

// Alignment and label-range checks. Throws ConfigError.
void validate_sample_set(const SampleSet& set, std::size_t classes);

enum class Activation { relu, tanh };

struct ModelArch {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden;
  std::size_t classes = 2;
  Activation activation = Activation::relu;

  std::size_t layer_count() const { return hidden.size() + 1; }
};

void validate_arch(const ModelArch& arch);

// Per-sample prediction-correctness flags, aligned with the set they were
// evaluated on.
struct CorrectnessMask {
  std::vector<std::uint8_t> flags;

  std::size_t size() const { return flags.size(); }
};

}  // namespace cnl
