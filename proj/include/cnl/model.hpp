#pragma once

#include "cnl/types.hpp"

namespace cnl {

// Layer slices in forward order: layer<k>.weight is (in, out) row-major,
// layer<k>.bias is (out). The last layer maps onto class logits.
std::vector<ManifestEntry> arch_manifest(const ModelArch& arch);

std::size_t param_count(const ModelArch& arch);

// Weights uniform in (-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
// Deterministic in (arch, seed).
ParamVector init_model(const ModelArch& arch, std::uint64_t seed);

// Throws ConfigError when params do not carry this arch's manifest.
void validate_params(const ParamVector& params, const ModelArch& arch);

// Logits for a single input row of arch.input_dim values.
void forward_logits(const ParamVector& params, const ModelArch& arch, const double* x,
                    std::vector<double>& logits);

// Argmax class per row; ties break toward the lowest class index.
std::vector<std::size_t> predict(const ParamVector& params, const DenseArray& inputs,
                                 const ModelArch& arch);

CorrectnessMask evaluate_correctness(const ParamVector& params, const SampleSet& set,
                                     const ModelArch& arch);

}  // namespace cnl
