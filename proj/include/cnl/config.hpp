#pragma once

#include <string>

#include "cnl/optimizer.hpp"
#include "cnl/task.hpp"
#include "cnl/types.hpp"

namespace cnl {

enum class Method { FT, CNL, RP };
enum class Protocol { in_set, out_of_set };
enum class MaskPolicy { per_step, per_epoch, once };
enum class SimMeasureAt { pretrain, checkpoint };

const char* method_name(Method m);
const char* protocol_name(Protocol p);
const char* mask_policy_name(MaskPolicy p);
const char* optimizer_name(OptKind k);
const char* generator_name(Generator g);
const char* activation_name(Activation a);
const char* sim_measure_name(SimMeasureAt s);

struct PretrainConfig {
  std::size_t epochs = 200;
  double eta = 0.3;  // plain sgd
};

struct OptimizerConfig {
  OptKind kind = OptKind::sgd;
  OptHyper hyper;
  bool eta_auto = true;  // resolve eta from the first-step update scale
};

struct ExperimentConfig {
  int version = 1;
  TaskSpec task;
  ModelArch arch;
  OptimizerConfig optimizer;
  Method method = Method::FT;
  Protocol protocol = Protocol::in_set;
  MaskPolicy mask_policy = MaskPolicy::per_step;
  SimMeasureAt sim_measure_at = SimMeasureAt::pretrain;
  std::size_t epochs = 25;
  std::size_t batch_size = 0;  // 0 = full batch
  PretrainConfig pretrain;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";
};

void validate_config(const ExperimentConfig& cfg);

// JSON text <-> config.  Parse errors and schema violations raise ConfigError;
// a missing file raises IoError.
ExperimentConfig parse_config_text(const std::string& json_text);
ExperimentConfig load_config_file(const std::string& path);

// Canonical serialization; embedded verbatim in every output JSON.
std::string config_to_json(const ExperimentConfig& cfg);

}  // namespace cnl
