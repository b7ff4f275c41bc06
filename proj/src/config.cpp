#include "cnl/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <type_traits>

#include "cnl/errors.hpp"

namespace cnl {

using ordered_json = nlohmann::ordered_json;

const char* method_name(Method m) {
  switch (m) {
    case Method::FT: return "FT";
    case Method::CNL: return "CNL";
    case Method::RP: return "RP";
  }
  return "?";
}

const char* protocol_name(Protocol p) {
  return p == Protocol::in_set ? "in_set" : "out_of_set";
}

const char* mask_policy_name(MaskPolicy p) {
  switch (p) {
    case MaskPolicy::per_step: return "per_step";
    case MaskPolicy::per_epoch: return "per_epoch";
    case MaskPolicy::once: return "once";
  }
  return "?";
}

const char* optimizer_name(OptKind k) {
  switch (k) {
    case OptKind::sgd: return "sgd";
    case OptKind::momentum: return "momentum";
    case OptKind::adam: return "adam";
    case OptKind::adamw: return "adamw";
  }
  return "?";
}

const char* generator_name(Generator g) {
  switch (g) {
    case Generator::gaussian_mixture: return "gaussian_mixture";
    case Generator::xor_bands: return "xor_bands";
    case Generator::merged: return "merged";
  }
  return "?";
}

const char* activation_name(Activation a) {
  return a == Activation::relu ? "relu" : "tanh";
}

const char* sim_measure_name(SimMeasureAt s) {
  return s == SimMeasureAt::pretrain ? "pretrain" : "checkpoint";
}

namespace {

[[noreturn]] void bad_field(const std::string& where, const std::string& what) {
  throw ConfigError("config field '" + where + "': " + what);
}

void expect_keys(const ordered_json& obj, const std::string& where,
                 const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) bad_field(where.empty() ? it.key() : where + "." + it.key(),
                                            "unknown key");
  }
}

template <typename T>
void check_numeric(const ordered_json& value, const std::string& where) {
  if (!value.is_number()) bad_field(where, "expected a number");
  if (std::is_unsigned_v<T> && value.is_number_integer() && !value.is_number_unsigned()) {
    bad_field(where, "expected a nonnegative integer");
  }
  if (std::is_integral_v<T> && value.is_number_float()) {
    bad_field(where, "expected an integer");
  }
}

std::string join_path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

template <typename T>
T get_num(const ordered_json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) bad_field(join_path(where, key), "missing");
  check_numeric<T>(obj[key], join_path(where, key));
  return obj[key].get<T>();
}

template <typename T>
T get_num_or(const ordered_json& obj, const std::string& where, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  check_numeric<T>(obj[key], join_path(where, key));
  return obj[key].get<T>();
}

std::string get_str(const ordered_json& obj, const std::string& where, const std::string& key) {
  if (!obj.contains(key)) bad_field(join_path(where, key), "missing");
  if (!obj[key].is_string()) bad_field(join_path(where, key), "expected a string");
  return obj[key].get<std::string>();
}

Generator parse_generator(const std::string& s, const std::string& where) {
  if (s == "gaussian_mixture") return Generator::gaussian_mixture;
  if (s == "xor_bands") return Generator::xor_bands;
  if (s == "merged") return Generator::merged;
  bad_field(where, "unknown generator '" + s + "'");
}

TaskSpec parse_task(const ordered_json& obj, const std::string& where) {
  if (!obj.is_object()) bad_field(where, "expected an object");
  expect_keys(obj, where,
              {"generator", "n_samples", "input_dim", "classes", "cluster_overlap", "seed",
               "sub_tasks"});
  TaskSpec spec;
  spec.generator = parse_generator(get_str(obj, where, "generator"), where + ".generator");
  if (spec.generator == Generator::merged) {
    if (!obj.contains("sub_tasks") || !obj["sub_tasks"].is_array()) {
      bad_field(where + ".sub_tasks", "merged tasks need a sub_tasks array");
    }
    std::size_t k = 0;
    for (const auto& sub : obj["sub_tasks"]) {
      spec.sub_tasks.push_back(parse_task(sub, where + ".sub_tasks[" + std::to_string(k) + "]"));
      ++k;
    }
    spec.n_samples = spec.effective_samples();
    spec.input_dim = spec.sub_tasks.empty() ? 0 : spec.sub_tasks[0].input_dim;
    spec.classes = spec.effective_classes();
    return spec;
  }
  spec.n_samples = get_num<std::size_t>(obj, where, "n_samples");
  spec.input_dim = get_num<std::size_t>(obj, where, "input_dim");
  spec.classes = get_num<std::size_t>(obj, where, "classes");
  spec.cluster_overlap = get_num_or<double>(obj, where, "cluster_overlap", 0.0);
  spec.seed = get_num_or<std::uint64_t>(obj, where, "seed", 0);
  if (obj.contains("sub_tasks")) bad_field(where + ".sub_tasks", "only valid for merged tasks");
  return spec;
}

ordered_json task_to_json(const TaskSpec& spec) {
  ordered_json obj;
  obj["generator"] = generator_name(spec.generator);
  if (spec.generator == Generator::merged) {
    obj["sub_tasks"] = ordered_json::array();
    for (const TaskSpec& sub : spec.sub_tasks) obj["sub_tasks"].push_back(task_to_json(sub));
    return obj;
  }
  obj["n_samples"] = spec.n_samples;
  obj["input_dim"] = spec.input_dim;
  obj["classes"] = spec.classes;
  obj["cluster_overlap"] = spec.cluster_overlap;
  obj["seed"] = spec.seed;
  return obj;
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.version != 1) throw ConfigError("config version must be 1");
  validate_task(cfg.task);
  validate_arch(cfg.arch);
  if (cfg.task.generator != Generator::merged && cfg.arch.input_dim != cfg.task.input_dim) {
    throw ConfigError("arch input_dim does not match the task");
  }
  if (cfg.task.generator == Generator::merged &&
      cfg.arch.input_dim != cfg.task.sub_tasks[0].input_dim) {
    throw ConfigError("arch input_dim does not match the merged sub-tasks");
  }
  if (cfg.arch.classes < cfg.task.effective_classes()) {
    throw ConfigError("arch classes cannot be fewer than task classes");
  }
  if (cfg.seeds.empty()) throw ConfigError("config needs at least one seed");
  if (!cfg.optimizer.eta_auto && !(cfg.optimizer.hyper.eta >= 0.0)) {
    throw ConfigError("optimizer eta must be nonnegative");
  }
  const OptHyper& h = cfg.optimizer.hyper;
  if (!(h.beta >= 0.0 && h.beta < 1.0)) throw ConfigError("momentum beta must lie in [0, 1)");
  if (!(h.beta1 >= 0.0 && h.beta1 < 1.0)) throw ConfigError("beta1 must lie in [0, 1)");
  if (!(h.beta2 >= 0.0 && h.beta2 < 1.0)) throw ConfigError("beta2 must lie in [0, 1)");
  if (!(h.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!(h.lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  if (cfg.output_dir.empty()) throw ConfigError("output_dir must be nonempty");
}

ExperimentConfig parse_config_text(const std::string& json_text) {
  ordered_json root;
  try {
    root = ordered_json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be an object");
  expect_keys(root, "",
              {"version", "task", "arch", "optimizer", "method", "protocol", "mask_policy",
               "sim_measure_at", "epochs", "batch_size", "pretrain", "seeds", "output_dir"});

  ExperimentConfig cfg;
  cfg.version = get_num<int>(root, "", "version");

  if (!root.contains("task")) throw ConfigError("config field 'task': missing");
  cfg.task = parse_task(root["task"], "task");

  if (!root.contains("arch") || !root["arch"].is_object()) {
    throw ConfigError("config field 'arch': missing or not an object");
  }
  const ordered_json& arch = root["arch"];
  expect_keys(arch, "arch", {"input_dim", "hidden", "classes", "activation"});
  cfg.arch.input_dim = get_num<std::size_t>(arch, "arch", "input_dim");
  cfg.arch.classes = get_num<std::size_t>(arch, "arch", "classes");
  cfg.arch.hidden.clear();
  if (arch.contains("hidden")) {
    if (!arch["hidden"].is_array()) bad_field("arch.hidden", "expected an array");
    for (const auto& w : arch["hidden"]) {
      if (!w.is_number()) bad_field("arch.hidden", "expected numbers");
      cfg.arch.hidden.push_back(w.get<std::size_t>());
    }
  }
  if (arch.contains("activation")) {
    const std::string a = get_str(arch, "arch", "activation");
    if (a == "relu") {
      cfg.arch.activation = Activation::relu;
    } else if (a == "tanh") {
      cfg.arch.activation = Activation::tanh;
    } else {
      bad_field("arch.activation", "unknown activation '" + a + "'");
    }
  }

  if (!root.contains("optimizer") || !root["optimizer"].is_object()) {
    throw ConfigError("config field 'optimizer': missing or not an object");
  }
  const ordered_json& opt = root["optimizer"];
  expect_keys(opt, "optimizer", {"kind", "eta", "beta", "beta1", "beta2", "epsilon", "lambda"});
  const std::string kind = get_str(opt, "optimizer", "kind");
  if (kind == "sgd") {
    cfg.optimizer.kind = OptKind::sgd;
  } else if (kind == "momentum") {
    cfg.optimizer.kind = OptKind::momentum;
  } else if (kind == "adam") {
    cfg.optimizer.kind = OptKind::adam;
  } else if (kind == "adamw") {
    cfg.optimizer.kind = OptKind::adamw;
  } else {
    bad_field("optimizer.kind", "unknown optimizer '" + kind + "'");
  }
  cfg.optimizer.hyper = default_hyper(cfg.optimizer.kind);
  if (opt.contains("eta")) {
    if (opt["eta"].is_string()) {
      if (opt["eta"].get<std::string>() != "auto") {
        bad_field("optimizer.eta", "expected a number or \"auto\"");
      }
      cfg.optimizer.eta_auto = true;
    } else if (opt["eta"].is_number()) {
      cfg.optimizer.eta_auto = false;
      cfg.optimizer.hyper.eta = opt["eta"].get<double>();
    } else {
      bad_field("optimizer.eta", "expected a number or \"auto\"");
    }
  }
  cfg.optimizer.hyper.beta = get_num_or<double>(opt, "optimizer", "beta", cfg.optimizer.hyper.beta);
  cfg.optimizer.hyper.beta1 =
      get_num_or<double>(opt, "optimizer", "beta1", cfg.optimizer.hyper.beta1);
  cfg.optimizer.hyper.beta2 =
      get_num_or<double>(opt, "optimizer", "beta2", cfg.optimizer.hyper.beta2);
  cfg.optimizer.hyper.epsilon =
      get_num_or<double>(opt, "optimizer", "epsilon", cfg.optimizer.hyper.epsilon);
  cfg.optimizer.hyper.lambda =
      get_num_or<double>(opt, "optimizer", "lambda", cfg.optimizer.hyper.lambda);

  const std::string method = get_str(root, "", "method");
  if (method == "FT") {
    cfg.method = Method::FT;
  } else if (method == "CNL") {
    cfg.method = Method::CNL;
  } else if (method == "RP") {
    cfg.method = Method::RP;
  } else {
    bad_field("method", "unknown method '" + method + "'");
  }

  if (root.contains("protocol")) {
    const std::string p = get_str(root, "", "protocol");
    if (p == "in_set") {
      cfg.protocol = Protocol::in_set;
    } else if (p == "out_of_set") {
      cfg.protocol = Protocol::out_of_set;
    } else {
      bad_field("protocol", "unknown protocol '" + p + "'");
    }
  }
  if (root.contains("mask_policy")) {
    const std::string p = get_str(root, "", "mask_policy");
    if (p == "per_step") {
      cfg.mask_policy = MaskPolicy::per_step;
    } else if (p == "per_epoch") {
      cfg.mask_policy = MaskPolicy::per_epoch;
    } else if (p == "once") {
      cfg.mask_policy = MaskPolicy::once;
    } else {
      bad_field("mask_policy", "unknown mask_policy '" + p + "'");
    }
  }
  if (root.contains("sim_measure_at")) {
    const std::string s = get_str(root, "", "sim_measure_at");
    if (s == "pretrain") {
      cfg.sim_measure_at = SimMeasureAt::pretrain;
    } else if (s == "checkpoint") {
      cfg.sim_measure_at = SimMeasureAt::checkpoint;
    } else {
      bad_field("sim_measure_at", "unknown value '" + s + "'");
    }
  }
  cfg.epochs = get_num_or<std::size_t>(root, "", "epochs", cfg.epochs);
  cfg.batch_size = get_num_or<std::size_t>(root, "", "batch_size", cfg.batch_size);

  if (root.contains("pretrain")) {
    if (!root["pretrain"].is_object()) bad_field("pretrain", "expected an object");
    const ordered_json& pre = root["pretrain"];
    expect_keys(pre, "pretrain", {"epochs", "eta"});
    cfg.pretrain.epochs = get_num_or<std::size_t>(pre, "pretrain", "epochs", cfg.pretrain.epochs);
    cfg.pretrain.eta = get_num_or<double>(pre, "pretrain", "eta", cfg.pretrain.eta);
  }

  if (!root.contains("seeds") || !root["seeds"].is_array()) {
    throw ConfigError("config field 'seeds': missing or not an array");
  }
  for (const auto& s : root["seeds"]) {
    check_numeric<std::uint64_t>(s, "seeds");
    cfg.seeds.push_back(s.get<std::uint64_t>());
  }
  if (root.contains("output_dir")) cfg.output_dir = get_str(root, "", "output_dir");

  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string config_to_json(const ExperimentConfig& cfg) {
  ordered_json root;
  root["version"] = cfg.version;
  root["task"] = task_to_json(cfg.task);
  root["arch"] = {{"input_dim", cfg.arch.input_dim},
                  {"hidden", cfg.arch.hidden},
                  {"classes", cfg.arch.classes},
                  {"activation", activation_name(cfg.arch.activation)}};
  ordered_json opt;
  opt["kind"] = optimizer_name(cfg.optimizer.kind);
  if (cfg.optimizer.eta_auto) {
    opt["eta"] = "auto";
  } else {
    opt["eta"] = cfg.optimizer.hyper.eta;
  }
  opt["beta"] = cfg.optimizer.hyper.beta;
  opt["beta1"] = cfg.optimizer.hyper.beta1;
  opt["beta2"] = cfg.optimizer.hyper.beta2;
  opt["epsilon"] = cfg.optimizer.hyper.epsilon;
  opt["lambda"] = cfg.optimizer.hyper.lambda;
  root["optimizer"] = opt;
  root["method"] = method_name(cfg.method);
  root["protocol"] = protocol_name(cfg.protocol);
  root["mask_policy"] = mask_policy_name(cfg.mask_policy);
  root["sim_measure_at"] = sim_measure_name(cfg.sim_measure_at);
  root["epochs"] = cfg.epochs;
  root["batch_size"] = cfg.batch_size;
  root["pretrain"] = {{"epochs", cfg.pretrain.epochs}, {"eta", cfg.pretrain.eta}};
  root["seeds"] = cfg.seeds;
  root["output_dir"] = cfg.output_dir;
  return root.dump(2) + "\n";
}

}  // namespace cnl
