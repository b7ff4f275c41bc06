#include "cnl/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cnl/autodiff.hpp"
#include "cnl/checkpoint.hpp"
#include "cnl/errors.hpp"
#include "cnl/gradsim.hpp"
#include "cnl/harness.hpp"
#include "cnl/model.hpp"
#include "cnl/numio.hpp"

namespace fs = std::filesystem;

namespace cnl {

using ordered_json = nlohmann::ordered_json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) != nullptr) return kExitConfig;
  if (dynamic_cast<const DegenerateError*>(&e) != nullptr) return kExitDegenerate;
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) return kExitNumerical;
  if (dynamic_cast<const IoError*>(&e) != nullptr) return kExitIo;
  return kExitUsage;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

void finish(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

std::string seed_dir_name(std::uint64_t seed) { return "seed" + std::to_string(seed); }

void write_run_csv(const fs::path& path, const RunRecord& rec) {
  std::ofstream out = open_out(path);
  out << "epoch,loss_I,loss_M,learned,forgot\n";
  for (const EpochStat& row : rec.per_epoch) {
    out << row.epoch << ',' << fmt_double(row.loss_injection) << ','
        << fmt_double(row.loss_mastered) << ',' << row.learned << ',' << row.forgot << '\n';
  }
  finish(out, path);
}

void write_steps_csv(const fs::path& path, const RunRecord& rec) {
  std::ofstream out = open_out(path);
  out << "t,S_opt,masked_sum,mask_density,eta\n";
  for (const StepDiagnostics& d : rec.diagnostics) {
    out << d.t << ',' << fmt_double(d.s_opt) << ',' << fmt_double(d.masked_sum) << ','
        << fmt_double(d.mask_density) << ',' << fmt_double(d.eta) << '\n';
  }
  finish(out, path);
}

ordered_json config_echo(const ExperimentConfig& cfg) {
  return ordered_json::parse(config_to_json(cfg));
}

}  // namespace

void cmd_split(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const SampleSet source = synth_dataset(cfg.task);
  const auto segments = task_segments(cfg.task);

  const fs::path path = fs::path(cfg.output_dir) / "split.csv";
  std::ofstream out = open_out(path);
  out << "seed,task,total,mastered,injection\n";
  for (std::uint64_t seed : cfg.seeds) {
    const ParamVector reference =
        pretrain_reference(cfg.task, cfg.arch, cfg.pretrain.epochs, seed, cfg.pretrain.eta);
    const SplitResult split = split_mastered_injection(reference, source, cfg.arch);

    std::vector<std::uint8_t> mastered(source.size(), 0);
    for (std::size_t i : split.mastered_indices) mastered[i] = 1;

    out << seed << ",all," << source.size() << ',' << split.mastered_indices.size() << ','
        << split.injection_indices.size() << '\n';
    if (segments.size() > 1) {
      for (std::size_t s = 0; s < segments.size(); ++s) {
        std::size_t n_mastered = 0;
        for (std::size_t i = segments[s].first; i < segments[s].second; ++i) {
          n_mastered += mastered[i];
        }
        const std::size_t total = segments[s].second - segments[s].first;
        out << seed << ",sub" << s << ',' << total << ',' << n_mastered << ','
            << total - n_mastered << '\n';
      }
    }
  }
  finish(out, path);
}

void cmd_train(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const SampleSet source = synth_dataset(cfg.task);
  const std::string arm = method_name(cfg.method);

  for (std::uint64_t seed : cfg.seeds) {
    const ParamVector start =
        pretrain_reference(cfg.task, cfg.arch, cfg.pretrain.epochs, seed, cfg.pretrain.eta);
    const SplitResult split = split_mastered_injection(start, source, cfg.arch);

    const fs::path dir = fs::path(cfg.output_dir) / seed_dir_name(seed);
    fs::create_directories(dir);

    ParamVector finish_params;
    RunRecord rec;
    try {
      auto result = train(cfg, seed, start, source, split);
      finish_params = std::move(result.first);
      rec = std::move(result.second);
    } catch (const NumericalError& err) {
      throw NumericalError("seed " + std::to_string(seed) + " arm " + arm + ": " + err.what());
    }

    save_checkpoint(start, (dir / (arm + std::string("_start.ckpt"))).string());
    save_checkpoint(finish_params, (dir / (arm + std::string("_end.ckpt"))).string());
    write_run_csv(dir / (arm + std::string(".csv")), rec);
    rec.diagnostics_path = (dir / (arm + std::string("_steps.csv"))).string();
    write_steps_csv(rec.diagnostics_path, rec);

    ordered_json summary;
    summary["config"] = config_echo(cfg);
    summary["seed"] = seed;
    summary["arm"] = arm;
    summary["resolved_eta"] = rec.resolved_eta;
    summary["eval_injection_size"] = rec.eval_injection_size;
    summary["eval_mastered_size"] = rec.eval_mastered_size;
    summary["learned"] = rec.learned;
    summary["forgot"] = rec.forgot;
    summary["learned_pct"] = rec.learned_pct;
    summary["forgot_pct"] = rec.forgot_pct;
    summary["files"] = {{"record", arm + std::string(".csv")},
                        {"steps", arm + std::string("_steps.csv")},
                        {"start_checkpoint", arm + std::string("_start.ckpt")},
                        {"end_checkpoint", arm + std::string("_end.ckpt")}};
    const fs::path jpath = dir / (arm + std::string(".json"));
    std::ofstream jout = open_out(jpath);
    jout << summary.dump(2) << '\n';
    finish(jout, jpath);
  }
}

void cmd_analyze(const ExperimentConfig& cfg, const std::string& checkpoint_path) {
  validate_config(cfg);
  const ParamVector at_checkpoint = load_checkpoint(checkpoint_path);
  validate_params(at_checkpoint, cfg.arch);

  const SampleSet source = synth_dataset(cfg.task);
  const std::uint64_t seed = cfg.seeds.front();
  const ParamVector reference =
      pretrain_reference(cfg.task, cfg.arch, cfg.pretrain.epochs, seed, cfg.pretrain.eta);
  const SplitResult split = split_mastered_injection(reference, source, cfg.arch);

  // Distribution of per-parameter products at the checkpoint.
  const ParamVector gm = loss_and_grad(at_checkpoint, split.mastered, cfg.arch).grad;
  const ParamVector gi = loss_and_grad(at_checkpoint, split.injection, cfg.arch).grad;
  const GradSimReport report = neuron_distribution_report(per_param_similarity(gm, gi));

  const fs::path base = fs::path(cfg.output_dir) / "analysis";
  {
    const fs::path path = base / "gradsim.csv";
    std::ofstream out = open_out(path);
    out << "prop_collab,prop_conflict,grad_collab,grad_conflict,total\n";
    out << fmt_double(report.prop_collaborative) << ',' << fmt_double(report.prop_conflicting)
        << ',' << fmt_double(report.grad_collaborative) << ','
        << fmt_double(report.grad_conflicting) << ',' << fmt_double(report.total) << '\n';
    finish(out, path);
  }

  // Sample groups ranked at the configured measurement point, tallied against
  // what the checkpoint still answers correctly.
  const ParamVector& sim_params =
      cfg.sim_measure_at == SimMeasureAt::pretrain ? reference : at_checkpoint;
  const ParamVector gi_sim = cfg.sim_measure_at == SimMeasureAt::pretrain
                                 ? loss_and_grad(reference, split.injection, cfg.arch).grad
                                 : gi;
  const std::vector<double> sims =
      per_sample_similarities(sim_params, split.mastered, gi_sim, cfg.arch);

  std::string degenerate_note;
  bool have_groups = false;
  SimGroupAssignment groups;
  try {
    groups = sim_dissim_groups(sims);
    have_groups = true;
  } catch (const DegenerateError& err) {
    degenerate_note = err.what();
  }

  const CorrectnessMask now = evaluate_correctness(at_checkpoint, split.mastered, cfg.arch);
  std::vector<std::uint8_t> forgot_flags(now.size());
  for (std::size_t k = 0; k < now.size(); ++k) forgot_flags[k] = now.flags[k] ? 0 : 1;

  {
    const fs::path path = base / "groups.csv";
    std::ofstream out = open_out(path);
    out << "group,size,forgot,rate\n";
    if (have_groups) {
      const GroupForgettingTable table = forgetting_by_group(groups, forgot_flags);
      auto row = [&](const char* name, const GroupForgetting& g) {
        out << name << ',' << g.size << ',' << g.forgot << ',' << fmt_double(g.rate) << '\n';
      };
      row("sim", table.sim);
      row("middle", table.middle);
      row("dissim", table.dissim);
      row("excluded", table.excluded);
    }
    finish(out, path);
  }

  ordered_json summary;
  summary["config"] = config_echo(cfg);
  summary["checkpoint"] = checkpoint_path;
  summary["seed"] = seed;
  summary["report"] = {{"prop_collab", report.prop_collaborative},
                       {"prop_conflict", report.prop_conflicting},
                       {"grad_collab", report.grad_collaborative},
                       {"grad_conflict", report.grad_conflicting},
                       {"total", report.total}};
  summary["sim_groups"] = have_groups ? ordered_json("ok") : ordered_json(degenerate_note);
  const fs::path jpath = base / "analysis.json";
  std::ofstream jout = open_out(jpath);
  jout << summary.dump(2) << '\n';
  finish(jout, jpath);
}

void cmd_curves(const std::string& run_dir, const std::string& out_dir) {
  if (!fs::is_directory(run_dir)) throw IoError("run directory not found: " + run_dir);

  std::vector<fs::path> seed_dirs;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("seed", 0) == 0) {
      seed_dirs.push_back(entry.path());
    }
  }
  std::sort(seed_dirs.begin(), seed_dirs.end());

  static const char* kArms[] = {"FT", "CNL", "RP"};
  static const char* kMetrics[] = {"loss_I", "loss_M", "learned", "forgot"};

  std::size_t records = 0;
  std::ostringstream body;
  for (const fs::path& dir : seed_dirs) {
    for (const char* arm : kArms) {
      const fs::path csv = dir / (std::string(arm) + ".csv");
      if (!fs::exists(csv)) continue;

      std::string optimizer = "?";
      const fs::path jpath = dir / (std::string(arm) + ".json");
      if (fs::exists(jpath)) {
        std::ifstream jin(jpath, std::ios::binary);
        try {
          const auto summary = nlohmann::json::parse(jin);
          optimizer = summary.at("config").at("optimizer").at("kind").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
          throw IoError("malformed summary " + jpath.string() + ": " + e.what());
        }
      }

      std::ifstream in(csv, std::ios::binary);
      if (!in) throw IoError("cannot open " + csv.string());
      std::string line;
      if (!std::getline(in, line) || line != "epoch,loss_I,loss_M,learned,forgot") {
        throw IoError("unexpected record header in " + csv.string());
      }
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t at = 0;
        while (at <= line.size()) {
          const std::size_t comma = line.find(',', at);
          if (comma == std::string::npos) {
            fields.push_back(line.substr(at));
            break;
          }
          fields.push_back(line.substr(at, comma - at));
          at = comma + 1;
        }
        if (fields.size() != 5) throw IoError("malformed record row in " + csv.string());
        if (fields[0] == "0") continue;  // pre-update baseline is not a curve point
        for (std::size_t m = 0; m < 4; ++m) {
          body << arm << ',' << optimizer << ',' << fields[0] << ',' << kMetrics[m] << ','
               << fields[m + 1] << '\n';
        }
      }
      ++records;
    }
  }
  if (records == 0) throw IoError("no run records under " + run_dir);

  const fs::path path = fs::path(out_dir) / "curves.csv";
  std::ofstream out = open_out(path);
  out << "arm,optimizer,epoch,metric,value\n";
  out << body.str();
  finish(out, path);
}

}  // namespace cnl
