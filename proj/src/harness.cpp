#include "cnl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cnl/autodiff.hpp"
#include "cnl/errors.hpp"
#include "cnl/model.hpp"
#include "cnl/rng.hpp"

namespace cnl {

namespace {

// Stream tags for deriving independent rng streams from one run seed.
constexpr std::uint64_t kInjectionSplitStream = 0x73706c2d69ULL;  // injection eval split
constexpr std::uint64_t kMasteredSplitStream = 0x73706c2d6dULL;   // mastered eval split
constexpr std::uint64_t kReplayStream = 0x7265706c61ULL;          // replay interleave
constexpr std::uint64_t kBatchStream = 0x6261746368ULL;           // mini-batch order

double sup_norm(const std::vector<double>& v) {
  double mx = 0.0;
  for (double x : v) {
    const double a = std::fabs(x);
    if (a > mx) mx = a;
  }
  return mx;
}

void check_split(const SplitResult& split, const SampleSet& source) {
  if (split.mastered_indices.size() + split.injection_indices.size() != source.size()) {
    throw ConfigError("split does not cover the source set");
  }
  for (std::size_t i : split.mastered_indices) {
    if (i >= source.size()) throw ConfigError("split: mastered index out of range");
  }
  for (std::size_t i : split.injection_indices) {
    if (i >= source.size()) throw ConfigError("split: injection index out of range");
  }
}

}  // namespace

SampleSet subset(const SampleSet& set, const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw ConfigError("subset: no indices");
  SampleSet out;
  out.inputs = DenseArray::zeros({indices.size(), set.inputs.cols()});
  out.labels.resize(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const std::size_t i = indices[r];
    if (i >= set.size()) throw ConfigError("subset: index out of range");
    const double* src = set.inputs.row(i);
    double* dst = out.inputs.row(r);
    for (std::size_t k = 0; k < set.inputs.cols(); ++k) dst[k] = src[k];
    out.labels[r] = set.labels[i];
  }
  return out;
}

ParamVector pretrain_reference(const TaskSpec& spec, const ModelArch& arch, std::size_t epochs,
                               std::uint64_t seed, double eta,
                               std::vector<double>* loss_trace) {
  validate_task(spec);
  validate_arch(arch);
  const SampleSet set = synth_dataset(spec);
  if (set.inputs.cols() != arch.input_dim) {
    throw ConfigError("pretrain: task input_dim does not match arch");
  }
  if (spec.effective_classes() > arch.classes) {
    throw ConfigError("pretrain: task classes exceed arch classes");
  }
  ParamVector params = init_model(arch, seed);
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    const LossGrad lg = loss_and_grad(params, set, arch);
    UpdateDirection dir;
    dir.u = lg.grad.values;
    params = apply_update(params, dir, eta, nullptr);
    if (loss_trace != nullptr) loss_trace->push_back(loss_only(params, set, arch));
  }
  return params;
}

SplitResult split_mastered_injection(const ParamVector& params, const SampleSet& set,
                                     const ModelArch& arch) {
  const CorrectnessMask mask = evaluate_correctness(params, set, arch);
  SplitResult split;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (mask.flags[i]) {
      split.mastered_indices.push_back(i);
    } else {
      split.injection_indices.push_back(i);
    }
  }
  if (split.mastered_indices.empty()) {
    throw DegenerateError("mastered set is empty: the reference model answers nothing correctly");
  }
  if (split.injection_indices.empty()) {
    throw DegenerateError("injection set is empty: the reference model answers everything");
  }
  split.mastered = subset(set, split.mastered_indices);
  split.injection = subset(set, split.injection_indices);
  return split;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out_of_set_split(
    const std::vector<std::size_t>& indices, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0) || !(ratio < 1.0)) {
    throw DegenerateError("out_of_set_split: ratio " + std::to_string(ratio) +
                          " leaves one side empty");
  }
  if (indices.size() < 2) {
    throw DegenerateError("out_of_set_split: need at least 2 indices, got " +
                          std::to_string(indices.size()));
  }
  std::vector<std::size_t> order = indices;
  Rng rng(seed);
  rng.shuffle(order);
  std::size_t n_train =
      static_cast<std::size_t>(std::floor(ratio * static_cast<double>(order.size()) + 0.5));
  if (n_train < 1) n_train = 1;
  if (n_train > order.size() - 1) n_train = order.size() - 1;
  std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> eval(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(eval.begin(), eval.end());
  return {std::move(train), std::move(eval)};
}

std::pair<std::size_t, std::size_t> measure_learning_forgetting(const CorrectnessMask& before,
                                                                const CorrectnessMask& after,
                                                                const SplitResult& split) {
  if (before.size() != after.size()) {
    throw ConfigError("measure_learning_forgetting: mask sizes differ");
  }
  std::size_t learned = 0;
  std::size_t forgot = 0;
  for (std::size_t i : split.injection_indices) {
    if (i >= before.size()) throw ConfigError("measure_learning_forgetting: index out of range");
    if (!before.flags[i] && after.flags[i]) ++learned;
  }
  for (std::size_t i : split.mastered_indices) {
    if (i >= before.size()) throw ConfigError("measure_learning_forgetting: index out of range");
    if (before.flags[i] && !after.flags[i]) ++forgot;
  }
  return {learned, forgot};
}

GroupForgettingTable forgetting_by_group(const SimGroupAssignment& groups,
                                         const std::vector<std::uint8_t>& forgot_flags) {
  auto tally = [&](const std::vector<std::size_t>& members) {
    GroupForgetting g;
    g.size = members.size();
    for (std::size_t k : members) {
      if (k >= forgot_flags.size()) {
        throw ConfigError("forgetting_by_group: group index out of range");
      }
      g.forgot += forgot_flags[k] ? 1 : 0;
    }
    g.rate = g.size == 0 ? 0.0 : static_cast<double>(g.forgot) / static_cast<double>(g.size);
    return g;
  };
  GroupForgettingTable table;
  table.sim = tally(groups.sim);
  table.middle = tally(groups.middle);
  table.dissim = tally(groups.dissim);
  table.excluded = tally(groups.excluded);
  return table;
}

double resolve_auto_eta(const OptimizerConfig& opt, const ParamVector& start,
                        const SampleSet& train_injection, const ModelArch& arch) {
  const LossGrad gi = loss_and_grad(start, train_injection, arch);
  const double g_inf = sup_norm(gi.grad.values);
  OptimizerState probe = OptimizerState::make(opt.kind, opt.hyper, start.size());
  probe.t = 1;
  const UpdateDirection u1 = update_direction(probe, gi.grad, start);
  const double u_inf = sup_norm(u1.u);
  const double denom = g_inf > u_inf ? g_inf : u_inf;
  return denom > 0.0 ? kSmallEtaScale / denom : kSmallEtaScale;
}

std::pair<ParamVector, RunRecord> train(const ExperimentConfig& cfg, std::uint64_t seed,
                                        const ParamVector& start, const SampleSet& source,
                                        const SplitResult& split) {
  validate_config(cfg);
  validate_params(start, cfg.arch);
  validate_sample_set(source, cfg.arch.classes);
  check_split(split, source);

  // Protocol subsets.  In-set trains and evaluates on the split itself;
  // out-of-set holds half of each side back for evaluation.
  std::vector<std::size_t> train_injection_idx;
  std::vector<std::size_t> eval_injection_idx;
  std::vector<std::size_t> mastered_train_idx;
  std::vector<std::size_t> eval_mastered_idx;
  if (cfg.protocol == Protocol::in_set) {
    train_injection_idx = split.injection_indices;
    eval_injection_idx = split.injection_indices;
    mastered_train_idx = split.mastered_indices;
    eval_mastered_idx = split.mastered_indices;
  } else {
    auto inj = out_of_set_split(split.injection_indices, kEvalSplitRatio,
                                mix_seed(seed, kInjectionSplitStream));
    auto mas = out_of_set_split(split.mastered_indices, kEvalSplitRatio,
                                mix_seed(seed, kMasteredSplitStream));
    train_injection_idx = std::move(inj.first);
    eval_injection_idx = std::move(inj.second);
    mastered_train_idx = std::move(mas.first);
    eval_mastered_idx = std::move(mas.second);
  }

  // RP folds the mastered training material into the optimization set.
  std::vector<std::size_t> train_idx = train_injection_idx;
  if (cfg.method == Method::RP) {
    train_idx.insert(train_idx.end(), mastered_train_idx.begin(), mastered_train_idx.end());
    Rng rng(mix_seed(seed, kReplayStream));
    rng.shuffle(train_idx);
  }

  const SampleSet train_set = subset(source, train_idx);
  const SampleSet mastered_train = subset(source, mastered_train_idx);
  const SampleSet eval_injection = subset(source, eval_injection_idx);
  const SampleSet eval_mastered = subset(source, eval_mastered_idx);

  const double eta = cfg.optimizer.eta_auto
                         ? resolve_auto_eta(cfg.optimizer, start, train_set, cfg.arch)
                         : cfg.optimizer.hyper.eta;
  OptHyper hyper = cfg.optimizer.hyper;
  hyper.eta = eta;
  OptimizerState state = OptimizerState::make(cfg.optimizer.kind, hyper, start.size());

  const CorrectnessMask before = evaluate_correctness(start, source, cfg.arch);

  RunRecord rec;
  rec.resolved_eta = eta;
  rec.eval_injection_size = eval_injection_idx.size();
  rec.eval_mastered_size = eval_mastered_idx.size();

  ParamVector params = start;
  CorrectnessMask after = before;

  auto record_epoch = [&](std::size_t epoch) {
    after = evaluate_correctness(params, source, cfg.arch);
    EpochStat stat;
    stat.epoch = epoch;
    stat.loss_injection = loss_only(params, eval_injection, cfg.arch);
    stat.loss_mastered = loss_only(params, eval_mastered, cfg.arch);
    for (std::size_t i : eval_injection_idx) {
      if (!before.flags[i] && after.flags[i]) ++stat.learned;
    }
    for (std::size_t i : eval_mastered_idx) {
      if (before.flags[i] && !after.flags[i]) ++stat.forgot;
    }
    rec.per_epoch.push_back(stat);
  };

  record_epoch(0);

  ParamVector mastered_grad;  // most recent full-batch gradient over the mastered source
  NeuronMask held_mask;
  bool have_mask = false;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    try {
      // Batch layout for the epoch; full batch unless configured otherwise.
      std::vector<std::size_t> order(train_set.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::size_t batch = cfg.batch_size == 0 ? train_set.size() : cfg.batch_size;
      if (batch > train_set.size()) batch = train_set.size();
      if (cfg.batch_size != 0) {
        Rng rng(mix_seed(mix_seed(seed, kBatchStream), epoch));
        rng.shuffle(order);
      }

      for (std::size_t pos = 0, batch_index = 0; pos < order.size(); pos += batch, ++batch_index) {
        const std::size_t take = std::min(batch, order.size() - pos);
        SampleSet batch_set;
        if (cfg.batch_size == 0) {
          batch_set = train_set;
        } else {
          const std::vector<std::size_t> rows(order.begin() + pos, order.begin() + pos + take);
          batch_set = subset(train_set, rows);
        }

        const LossGrad gi = loss_and_grad(params, batch_set, cfg.arch);
        state.t += 1;
        const UpdateDirection u = update_direction(state, gi.grad, params);

        const NeuronMask* mask = nullptr;
        if (cfg.method == Method::CNL) {
          const bool refresh = cfg.mask_policy == MaskPolicy::per_step ||
                               (cfg.mask_policy == MaskPolicy::per_epoch && batch_index == 0) ||
                               (cfg.mask_policy == MaskPolicy::once && !have_mask);
          if (refresh) {
            mastered_grad = loss_and_grad(params, mastered_train, cfg.arch).grad;
            held_mask = cnl_mask(mastered_grad, u);
            have_mask = true;
          }
          mask = &held_mask;
        }

        StepDiagnostics diag;
        diag.t = state.t;
        diag.eta = eta;
        if (cfg.method == Method::CNL) {
          double s_opt = 0.0;
          double kept = 0.0;
          for (std::size_t j = 0; j < u.size(); ++j) {
            const double prod = mastered_grad.values[j] * u.u[j];
            s_opt += prod;
            if (mask->keep[j]) kept += prod;
          }
          diag.s_opt = s_opt;
          diag.masked_sum = kept;
          diag.mask_density =
              static_cast<double>(mask->kept()) / static_cast<double>(mask->size());
        } else {
          diag.s_opt = std::numeric_limits<double>::quiet_NaN();
          diag.masked_sum = std::numeric_limits<double>::quiet_NaN();
          diag.mask_density = 1.0;
        }
        rec.diagnostics.push_back(diag);

        params = apply_update(params, u, eta, mask);
      }
      record_epoch(epoch);
    } catch (const NumericalError& err) {
      throw NumericalError("epoch " + std::to_string(epoch) + ": " + err.what());
    }
  }

  const EpochStat& last = rec.per_epoch.back();
  rec.learned = last.learned;
  rec.forgot = last.forgot;
  rec.learned_pct = rec.eval_injection_size == 0
                        ? 0.0
                        : static_cast<double>(rec.learned) /
                              static_cast<double>(rec.eval_injection_size);
  rec.forgot_pct = rec.eval_mastered_size == 0
                       ? 0.0
                       : static_cast<double>(rec.forgot) /
                             static_cast<double>(rec.eval_mastered_size);
  rec.learned_flags.resize(eval_injection_idx.size());
  for (std::size_t k = 0; k < eval_injection_idx.size(); ++k) {
    const std::size_t i = eval_injection_idx[k];
    rec.learned_flags[k] = (!before.flags[i] && after.flags[i]) ? 1 : 0;
  }
  rec.forgot_flags.resize(eval_mastered_idx.size());
  for (std::size_t k = 0; k < eval_mastered_idx.size(); ++k) {
    const std::size_t i = eval_mastered_idx[k];
    rec.forgot_flags[k] = (before.flags[i] && !after.flags[i]) ? 1 : 0;
  }
  return {std::move(params), std::move(rec)};
}

}  // namespace cnl
