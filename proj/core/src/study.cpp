#include "nph/study.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "nph/error.hpp"

namespace nph {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

enum Outcome : unsigned char { kAccept = 0, kReject = 1, kFailed = 2 };

const TwoStepConfig* two_step_config(const MethodSpec& m) {
  return std::visit(overloaded{
                        [](const ConventionalMethod&) -> const TwoStepConfig* { return nullptr; },
                        [](const NaiveTwoStepMethod& n) -> const TwoStepConfig* { return &n.config; },
                        [](const PermutationTwoStepMethod& p) -> const TwoStepConfig* { return &p.config; },
                    },
                    m.kind);
}

// Pre-test levels at which a method is reported.
std::vector<double> levels_for(const MethodSpec& m, const StudyConfig& config) {
  const auto* ts = two_step_config(m);
  if (!ts) return {std::nan("")};
  if (!config.alpha_pre_grid.empty()) return config.alpha_pre_grid;
  return {ts->alpha_pre};
}

}  // namespace

std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t cell, std::size_t rep) {
  return mix_seed(mix_seed(base_seed, cell), rep);
}

void validate(const StudyConfig& config) {
  if (config.cells.empty()) throw Error(ErrorCode::InvalidArgument, "study has no cells");
  if (config.methods.empty()) throw Error(ErrorCode::InvalidArgument, "study has no methods");
  if (config.n_reps == 0) throw Error(ErrorCode::InvalidArgument, "n_reps must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  }
  for (double a : config.alpha_pre_grid) {
    if (!(a >= 0.0 && a <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha_pre grid values must lie in [0, 1]");
  }
  std::set<std::string> ids;
  for (const auto& m : config.methods) {
    if (!ids.insert(m.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate method id '" + m.id + "'");
    std::visit(overloaded{
                   [](const ConventionalMethod& c) { validate(c.test); },
                   [](const NaiveTwoStepMethod& n) { validate(n.config); },
                   [](const PermutationTwoStepMethod& p) { validate(p.config); },
               },
               m.kind);
  }
  std::set<std::string> cells;
  for (const auto& c : config.cells) {
    if (!cells.insert(c.id).second) throw Error(ErrorCode::InvalidArgument, "duplicate cell id '" + c.id + "'");
    validate(c.scenario);
    validate(c.design);
  }
}

std::vector<StudyRow> run_study(const StudyConfig& config, const StudyOptions& options) {
  validate(config);

  // Result slots: one per (method, pre-test level).
  struct Slot {
    std::size_t method;
    double alpha_pre;
  };
  std::vector<Slot> slots;
  std::vector<std::size_t> first_slot;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    first_slot.push_back(slots.size());
    for (double a : levels_for(config.methods[m], config)) slots.push_back({m, a});
  }
  const std::size_t width = slots.size();
  const std::size_t reps = config.n_reps;

  std::vector<StudyRow> all_rows;
  for (std::size_t c = 0; c < config.cells.size(); ++c) {
    const auto& cell = config.cells[c];
    if (options.skip_cell && options.skip_cell(cell)) continue;
    if (options.progress) options.progress("cell " + cell.id);

    std::vector<unsigned char> outcome(reps * width, kAccept);

#pragma omp parallel for schedule(dynamic, 1) num_threads(std::max(1, options.threads))
    for (std::size_t r = 0; r < reps; ++r) {
      unsigned char* row = outcome.data() + r * width;
      std::optional<SurvivalSample> sample;
      try {
        sample = simulate_trial(cell.scenario, cell.design, replicate_seed(config.base_seed, c, r)).analysis_sample();
      } catch (const Error&) {
        std::fill(row, row + width, kFailed);
        continue;
      }
      for (std::size_t m = 0; m < config.methods.size(); ++m) {
        const auto& method = config.methods[m];
        const std::size_t s0 = first_slot[m];
        const auto levels = levels_for(method, config);
        try {
          std::visit(
              overloaded{
                  [&](const ConventionalMethod& conv) {
                    row[s0] = test_p_value(*sample, conv.test) <= config.alpha ? kReject : kAccept;
                  },
                  [&](const NaiveTwoStepMethod& naive) {
                    const TwoStepEvaluator evaluator(*sample, naive.config.alternative);
                    const double widest = *std::max_element(levels.begin(), levels.end());
                    const auto o = evaluator.evaluate(evaluator.observed_arms(), widest);
                    for (std::size_t l = 0; l < levels.size(); ++l) {
                      row[s0 + l] = o.p_value(levels[l]) <= config.alpha ? kReject : kAccept;
                    }
                  },
                  [&](const PermutationTwoStepMethod& perm) {
                    auto cfg = perm.config;
                    cfg.alpha = config.alpha;
                    cfg.threads = 1;
                    cfg.seed = mix_seed(mix_seed(perm.config.seed, c), r);
                    const auto results = permutation_two_step(*sample, cfg, levels);
                    for (std::size_t l = 0; l < levels.size(); ++l) {
                      row[s0 + l] = results[l].reject ? kReject : kAccept;
                    }
                  },
              },
              method.kind);
        } catch (const Error&) {
          std::fill(row + s0, row + s0 + levels.size(), kFailed);
        }
      }
    }

    std::vector<StudyRow> rows;
    for (std::size_t s = 0; s < width; ++s) {
      StudyRow row;
      row.scenario = cell.id;
      row.method = config.methods[slots[s].method].id;
      if (!std::isnan(slots[s].alpha_pre)) row.alpha_pre = slots[s].alpha_pre;
      row.hr = cell.hr;
      row.n = cell.design.n_total;
      row.recruitment = cell.design.recruitment_window;
      row.n_reps = reps;
      std::size_t hits = 0;
      for (std::size_t r = 0; r < reps; ++r) {
        const auto o = outcome[r * width + s];
        hits += o == kReject;
        row.errors += o == kFailed;
      }
      row.rejection_rate = static_cast<double>(hits) / static_cast<double>(reps);
      row.mc_se = std::sqrt(row.rejection_rate * (1.0 - row.rejection_rate) / static_cast<double>(reps));
      rows.push_back(std::move(row));
    }
    if (options.on_cell) options.on_cell(rows);
    all_rows.insert(all_rows.end(), rows.begin(), rows.end());
  }
  return all_rows;
}

std::pair<double, double> prediction_interval(double alpha, std::size_t n_reps) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  if (n_reps == 0) throw Error(ErrorCode::InvalidArgument, "n_reps must be >= 1");
  const double half = 1.96 * std::sqrt(alpha * (1.0 - alpha) / static_cast<double>(n_reps));
  return {std::max(0.0, alpha - half), std::min(1.0, alpha + half)};
}

std::vector<ConditionalPValue> export_conditional_pvalues(const StudyCell& cell, std::size_t cell_index,
                                                          std::uint64_t base_seed, const TwoStepConfig& config,
                                                          std::size_t n_reps, int threads) {
  validate(config);
  validate(cell.scenario);
  validate(cell.design);
  std::vector<ConditionalPValue> out(n_reps);
#pragma omp parallel for schedule(dynamic, 4) num_threads(std::max(1, threads))
  for (std::size_t r = 0; r < n_reps; ++r) {
    auto& row = out[r];
    row.replicate = r;
    try {
      const auto sample =
          simulate_trial(cell.scenario, cell.design, replicate_seed(base_seed, cell_index, r)).analysis_sample();
      const TwoStepEvaluator evaluator(sample, config.alternative);
      const auto o = evaluator.evaluate(evaluator.observed_arms(), 1.0);
      row.p_pre = o.p_pre;
      row.branch = o.branch(config.alpha_pre);
      row.p_logrank = o.p_logrank;
      row.p_alternative = o.p_alternative;
      row.p_second_step = o.p_value(config.alpha_pre);
    } catch (const Error&) {
      row.failed = true;
    }
  }
  return out;
}

std::vector<ConditionalPValue> export_conditional_pvalues(const StudyConfig& config, std::string_view cell_id,
                                                          std::string_view method_id, double alpha_pre,
                                                          std::size_t n_reps, int threads) {
  const auto cell = std::find_if(config.cells.begin(), config.cells.end(),
                                 [&](const StudyCell& c) { return c.id == cell_id; });
  if (cell == config.cells.end()) {
    throw Error(ErrorCode::InvalidArgument, "unknown cell '" + std::string(cell_id) + "'");
  }
  const auto method = std::find_if(config.methods.begin(), config.methods.end(),
                                   [&](const MethodSpec& m) { return m.id == method_id; });
  if (method == config.methods.end() || !two_step_config(*method)) {
    throw Error(ErrorCode::InvalidArgument, "'" + std::string(method_id) + "' is not a two-step method");
  }
  auto cfg = *two_step_config(*method);
  cfg.alpha_pre = alpha_pre;
  cfg.alpha = config.alpha;
  return export_conditional_pvalues(*cell, static_cast<std::size_t>(cell - config.cells.begin()), config.base_seed,
                                    cfg, n_reps, threads);
}

}  // namespace nph
