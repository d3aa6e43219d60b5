#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "nph/simulate.hpp"
#include "nph/twostep.hpp"

namespace nph {

struct ConventionalMethod {
  TestSpec test = WeightSpec{UnitWeight{}};
};
struct NaiveTwoStepMethod {
  TwoStepConfig config;
};
struct PermutationTwoStepMethod {
  TwoStepConfig config;
};

struct MethodSpec {
  std::string id;
  std::variant<ConventionalMethod, NaiveTwoStepMethod, PermutationTwoStepMethod> kind;
};

struct StudyCell {
  std::string id;
  ScenarioSpec scenario = NullScenario{};
  TrialDesign design;
  std::optional<double> hr;
};

struct StudyConfig {
  std::vector<StudyCell> cells;
  std::vector<MethodSpec> methods;
  std::size_t n_reps = 1000;
  double alpha = 0.025;
  std::uint64_t base_seed = 1;
  // Pre-test levels for two-step methods; empty means each method's own alpha_pre.
  std::vector<double> alpha_pre_grid;
};

void validate(const StudyConfig& config);

struct StudyRow {
  std::string scenario;
  std::string method;
  std::optional<double> alpha_pre;  // two-step methods only
  std::optional<double> hr;
  std::size_t n = 0;
  double recruitment = 0.0;  // months
  double rejection_rate = 0.0;
  double mc_se = 0.0;
  std::size_t n_reps = 0;
  std::size_t errors = 0;  // replicates where the method failed; counted as non-rejections
};

struct StudyOptions {
  int threads = 1;
  // Called once per finished cell with that cell's rows.
  std::function<void(std::span<const StudyRow>)> on_cell;
  // Cells for which this returns true are not run.
  std::function<bool(const StudyCell&)> skip_cell;
  std::function<void(std::string_view)> progress;
};

// Seed of replicate `rep` in cell `cell`; every method in the cell sees the
// same simulated trial.
std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t cell, std::size_t rep);

// Deterministic in config.base_seed and independent of options.threads.
std::vector<StudyRow> run_study(const StudyConfig& config, const StudyOptions& options = {});

// alpha +/- 1.96 * sqrt(alpha (1 - alpha) / n_reps), clipped to [0, 1].
std::pair<double, double> prediction_interval(double alpha, std::size_t n_reps);

struct ConditionalPValue {
  std::size_t replicate = 0;
  double p_pre = 1.0;
  Branch branch = Branch::PH;
  double p_second_step = 1.0;
  double p_logrank = 1.0;
  std::optional<double> p_alternative;
  bool failed = false;
};

// Per-replicate pre-test decision and second-step p-value of a naive two-step
// test, using the same replicate seeds as run_study for cell `cell_index`.
// The alternative p-value is computed for every replicate, not only for the
// NPH branch.
std::vector<ConditionalPValue> export_conditional_pvalues(const StudyCell& cell, std::size_t cell_index,
                                                          std::uint64_t base_seed, const TwoStepConfig& config,
                                                          std::size_t n_reps, int threads = 1);

// Looks up the cell and a two-step method by id in a study config.
std::vector<ConditionalPValue> export_conditional_pvalues(const StudyConfig& config, std::string_view cell_id,
                                                          std::string_view method_id, double alpha_pre,
                                                          std::size_t n_reps, int threads = 1);

}  // namespace nph
