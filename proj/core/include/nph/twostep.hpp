#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nph/coxph.hpp"
#include "nph/error.hpp"
#include "nph/maxcombo.hpp"
#include "nph/random.hpp"
#include "nph/survival.hpp"
#include "nph/wlrt.hpp"

namespace nph {

using TestSpec = std::variant<WeightSpec, MaxComboSpec>;

std::string describe(const TestSpec& spec);
void validate(const TestSpec& spec);

// One-sided p-value of a conventional test (benefit direction).
double test_p_value(const SurvivalSample& sample, const TestSpec& spec);

enum class TieRule {
  LessEqual,        // #{p_i <= p0} / m
  StrictLT,         // #{p_i <  p0} / m
  AddOneSmoothing,  // (1 + #{p_i <= p0}) / (m + 1)
};

enum class Branch { PH, NPH };

std::string_view to_string(TieRule rule) noexcept;
std::string_view to_string(Branch branch) noexcept;

struct TwoStepConfig {
  double alpha = 0.025;     // one-sided level of the final test
  double alpha_pre = 0.05;  // two-sided level of the PH pre-test
  TestSpec alternative = MaxComboSpec::lin_without_logrank();
  std::size_t permutations = 2500;
  std::uint64_t seed = 1;
  TieRule tie_rule = TieRule::LessEqual;
  int threads = 1;
};

// Throws InvalidArgument for out-of-range levels, m = 0, or a max-combo
// alternative that contains the log-rank test.
void validate(const TwoStepConfig& config);

struct TwoStepResult {
  double alpha_pre = 0.0;
  double p_pre = 1.0;
  bool pretest_degenerate = false;  // pre-test had no time trend to test; PH branch used
  Branch branch = Branch::PH;
  double p0 = 1.0;       // naive two-step p-value on the observed labels
  double p_final = 1.0;  // p0 for the naive test, permutation p-value otherwise
  bool reject = false;
  std::size_t exceed_count = 0;
  std::size_t permutations = 0;
  std::size_t failed_permutations = 0;
};

// Pre-test p-value and both candidate second-step p-values for one labelling.
struct TwoStepOutcome {
  double p_pre = 1.0;
  bool pretest_degenerate = false;
  double p_logrank = 1.0;
  std::optional<double> p_alternative;  // computed only when the NPH branch can be taken

  // Second-step p-value at pre-test level alpha_pre (NPH iff p_pre <= alpha_pre).
  double p_value(double alpha_pre) const;
  Branch branch(double alpha_pre) const;
};

// Evaluates the two-step procedure for arbitrary relabellings of one sample.
// The risk sets, pooled KM curve, weights and KM time transform do not depend
// on the labels and are computed once.
class TwoStepEvaluator {
 public:
  TwoStepEvaluator(const SurvivalSample& sample, TestSpec alternative);

  // The alternative test is run only if p_pre <= alternative_up_to.
  TwoStepOutcome evaluate(std::span<const Arm> arms, double alternative_up_to) const;

  std::span<const Arm> observed_arms() const noexcept { return arms_; }

 private:
  RiskSetIndex index_;
  std::vector<Arm> arms_;
  TestSpec alternative_;
  std::vector<double> unit_weights_;
  std::vector<std::vector<double>> alternative_weights_;
  std::optional<Error> alternative_error_;
};

TwoStepResult naive_two_step(const SurvivalSample& sample, const TwoStepConfig& config);

// Fisher-Yates shuffle of the labels in place.
void shuffle_arms(std::span<Arm> arms, Stream& stream);

// Uniform random relabelling; group sizes and (time, event) pairs are kept.
SurvivalSample permute_labels(const SurvivalSample& sample, Stream& stream);

// Permutation two-step test: the complete two-step procedure, pre-test
// included, is re-run on every relabelling. Permutation i draws from
// Stream::derive(config.seed, {i}), so results do not depend on threads.
// A relabelling whose tests fail contributes p_i = 1.
TwoStepResult permutation_two_step(const SurvivalSample& sample, const TwoStepConfig& config);

// Same permutations evaluated for several pre-test levels at once.
std::vector<TwoStepResult> permutation_two_step(const SurvivalSample& sample, const TwoStepConfig& config,
                                                std::span<const double> alpha_pres);

}  // namespace nph
