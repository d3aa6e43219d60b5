#include "nph/twostep.hpp"

#include <algorithm>
#include <cmath>
#include <omp.h>

#include "nph/error.hpp"

namespace nph {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_level(double v, bool open, const char* name) {
  const bool ok = open ? (v > 0.0 && v < 1.0) : (v >= 0.0 && v <= 1.0);
  if (!ok) throw Error(ErrorCode::InvalidArgument, std::string(name) + " out of range");
}

double exceedance_p(TieRule rule, std::size_t count, std::size_t m) {
  const double c = static_cast<double>(count);
  const double md = static_cast<double>(m);
  return rule == TieRule::AddOneSmoothing ? (1.0 + c) / (md + 1.0) : c / md;
}

}  // namespace

std::string describe(const TestSpec& spec) {
  return std::visit([](const auto& s) { return describe(s); }, spec);
}

void validate(const TestSpec& spec) {
  std::visit([](const auto& s) { validate(s); }, spec);
}

double test_p_value(const SurvivalSample& sample, const TestSpec& spec) {
  return std::visit(overloaded{
                        [&](const WeightSpec& w) { return weighted_logrank(sample, w).p_one_sided; },
                        [&](const MaxComboSpec& m) { return maxcombo_test(sample, m).p_adjusted; },
                    },
                    spec);
}

std::string_view to_string(TieRule rule) noexcept {
  switch (rule) {
    case TieRule::LessEqual: return "le";
    case TieRule::StrictLT: return "lt";
    case TieRule::AddOneSmoothing: return "add-one";
  }
  return "le";
}

std::string_view to_string(Branch branch) noexcept { return branch == Branch::NPH ? "NPH" : "PH"; }

void validate(const TwoStepConfig& config) {
  check_level(config.alpha, true, "alpha");
  check_level(config.alpha_pre, false, "alpha_pre");
  if (config.permutations == 0) throw Error(ErrorCode::InvalidArgument, "permutations must be >= 1");
  validate(config.alternative);
  if (const auto* m = std::get_if<MaxComboSpec>(&config.alternative); m && m->includes_logrank()) {
    throw Error(ErrorCode::InvalidArgument,
                "two-step max-combo alternative must not contain the log-rank test");
  }
}

double TwoStepOutcome::p_value(double alpha_pre) const {
  if (branch(alpha_pre) == Branch::PH) return p_logrank;
  if (!p_alternative) throw Error(ErrorCode::InvalidArgument, "alternative test was not evaluated");
  return *p_alternative;
}

Branch TwoStepOutcome::branch(double alpha_pre) const {
  return !pretest_degenerate && p_pre <= alpha_pre ? Branch::NPH : Branch::PH;
}

TwoStepEvaluator::TwoStepEvaluator(const SurvivalSample& sample, TestSpec alternative)
    : index_(sample), arms_(sample.arms()), alternative_(std::move(alternative)) {
  validate(alternative_);
  if (!sample.has_both_arms()) {
    throw Error(ErrorCode::InvalidArgument, "both arms need at least one subject");
  }
  const auto& pooled = index_.pooled();
  const auto km = km_from_table(pooled);
  unit_weights_.assign(pooled.size(), 1.0);
  try {
    std::visit(overloaded{
                   [&](const WeightSpec& w) { alternative_weights_.push_back(compute_weights(w, pooled, km)); },
                   [&](const MaxComboSpec& m) {
                     for (const auto& c : m.components) {
                       alternative_weights_.push_back(compute_weights(c, pooled, km));
                     }
                   },
               },
               alternative_);
  } catch (const Error& e) {
    if (!e.is_degenerate()) throw;
    alternative_error_ = e;
  }
}

TwoStepOutcome TwoStepEvaluator::evaluate(std::span<const Arm> arms, double alternative_up_to) const {
  const auto table = index_.table(arms);
  TwoStepOutcome out;
  try {
    out.p_pre = gt_test(table).p_pre;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ConstantTransform) throw;
    out.pretest_degenerate = true;
    out.p_pre = 1.0;
  }
  out.p_logrank = weighted_logrank(table, unit_weights_).p_one_sided;
  if (!out.pretest_degenerate && out.p_pre <= alternative_up_to) {
    if (alternative_error_) throw *alternative_error_;
    out.p_alternative = std::visit(
        overloaded{
            [&](const WeightSpec&) { return weighted_logrank(table, alternative_weights_.front()).p_one_sided; },
            [&](const MaxComboSpec& m) { return maxcombo_test(table, alternative_weights_, m).p_adjusted; },
        },
        alternative_);
  }
  return out;
}

TwoStepResult naive_two_step(const SurvivalSample& sample, const TwoStepConfig& config) {
  validate(config);
  const TwoStepEvaluator evaluator(sample, config.alternative);
  const auto outcome = evaluator.evaluate(evaluator.observed_arms(), config.alpha_pre);
  TwoStepResult out;
  out.alpha_pre = config.alpha_pre;
  out.p_pre = outcome.p_pre;
  out.pretest_degenerate = outcome.pretest_degenerate;
  out.branch = outcome.branch(config.alpha_pre);
  out.p0 = outcome.p_value(config.alpha_pre);
  out.p_final = out.p0;
  out.reject = out.p_final <= config.alpha;
  return out;
}

void shuffle_arms(std::span<Arm> arms, Stream& stream) {
  for (std::size_t i = arms.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.below(i));
    std::swap(arms[i - 1], arms[j]);
  }
}

SurvivalSample permute_labels(const SurvivalSample& sample, Stream& stream) {
  auto arms = sample.arms();
  shuffle_arms(arms, stream);
  return sample.with_arms(arms);
}

std::vector<TwoStepResult> permutation_two_step(const SurvivalSample& sample, const TwoStepConfig& config,
                                                std::span<const double> alpha_pres) {
  validate(config);
  if (alpha_pres.empty()) throw Error(ErrorCode::InvalidArgument, "no pre-test levels given");
  for (double a : alpha_pres) check_level(a, false, "alpha_pre");
  const double widest = *std::max_element(alpha_pres.begin(), alpha_pres.end());

  const TwoStepEvaluator evaluator(sample, config.alternative);
  const auto observed = evaluator.evaluate(evaluator.observed_arms(), widest);

  const std::size_t m = config.permutations;
  const std::size_t levels = alpha_pres.size();
  // p_i per (permutation, level); NaN marks a failed relabelling.
  std::vector<double> p(m * levels);
  const int threads = std::max(1, config.threads);

#pragma omp parallel for schedule(dynamic, 8) num_threads(threads)
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<Arm> arms(evaluator.observed_arms().begin(), evaluator.observed_arms().end());
    auto stream = Stream::derive(config.seed, {i});
    shuffle_arms(arms, stream);
    try {
      const auto outcome = evaluator.evaluate(arms, widest);
      for (std::size_t l = 0; l < levels; ++l) p[i * levels + l] = outcome.p_value(alpha_pres[l]);
    } catch (const Error&) {
      for (std::size_t l = 0; l < levels; ++l) p[i * levels + l] = std::nan("");
    }
  }

  std::vector<TwoStepResult> results(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    auto& r = results[l];
    r.alpha_pre = alpha_pres[l];
    r.p_pre = observed.p_pre;
    r.pretest_degenerate = observed.pretest_degenerate;
    r.branch = observed.branch(alpha_pres[l]);
    r.p0 = observed.p_value(alpha_pres[l]);
    r.permutations = m;
    for (std::size_t i = 0; i < m; ++i) {
      double pi = p[i * levels + l];
      if (std::isnan(pi)) {
        ++r.failed_permutations;
        pi = 1.0;
      }
      const bool exceeds = config.tie_rule == TieRule::StrictLT ? pi < r.p0 : pi <= r.p0;
      if (exceeds) ++r.exceed_count;
    }
    r.p_final = exceedance_p(config.tie_rule, r.exceed_count, m);
    r.reject = r.p_final <= config.alpha;
  }
  return results;
}

TwoStepResult permutation_two_step(const SurvivalSample& sample, const TwoStepConfig& config) {
  const double level[] = {config.alpha_pre};
  return permutation_two_step(sample, config, level).front();
}

}  // namespace nph
