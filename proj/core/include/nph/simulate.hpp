#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "nph/random.hpp"
#include "nph/survival.hpp"

namespace nph {

inline constexpr double kDaysPerMonth = 30.4375;

constexpr double months_from_days(double days) { return days / kDaysPerMonth; }

// All medians in months; exponential rate = ln 2 / median.
struct PhScenario {
  double median_control = 12.0;
  double median_treatment = 18.0;
  bool operator==(const PhScenario&) const = default;
};

// Treatment hazard equals control hazard until `delay`, then ln 2 / median_post.
struct DelayedScenario {
  double median_control = 12.0;
  double delay = 4.0;
  double median_post = 18.0;
  bool operator==(const DelayedScenario&) const = default;
};

// A fraction `prevalence` of the treatment arm follows median_subgroup, the
// rest median_complement. Control is unaffected.
struct SubgroupScenario {
  double median_control = 12.0;
  double prevalence = 0.2;
  double median_subgroup = 120.0;
  double median_complement = 12.0;
  bool operator==(const SubgroupScenario&) const = default;
};

// Competing progression in both arms: after progression, survival restarts
// with median_post_progression.
struct ProgressionScenario {
  double median_control = 12.0;
  double median_treatment = 18.0;
  double median_progression = 36.0;
  double median_post_progression = 3.0;
  bool operator==(const ProgressionScenario&) const = default;
};

struct NullScenario {
  double median = 12.0;
  bool operator==(const NullScenario&) const = default;
};

using ScenarioSpec = std::variant<PhScenario, DelayedScenario, SubgroupScenario, ProgressionScenario, NullScenario>;

void validate(const ScenarioSpec& scenario);
std::string describe(const ScenarioSpec& scenario);

// Sets the treatment-side median to median_control / hr: the treatment median
// (PH, progression), the post-delay median or the subgroup complement.
// Throws InvalidArgument for the null scenario.
ScenarioSpec with_hazard_ratio(const ScenarioSpec& scenario, double hr);

// Reference scenarios by name: ph, delay_short, delay_long, subgroup_low,
// subgroup_high, progression_short, progression_long, null.
ScenarioSpec reference_scenario(std::string_view name);

struct LatentDraw {
  double time = 0.0;
  std::optional<bool> subgroup_member;  // set for the treatment arm of the subgroup scenario
};

LatentDraw draw_latent_time(const ScenarioSpec& scenario, Arm arm, Stream& stream);

struct EventCount {
  std::size_t events = 0;
  bool operator==(const EventCount&) const = default;
};
struct EventFraction {
  double fraction = 0.75;
  bool operator==(const EventFraction&) const = default;
};
using StopRule = std::variant<EventCount, EventFraction>;

struct TrialDesign {
  std::size_t n_total = 400;                           // even; 1:1 allocation
  double recruitment_window = months_from_days(400.0);  // months
  StopRule stop_rule = EventFraction{0.75};

  // Number of events at which the trial stops. Throws InfeasibleDesign if it exceeds n_total.
  std::size_t target_events() const;
};

void validate(const TrialDesign& design);

struct TrialSubject {
  double time = 0.0;  // observed time since entry, months
  bool event = false;
  Arm arm = Arm::Control;
  double entry = 0.0;  // calendar entry, months
  bool admin_censored = false;
  bool enrolled = true;  // false if entry came after the cutoff
};

struct TrialDataset {
  std::vector<TrialSubject> subjects;
  double cutoff = 0.0;  // calendar time of the analysis
  std::size_t not_enrolled = 0;

  std::size_t events() const;
  // Enrolled subjects only.
  SurvivalSample analysis_sample() const;
};

// Subjects 0..n/2-1 are control, the rest treatment. Entry ~ U(0, window),
// the cutoff is the calendar time of the d-th event, and everybody still at
// risk then is administratively censored. Deterministic in seed.
TrialDataset simulate_trial(const ScenarioSpec& scenario, const TrialDesign& design, std::uint64_t seed);

struct PowerProbe {
  std::size_t events = 0;
  double power = 0.0;
  double mc_se = 0.0;
};

struct CalibrationResult {
  std::size_t events = 0;  // smallest d reaching the target power
  double power = 0.0;
  double mc_se = 0.0;
  std::vector<PowerProbe> probes;  // sorted by events
  std::size_t monotonicity_violations = 0;
};

// One-sided log-rank power at a given event count, `reps` replicates with
// replicate seeds derived from `seed` (common random numbers across d).
PowerProbe estimate_logrank_power(const ScenarioSpec& scenario, const TrialDesign& design, double alpha,
                                  std::size_t reps, std::uint64_t seed, int threads = 1);

// Bisection over d in [1, n_total] for the smallest d with estimated power >=
// target_power. Throws Unreachable if d = n_total falls short.
CalibrationResult calibrate_events(const ScenarioSpec& scenario, const TrialDesign& design_template,
                                   double target_power, double alpha, std::size_t reps, std::uint64_t seed,
                                   int threads = 1);

}  // namespace nph
