#include "nph/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "nph/error.hpp"
#include "nph/wlrt.hpp"

namespace nph {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double rate(double median) { return std::numbers::ln2 / median; }

void check_median(double m, const char* name) {
  if (!std::isfinite(m) || !(m > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be a positive finite median");
  }
}

}  // namespace

void validate(const ScenarioSpec& scenario) {
  std::visit(overloaded{
                 [](const PhScenario& s) {
                   check_median(s.median_control, "median_control");
                   check_median(s.median_treatment, "median_treatment");
                 },
                 [](const DelayedScenario& s) {
                   check_median(s.median_control, "median_control");
                   check_median(s.median_post, "median_post");
                   if (!std::isfinite(s.delay) || s.delay < 0.0) {
                     throw Error(ErrorCode::InvalidArgument, "delay must be finite and >= 0");
                   }
                 },
                 [](const SubgroupScenario& s) {
                   check_median(s.median_control, "median_control");
                   check_median(s.median_subgroup, "median_subgroup");
                   check_median(s.median_complement, "median_complement");
                   if (!(s.prevalence >= 0.0 && s.prevalence <= 1.0)) {
                     throw Error(ErrorCode::InvalidArgument, "prevalence must lie in [0, 1]");
                   }
                 },
                 [](const ProgressionScenario& s) {
                   check_median(s.median_control, "median_control");
                   check_median(s.median_treatment, "median_treatment");
                   check_median(s.median_progression, "median_progression");
                   check_median(s.median_post_progression, "median_post_progression");
                 },
                 [](const NullScenario& s) { check_median(s.median, "median"); },
             },
             scenario);
}

std::string describe(const ScenarioSpec& scenario) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const PhScenario& s) { os << "ph(" << s.median_control << "," << s.median_treatment << ")"; },
                 [&](const DelayedScenario& s) {
                   os << "delayed(" << s.median_control << ",delay=" << s.delay << "," << s.median_post << ")";
                 },
                 [&](const SubgroupScenario& s) {
                   os << "subgroup(" << s.median_control << ",prev=" << s.prevalence << "," << s.median_subgroup
                      << "," << s.median_complement << ")";
                 },
                 [&](const ProgressionScenario& s) {
                   os << "progression(" << s.median_control << "," << s.median_treatment << ",prog="
                      << s.median_progression << ",post=" << s.median_post_progression << ")";
                 },
                 [&](const NullScenario& s) { os << "null(" << s.median << ")"; },
             },
             scenario);
  return os.str();
}

ScenarioSpec with_hazard_ratio(const ScenarioSpec& scenario, double hr) {
  if (!std::isfinite(hr) || !(hr > 0.0)) throw Error(ErrorCode::InvalidArgument, "hazard ratio must be > 0");
  return std::visit(overloaded{
                        [&](PhScenario s) -> ScenarioSpec {
                          s.median_treatment = s.median_control / hr;
                          return s;
                        },
                        [&](DelayedScenario s) -> ScenarioSpec {
                          s.median_post = s.median_control / hr;
                          return s;
                        },
                        [&](SubgroupScenario s) -> ScenarioSpec {
                          s.median_complement = s.median_control / hr;
                          return s;
                        },
                        [&](ProgressionScenario s) -> ScenarioSpec {
                          s.median_treatment = s.median_control / hr;
                          return s;
                        },
                        [](const NullScenario&) -> ScenarioSpec {
                          throw Error(ErrorCode::InvalidArgument, "the null scenario has no hazard ratio");
                        },
                    },
                    scenario);
}

ScenarioSpec reference_scenario(std::string_view name) {
  if (name == "ph") return PhScenario{12.0, 18.0};
  if (name == "delay_short") return DelayedScenario{12.0, 2.0, 18.0};
  if (name == "delay_long") return DelayedScenario{12.0, 4.0, 18.0};
  if (name == "subgroup_low") return SubgroupScenario{12.0, 0.2, 120.0, 12.0};
  if (name == "subgroup_high") return SubgroupScenario{12.0, 0.5, 120.0, 12.0};
  if (name == "progression_short") return ProgressionScenario{12.0, 18.0, 36.0, 3.0};
  if (name == "progression_long") return ProgressionScenario{12.0, 18.0, 36.0, 9.0};
  if (name == "null") return NullScenario{12.0};
  throw Error(ErrorCode::InvalidArgument, "unknown reference scenario '" + std::string(name) + "'");
}

LatentDraw draw_latent_time(const ScenarioSpec& scenario, Arm arm, Stream& stream) {
  const bool treated = arm == Arm::Treatment;
  return std::visit(
      overloaded{
          [&](const PhScenario& s) {
            return LatentDraw{stream.exponential(rate(treated ? s.median_treatment : s.median_control)), {}};
          },
          [&](const NullScenario& s) { return LatentDraw{stream.exponential(rate(s.median)), {}}; },
          [&](const DelayedScenario& s) {
            const double lc = rate(s.median_control);
            if (!treated) return LatentDraw{stream.exponential(lc), {}};
            // Invert S(t) = exp(-lc*min(t, delay) - lp*max(t - delay, 0)).
            const double e = stream.exponential(1.0);
            const double before = lc * s.delay;
            const double t = e < before ? e / lc : s.delay + (e - before) / rate(s.median_post);
            return LatentDraw{t, {}};
          },
          [&](const SubgroupScenario& s) {
            if (!treated) return LatentDraw{stream.exponential(rate(s.median_control)), {}};
            const bool member = stream.uniform() < s.prevalence;
            const double t = stream.exponential(rate(member ? s.median_subgroup : s.median_complement));
            return LatentDraw{t, member};
          },
          [&](const ProgressionScenario& s) {
            const double progression = stream.exponential(rate(s.median_progression));
            const double direct = stream.exponential(rate(treated ? s.median_treatment : s.median_control));
            if (progression < direct) {
              return LatentDraw{progression + stream.exponential(rate(s.median_post_progression)), {}};
            }
            return LatentDraw{direct, {}};
          },
      },
      scenario);
}

std::size_t TrialDesign::target_events() const {
  const std::size_t d = std::visit(
      overloaded{
          [](const EventCount& c) { return c.events; },
          [&](const EventFraction& f) {
            return static_cast<std::size_t>(std::ceil(f.fraction * static_cast<double>(n_total) - 1e-9));
          },
      },
      stop_rule);
  if (d > n_total) {
    throw Error(ErrorCode::InfeasibleDesign, "stop rule requires " + std::to_string(d) + " events but only " +
                                                 std::to_string(n_total) + " subjects are recruited");
  }
  return d;
}

void validate(const TrialDesign& design) {
  if (design.n_total < 2 || design.n_total % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "n_total must be an even number >= 2");
  }
  if (!std::isfinite(design.recruitment_window) || !(design.recruitment_window > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "recruitment_window must be > 0");
  }
  std::visit(overloaded{
                 [](const EventCount& c) {
                   if (c.events == 0) throw Error(ErrorCode::InvalidArgument, "event count must be >= 1");
                 },
                 [](const EventFraction& f) {
                   if (!(f.fraction > 0.0 && f.fraction <= 1.0)) {
                     throw Error(ErrorCode::InvalidArgument, "event fraction must lie in (0, 1]");
                   }
                 },
             },
             design.stop_rule);
  (void)design.target_events();
}

std::size_t TrialDataset::events() const {
  return static_cast<std::size_t>(
      std::count_if(subjects.begin(), subjects.end(), [](const auto& s) { return s.event; }));
}

SurvivalSample TrialDataset::analysis_sample() const {
  std::vector<SubjectRecord> records;
  records.reserve(subjects.size());
  for (const auto& s : subjects) {
    if (s.enrolled) records.push_back({s.time, s.event, s.arm});
  }
  return SurvivalSample(std::move(records));
}

TrialDataset simulate_trial(const ScenarioSpec& scenario, const TrialDesign& design, std::uint64_t seed) {
  validate(scenario);
  validate(design);
  const std::size_t n = design.n_total;
  const std::size_t d = design.target_events();

  Stream stream(seed);
  TrialDataset out;
  out.subjects.resize(n);
  std::vector<double> calendar(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& s = out.subjects[i];
    s.arm = i < n / 2 ? Arm::Control : Arm::Treatment;
    s.entry = stream.uniform(0.0, design.recruitment_window);
    s.time = draw_latent_time(scenario, s.arm, stream).time;
    calendar[i] = s.entry + s.time;
  }

  auto sorted = calendar;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(d - 1), sorted.end());
  out.cutoff = sorted[d - 1];

  for (std::size_t i = 0; i < n; ++i) {
    auto& s = out.subjects[i];
    if (calendar[i] <= out.cutoff) {
      s.event = true;
    } else if (s.entry > out.cutoff) {
      s.enrolled = false;
      s.time = 0.0;
      ++out.not_enrolled;
    } else {
      s.admin_censored = true;
      s.time = out.cutoff - s.entry;
    }
  }
  return out;
}

PowerProbe estimate_logrank_power(const ScenarioSpec& scenario, const TrialDesign& design, double alpha,
                                  std::size_t reps, std::uint64_t seed, int threads) {
  if (reps == 0) throw Error(ErrorCode::InvalidArgument, "reps must be >= 1");
  validate(design);
  std::vector<unsigned char> reject(reps, 0);
#pragma omp parallel for schedule(dynamic, 16) num_threads(std::max(1, threads))
  for (std::size_t r = 0; r < reps; ++r) {
    try {
      const auto data = simulate_trial(scenario, design, mix_seed(seed, r));
      reject[r] = weighted_logrank(data.analysis_sample(), UnitWeight{}).p_one_sided <= alpha;
    } catch (const Error&) {
      reject[r] = 0;
    }
  }
  const double hits = static_cast<double>(std::count(reject.begin(), reject.end(), 1));
  const double power = hits / static_cast<double>(reps);
  return {design.target_events(), power, std::sqrt(power * (1.0 - power) / static_cast<double>(reps))};
}

CalibrationResult calibrate_events(const ScenarioSpec& scenario, const TrialDesign& design_template,
                                   double target_power, double alpha, std::size_t reps, std::uint64_t seed,
                                   int threads) {
  if (!(target_power >= 0.0 && target_power < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "target power must lie in [0, 1)");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 1)");
  validate(scenario);

  std::map<std::size_t, PowerProbe> probes;
  auto probe = [&](std::size_t d) {
    if (auto it = probes.find(d); it != probes.end()) return it->second;
    TrialDesign design = design_template;
    design.stop_rule = EventCount{d};
    const auto p = estimate_logrank_power(scenario, design, alpha, reps, seed, threads);
    probes.emplace(d, p);
    return p;
  };

  std::size_t lo = 1;
  std::size_t hi = design_template.n_total;
  std::size_t found = 0;
  if (probe(hi).power < target_power) {
    throw Error(ErrorCode::Unreachable, "power at d = n_total is " + std::to_string(probe(hi).power) +
                                            ", below the target " + std::to_string(target_power));
  }
  if (probe(lo).power >= target_power) {
    found = lo;
  } else {
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (probe(mid).power >= target_power ? hi : lo) = mid;
    }
    found = hi;
  }

  CalibrationResult out;
  for (const auto& [d, p] : probes) out.probes.push_back(p);
  for (std::size_t i = 0; i < out.probes.size(); ++i) {
    for (std::size_t j = i + 1; j < out.probes.size(); ++j) {
      const auto& a = out.probes[i];
      const auto& b = out.probes[j];
      if (a.power - b.power > 2.0 * std::hypot(a.mc_se, b.mc_se)) ++out.monotonicity_violations;
    }
  }
  const auto& chosen = probes.at(found);
  out.events = found;
  out.power = chosen.power;
  out.mc_se = chosen.mc_se;
  return out;
}

}  // namespace nph
