#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "nph/survival.hpp"

namespace nph {

struct UnitWeight {
  bool operator==(const UnitWeight&) const = default;
};

// G(rho, gamma): S(t-)^rho * (1 - S(t-))^gamma on the pooled KM curve.
struct FlemingHarrington {
  double rho = 0.0;
  double gamma = 0.0;
  bool operator==(const FlemingHarrington&) const = default;
};

// 1 / max{S(t-), S(t*-)}: nondecreasing, constant after t*.
struct ModestWeight {
  double t_star = 0.0;  // months
  bool operator==(const ModestWeight&) const = default;
};

using WeightSpec = std::variant<UnitWeight, FlemingHarrington, ModestWeight>;

// Throws InvalidArgument for negative or non-finite parameters.
void validate(const WeightSpec& spec);

// "logrank", "FH(1,0)", "Modest(6)".
std::string describe(const WeightSpec& spec);

// Strict weak order used to give weight sets a canonical order.
bool canonical_less(const WeightSpec& a, const WeightSpec& b);

// One weight per risk-table row, evaluated on the pooled curve.
// Throws DegenerateWeight if every weight is zero.
std::vector<double> compute_weights(const WeightSpec& spec, const RiskTable& table,
                                    const KmCurve& pooled_km);

struct WlrtResult {
  double z = 0.0;
  double numerator = 0.0;
  double variance = 0.0;
  double p_one_sided = 0.5;  // Phi(z); small when treatment has fewer events than expected
  double p_two_sided = 1.0;
  std::vector<double> weights;
};

// Per-row hypergeometric variance terms V_j; zero for rows with one subject at risk.
std::vector<double> hypergeometric_variances(const RiskTable& table);

// Statistic for explicit weights (one per row). Throws ZeroVariance.
WlrtResult weighted_logrank(const RiskTable& table, std::vector<double> weights);

// Throws NoEvents, InvalidArgument (one arm empty), DegenerateWeight or ZeroVariance.
WlrtResult weighted_logrank(const SurvivalSample& sample, const WeightSpec& spec);

struct WlrtCovariance {
  double cov = 0.0;
  double corr = 0.0;
};

WlrtCovariance wlrt_covariance(const RiskTable& table, std::span<const double> weights_a,
                               std::span<const double> weights_b);

WlrtCovariance wlrt_covariance(const SurvivalSample& sample, const WeightSpec& a, const WeightSpec& b);

}  // namespace nph
