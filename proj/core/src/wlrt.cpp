#include "nph/wlrt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nph/error.hpp"
#include "nph/normal.hpp"

namespace nph {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_parameter(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw Error(ErrorCode::InvalidArgument, std::string(name) + " must be finite and >= 0");
  }
}

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void require_two_arms(const SurvivalSample& sample) {
  if (!sample.has_both_arms()) {
    throw Error(ErrorCode::InvalidArgument, "both arms need at least one subject");
  }
}

}  // namespace

void validate(const WeightSpec& spec) {
  std::visit(overloaded{
                 [](const UnitWeight&) {},
                 [](const FlemingHarrington& fh) {
                   check_parameter(fh.rho, "rho");
                   check_parameter(fh.gamma, "gamma");
                 },
                 [](const ModestWeight& m) { check_parameter(m.t_star, "t_star"); },
             },
             spec);
}

std::string describe(const WeightSpec& spec) {
  return std::visit(
      overloaded{
          [](const UnitWeight&) -> std::string { return "logrank"; },
          [](const FlemingHarrington& fh) {
            return "FH(" + format_number(fh.rho) + "," + format_number(fh.gamma) + ")";
          },
          [](const ModestWeight& m) { return "Modest(" + format_number(m.t_star) + ")"; },
      },
      spec);
}

bool canonical_less(const WeightSpec& a, const WeightSpec& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  if (const auto* fa = std::get_if<FlemingHarrington>(&a)) {
    const auto& fb = std::get<FlemingHarrington>(b);
    return std::tie(fa->rho, fa->gamma) < std::tie(fb.rho, fb.gamma);
  }
  if (const auto* ma = std::get_if<ModestWeight>(&a)) {
    return ma->t_star < std::get<ModestWeight>(b).t_star;
  }
  return false;
}

std::vector<double> compute_weights(const WeightSpec& spec, const RiskTable& table,
                                    const KmCurve& pooled_km) {
  validate(spec);
  if (table.empty()) throw Error(ErrorCode::NoEvents, "risk table is empty");
  std::vector<double> w(table.size(), 1.0);
  std::visit(overloaded{
                 [](const UnitWeight&) {},
                 [&](const FlemingHarrington& fh) {
                   for (std::size_t j = 0; j < w.size(); ++j) {
                     const double s = pooled_km.left_limit(table.rows[j].time);
                     w[j] = std::pow(s, fh.rho) * std::pow(1.0 - s, fh.gamma);
                   }
                 },
                 [&](const ModestWeight& m) {
                   const double floor = pooled_km.left_limit(m.t_star);
                   for (std::size_t j = 0; j < w.size(); ++j) {
                     w[j] = 1.0 / std::max(pooled_km.left_limit(table.rows[j].time), floor);
                   }
                 },
             },
             spec);
  if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) {
    throw Error(ErrorCode::DegenerateWeight, describe(spec) + " is zero at every event time");
  }
  return w;
}

std::vector<double> hypergeometric_variances(const RiskTable& table) {
  std::vector<double> v(table.size(), 0.0);
  for (std::size_t j = 0; j < v.size(); ++j) {
    const auto& row = table.rows[j];
    if (row.at_risk <= 1) continue;
    // Integer products are exact, which keeps V_j symmetric under arm swap.
    const double n = static_cast<double>(row.at_risk);
    const double num = static_cast<double>(row.events) * static_cast<double>(row.at_risk_treatment) *
                       static_cast<double>(row.at_risk - row.at_risk_treatment) *
                       static_cast<double>(row.at_risk - row.events);
    v[j] = num / (n * n * (n - 1.0));
  }
  return v;
}

WlrtResult weighted_logrank(const RiskTable& table, std::vector<double> weights) {
  if (table.empty()) throw Error(ErrorCode::NoEvents, "risk table is empty");
  if (weights.size() != table.size()) {
    throw Error(ErrorCode::InvalidArgument, "one weight per event time required");
  }
  const auto v = hypergeometric_variances(table);
  WlrtResult out;
  for (std::size_t j = 0; j < table.size(); ++j) {
    const auto& row = table.rows[j];
    // (r1 * n - r * n1) / n is exact in the numerator and flips sign exactly
    // when the arms are swapped.
    const double observed_minus_expected =
        static_cast<double>(row.events_treatment * row.at_risk - row.events * row.at_risk_treatment) /
        static_cast<double>(row.at_risk);
    out.numerator += weights[j] * observed_minus_expected;
    out.variance += weights[j] * weights[j] * v[j];
  }
  if (!(out.variance > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "weighted log-rank variance is zero");
  }
  out.z = out.numerator / std::sqrt(out.variance);
  out.p_one_sided = normal_cdf(out.z);
  out.p_two_sided = std::min(1.0, 2.0 * std::min(out.p_one_sided, normal_upper_tail(out.z)));
  out.weights = std::move(weights);
  return out;
}

WlrtResult weighted_logrank(const SurvivalSample& sample, const WeightSpec& spec) {
  require_two_arms(sample);
  const auto table = build_risk_table(sample);
  return weighted_logrank(table, compute_weights(spec, table, km_from_table(table)));
}

WlrtCovariance wlrt_covariance(const RiskTable& table, std::span<const double> weights_a,
                               std::span<const double> weights_b) {
  if (weights_a.size() != table.size() || weights_b.size() != table.size()) {
    throw Error(ErrorCode::InvalidArgument, "one weight per event time required");
  }
  const auto v = hypergeometric_variances(table);
  double var_a = 0.0, var_b = 0.0, cov = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    var_a += weights_a[j] * weights_a[j] * v[j];
    var_b += weights_b[j] * weights_b[j] * v[j];
    cov += weights_a[j] * weights_b[j] * v[j];
  }
  if (!(var_a > 0.0) || !(var_b > 0.0)) {
    throw Error(ErrorCode::ZeroVariance, "weighted log-rank variance is zero");
  }
  return {cov, std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0)};
}

WlrtCovariance wlrt_covariance(const SurvivalSample& sample, const WeightSpec& a, const WeightSpec& b) {
  require_two_arms(sample);
  const auto table = build_risk_table(sample);
  const auto km = km_from_table(table);
  return wlrt_covariance(table, compute_weights(a, table, km), compute_weights(b, table, km));
}

}  // namespace nph
