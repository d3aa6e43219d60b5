#include "nph/coxph.hpp"

#include <cmath>
#include <string>

#include "nph/error.hpp"
#include "nph/normal.hpp"

namespace nph {
namespace {

struct Derivatives {
  double loglik = 0.0;
  double score = 0.0;
  double information = 0.0;
};

// Treatment share of the risk set weighted by exp(beta).
double weighted_share(const RiskRow& row, double exp_beta) {
  const double n1 = static_cast<double>(row.at_risk_treatment) * exp_beta;
  const double n0 = static_cast<double>(row.at_risk - row.at_risk_treatment);
  return n1 / (n0 + n1);
}

Derivatives derivatives(const RiskTable& table, double beta) {
  Derivatives d;
  const double eb = std::exp(beta);
  for (const auto& row : table.rows) {
    const double r = static_cast<double>(row.events);
    const double n1 = static_cast<double>(row.at_risk_treatment);
    const double n0 = static_cast<double>(row.at_risk - row.at_risk_treatment);
    const double p = weighted_share(row, eb);
    d.loglik += static_cast<double>(row.events_treatment) * beta - r * std::log(n0 + n1 * eb);
    d.score += static_cast<double>(row.events_treatment) - r * p;
    d.information += r * p * (1.0 - p);
  }
  return d;
}

void require_events(const RiskTable& table) {
  if (table.empty()) throw Error(ErrorCode::NoEvents, "no events");
  if (table.total_events() < 2) throw Error(ErrorCode::TooFewEvents, "Cox fit needs at least two events");
}

}  // namespace

double cox_partial_loglik(const RiskTable& table, double beta) { return derivatives(table, beta).loglik; }

CoxFit fit_cox_binary(const RiskTable& table, const CoxOptions& options) {
  require_events(table);
  CoxFit fit;
  double beta = 0.0;
  auto d = derivatives(table, beta);
  for (int it = 0; it < options.max_iterations; ++it) {
    if (std::abs(d.score) < options.score_tolerance) {
      fit.converged = true;
      break;
    }
    if (!(d.information > 0.0)) {
      throw Error(ErrorCode::MonotoneLikelihood, "information vanished; no interior maximum");
    }
    double step = d.score / d.information;
    double next = beta + step;
    auto nd = derivatives(table, next);
    // Concave objective: halve until the likelihood does not decrease beyond rounding.
    const double slack = 1e-12 * (1.0 + std::abs(d.loglik));
    for (int h = 0; h < 30 && !(nd.loglik >= d.loglik - slack); ++h) {
      step *= 0.5;
      next = beta + step;
      nd = derivatives(table, next);
    }
    beta = next;
    d = nd;
    fit.iterations = it + 1;
    if (std::abs(beta) > options.divergence_bound) {
      throw Error(ErrorCode::MonotoneLikelihood,
                  "|beta| exceeded " + std::to_string(options.divergence_bound) + "; no interior maximum");
    }
  }
  if (!fit.converged && std::abs(d.score) < options.score_tolerance) fit.converged = true;
  if (!(d.information > 0.0)) {
    throw Error(ErrorCode::MonotoneLikelihood, "information vanished; no interior maximum");
  }
  fit.beta = beta;
  fit.loglik = d.loglik;
  fit.score = d.score;
  fit.information = d.information;
  fit.se = 1.0 / std::sqrt(d.information);
  return fit;
}

CoxFit fit_cox_binary(const SurvivalSample& sample, const CoxOptions& options) {
  return fit_cox_binary(build_risk_table(sample), options);
}

std::vector<SchoenfeldResidual> schoenfeld_residuals(const RiskTable& table, const CoxFit& fit) {
  std::vector<SchoenfeldResidual> out;
  out.reserve(static_cast<std::size_t>(table.total_events()));
  const double eb = std::exp(fit.beta);
  for (const auto& row : table.rows) {
    const double p = weighted_share(row, eb);
    for (std::int64_t e = 0; e < row.events - row.events_treatment; ++e) {
      out.push_back({row.time, Arm::Control, -p});
    }
    for (std::int64_t e = 0; e < row.events_treatment; ++e) {
      out.push_back({row.time, Arm::Treatment, 1.0 - p});
    }
  }
  return out;
}

std::vector<SchoenfeldResidual> schoenfeld_residuals(const SurvivalSample& sample, const CoxFit& fit) {
  return schoenfeld_residuals(build_risk_table(sample), fit);
}

std::vector<double> km_transform(const RiskTable& table) {
  if (table.empty()) throw Error(ErrorCode::NoEvents, "no events");
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(table.total_events()));
  double s = 1.0;  // S(t_j-) while visiting row j
  for (const auto& row : table.rows) {
    for (std::int64_t e = 0; e < row.events; ++e) g.push_back(1.0 - s);
    s *= 1.0 - static_cast<double>(row.events) / static_cast<double>(row.at_risk);
  }
  return g;
}

std::vector<double> km_transform(const SurvivalSample& sample) {
  return km_transform(RiskSetIndex(sample).pooled());
}

GtResult gt_test(const RiskTable& table, const CoxOptions& options) {
  require_events(table);
  if (table.size() < 2) {
    throw Error(ErrorCode::ConstantTransform, "all events share one time; no time trend to test");
  }
  GtResult out;
  out.fit = fit_cox_binary(table, options);
  out.transform = km_transform(table);
  const auto residuals = schoenfeld_residuals(table, out.fit);
  out.residuals.reserve(residuals.size());
  for (const auto& r : residuals) out.residuals.push_back(r.value);
  out.events = out.residuals.size();

  const double d = static_cast<double>(out.events);
  double mean_g = 0.0;
  for (double g : out.transform) mean_g += g;
  mean_g /= d;
  double u = 0.0, ss = 0.0;
  for (std::size_t k = 0; k < out.events; ++k) {
    const double c = out.transform[k] - mean_g;
    u += c * out.residuals[k];
    ss += c * c;
  }
  if (!(ss > 0.0)) throw Error(ErrorCode::ConstantTransform, "KM transform is constant");
  out.statistic = d * u * u / (out.fit.information * ss);
  out.p_pre = chi2_1df_upper_tail(out.statistic);
  return out;
}

GtResult gt_test(const SurvivalSample& sample, const CoxOptions& options) {
  return gt_test(build_risk_table(sample), options);
}

}  // namespace nph
