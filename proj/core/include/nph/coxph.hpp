#pragma once

#include <cstddef>
#include <vector>

#include "nph/survival.hpp"

namespace nph {

struct CoxFit {
  double beta = 0.0;  // log hazard ratio, treatment vs control
  double se = 0.0;
  double information = 0.0;
  double loglik = 0.0;
  double score = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct CoxOptions {
  double score_tolerance = 1e-9;
  int max_iterations = 25;
  double divergence_bound = 20.0;
};

// Breslow partial log-likelihood of the binary treatment covariate.
double cox_partial_loglik(const RiskTable& table, double beta);

// Newton-Raphson with step halving on the Breslow partial likelihood.
// Throws NoEvents, TooFewEvents (< 2 events) or MonotoneLikelihood (|beta|
// leaves the divergence bound, i.e. the likelihood has no interior maximum).
CoxFit fit_cox_binary(const RiskTable& table, const CoxOptions& options = {});
CoxFit fit_cox_binary(const SurvivalSample& sample, const CoxOptions& options = {});

struct SchoenfeldResidual {
  double time = 0.0;
  Arm arm = Arm::Control;
  double value = 0.0;  // x - E[x | risk set, beta]
};

// One residual per event; tied events each contribute one (control first).
std::vector<SchoenfeldResidual> schoenfeld_residuals(const RiskTable& table, const CoxFit& fit);
std::vector<SchoenfeldResidual> schoenfeld_residuals(const SurvivalSample& sample, const CoxFit& fit);

// 1 - S(t_k-) on the pooled KM curve, one value per event (ties share a value).
std::vector<double> km_transform(const RiskTable& table);
std::vector<double> km_transform(const SurvivalSample& sample);

struct GtResult {
  double statistic = 0.0;  // chi-square, 1 df
  double p_pre = 1.0;      // two-sided
  std::size_t events = 0;
  CoxFit fit;
  std::vector<double> transform;
  std::vector<double> residuals;
};

// Grambsch-Therneau test of proportional hazards on the KM-transformed time
// axis, using the average-information approximation:
//   T = d * U^2 / (I * sum_k (g_k - mean g)^2),  U = sum_k (g_k - mean g) s_k.
// Throws TooFewEvents, ConstantTransform (one distinct event time) and
// propagates MonotoneLikelihood.
GtResult gt_test(const RiskTable& table, const CoxOptions& options = {});
GtResult gt_test(const SurvivalSample& sample, const CoxOptions& options = {});

}  // namespace nph
