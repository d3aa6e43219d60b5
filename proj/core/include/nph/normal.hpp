#pragma once

namespace nph {

// Standard normal distribution function Phi(z).
double normal_cdf(double z);

// 1 - Phi(z), accurate in the far upper tail.
double normal_upper_tail(double z);

// Phi^{-1}(p) for p in (0, 1).
double normal_quantile(double p);

// Upper tail of the chi-square distribution with one degree of freedom.
double chi2_1df_upper_tail(double x);

}  // namespace nph
