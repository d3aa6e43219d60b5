#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>

namespace nph {

struct TailProbability {
  double probability = 0.0;
  double std_error = 0.0;
};

// P(max_i Z_i > threshold) for Z ~ N(0, corr).
//
// Randomized quasi-Monte Carlo: `draws` points are split over 16 random
// shifts of a Richtmyer lattice, and the standard error is estimated from the
// spread of the per-shift means. The first component's marginal tail is added
// in closed form and only the remainder P(Z_0 <= c, max_{i>0} Z_i > c) is
// integrated, so the estimate never falls below 1 - Phi(c).
//
// Deterministic in (corr, draws, seed). Throws InvalidCorrelation if corr is
// not symmetric with unit diagonal and entries in [-1, 1] (tolerance 1e-8);
// slightly indefinite matrices are repaired by clipping eigenvalues at zero.
TailProbability mvn_tail(double threshold, const Eigen::MatrixXd& corr, std::size_t draws,
                         std::uint64_t seed);

}  // namespace nph
