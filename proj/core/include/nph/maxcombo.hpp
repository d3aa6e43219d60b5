#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "nph/survival.hpp"
#include "nph/wlrt.hpp"

namespace nph {

struct MaxComboSpec {
  std::vector<WeightSpec> components;
  std::size_t mvn_draws = 200000;
  std::uint64_t mvn_seed = 20240213;

  // FH(0,0), FH(1,0), FH(0,1), FH(1,1).
  static MaxComboSpec lin();
  // Lin's set without the log-rank component, for use after a rejected PH pre-test.
  static MaxComboSpec lin_without_logrank();

  // True if any component is the unweighted log-rank test (Unit or FH(0,0)).
  bool includes_logrank() const;

  bool operator==(const MaxComboSpec&) const = default;
};

// Throws InvalidArgument unless k >= 2, components are pairwise distinct and valid, draws > 0.
void validate(const MaxComboSpec& spec);

std::string describe(const MaxComboSpec& spec);

struct MaxComboResult {
  std::vector<double> z_oriented;   // -z per component: larger means more benefit
  std::vector<double> p_component;  // one-sided p per component
  double z_max = 0.0;
  Eigen::MatrixXd corr;
  double p_adjusted = 1.0;
  double mc_std_error = 0.0;
  std::size_t argmax = 0;
};

// Components are evaluated in canonical order internally, so p_adjusted does
// not depend on the order in which they are listed.
MaxComboResult maxcombo_test(const SurvivalSample& sample, const MaxComboSpec& spec);

// Same test from a risk table and one precomputed weight vector per component.
MaxComboResult maxcombo_test(const RiskTable& table, const std::vector<std::vector<double>>& weights,
                             const MaxComboSpec& spec);

}  // namespace nph
