#include "nph/maxcombo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nph/error.hpp"
#include "nph/mvn.hpp"
#include "nph/normal.hpp"

namespace nph {
namespace {

bool is_logrank(const WeightSpec& w) {
  if (std::holds_alternative<UnitWeight>(w)) return true;
  if (const auto* fh = std::get_if<FlemingHarrington>(&w)) return fh->rho == 0.0 && fh->gamma == 0.0;
  return false;
}

}  // namespace

MaxComboSpec MaxComboSpec::lin() {
  MaxComboSpec spec;
  spec.components = {FlemingHarrington{0, 0}, FlemingHarrington{1, 0}, FlemingHarrington{0, 1},
                     FlemingHarrington{1, 1}};
  return spec;
}

MaxComboSpec MaxComboSpec::lin_without_logrank() {
  MaxComboSpec spec;
  spec.components = {FlemingHarrington{1, 0}, FlemingHarrington{0, 1}, FlemingHarrington{1, 1}};
  return spec;
}

bool MaxComboSpec::includes_logrank() const {
  return std::any_of(components.begin(), components.end(), is_logrank);
}

void validate(const MaxComboSpec& spec) {
  if (spec.components.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "max-combo needs at least two components");
  }
  if (spec.mvn_draws == 0) throw Error(ErrorCode::InvalidArgument, "mvn_draws must be positive");
  for (std::size_t i = 0; i < spec.components.size(); ++i) {
    validate(spec.components[i]);
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.components[i] == spec.components[j]) {
        throw Error(ErrorCode::InvalidArgument,
                    "duplicate max-combo component " + describe(spec.components[i]));
      }
    }
  }
}

std::string describe(const MaxComboSpec& spec) {
  std::string out = "maxcombo{";
  for (std::size_t i = 0; i < spec.components.size(); ++i) {
    if (i) out += ",";
    out += describe(spec.components[i]);
  }
  return out + "}";
}

MaxComboResult maxcombo_test(const RiskTable& table, const std::vector<std::vector<double>>& weights,
                             const MaxComboSpec& spec) {
  validate(spec);
  const std::size_t k = spec.components.size();
  if (weights.size() != k) throw Error(ErrorCode::InvalidArgument, "one weight vector per component");

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return canonical_less(spec.components[a], spec.components[b]);
  });

  MaxComboResult out;
  out.z_oriented.resize(k);
  out.p_component.resize(k);
  std::vector<double> variance(k);
  for (std::size_t i = 0; i < k; ++i) {
    const auto res = weighted_logrank(table, weights[i]);
    out.z_oriented[i] = -res.z;
    out.p_component[i] = res.p_one_sided;
    variance[i] = res.variance;
  }

  const auto v = hypergeometric_variances(table);
  out.corr = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      double cov = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) cov += weights[a][j] * weights[b][j] * v[j];
      const double c = std::clamp(cov / std::sqrt(variance[a] * variance[b]), -1.0, 1.0);
      out.corr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = c;
      out.corr(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = c;
    }
  }

  out.argmax = static_cast<std::size_t>(
      std::max_element(out.z_oriented.begin(), out.z_oriented.end()) - out.z_oriented.begin());
  out.z_max = out.z_oriented[out.argmax];

  Eigen::MatrixXd sorted(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      sorted(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          out.corr(static_cast<Eigen::Index>(order[a]), static_cast<Eigen::Index>(order[b]));
    }
  }
  const auto tail = mvn_tail(out.z_max, sorted, spec.mvn_draws, spec.mvn_seed);
  out.p_adjusted = tail.probability;
  out.mc_std_error = tail.std_error;
  return out;
}

MaxComboResult maxcombo_test(const SurvivalSample& sample, const MaxComboSpec& spec) {
  validate(spec);
  if (!sample.has_both_arms()) {
    throw Error(ErrorCode::InvalidArgument, "both arms need at least one subject");
  }
  const auto table = build_risk_table(sample);
  const auto km = km_from_table(table);
  std::vector<std::vector<double>> weights;
  weights.reserve(spec.components.size());
  for (const auto& c : spec.components) weights.push_back(compute_weights(c, table, km));
  return maxcombo_test(table, weights, spec);
}

}  // namespace nph
