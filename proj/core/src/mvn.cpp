#include "nph/mvn.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <tuple>
#include <vector>

#include "nph/error.hpp"
#include "nph/normal.hpp"
#include "nph/random.hpp"

namespace nph {
namespace {

constexpr std::size_t kShifts = 16;
constexpr double kCorrTolerance = 1e-8;
constexpr std::array<double, 12> kPrimes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

// Standard normal lattice points, row-major [shift][point][dim].
struct NormalPoints {
  std::size_t dim = 0;
  std::size_t shifts = 0;
  std::size_t per_shift = 0;
  std::vector<double> values;
};

std::shared_ptr<const NormalPoints> make_points(std::size_t dim, std::size_t draws, std::uint64_t seed) {
  auto pts = std::make_shared<NormalPoints>();
  pts->dim = dim;
  pts->shifts = std::min(kShifts, draws);
  pts->per_shift = draws / pts->shifts;
  pts->values.resize(pts->shifts * pts->per_shift * dim);

  std::vector<double> alpha(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const double root = std::sqrt(i < kPrimes.size() ? kPrimes[i] : 41.0 + 2.0 * static_cast<double>(i));
    alpha[i] = root - std::floor(root);
  }
  auto stream = Stream::derive(seed, {dim, draws});
  std::vector<double> shift(dim);
  double* out = pts->values.data();
  for (std::size_t r = 0; r < pts->shifts; ++r) {
    for (auto& s : shift) s = stream.uniform();
    for (std::size_t j = 0; j < pts->per_shift; ++j) {
      for (std::size_t i = 0; i < dim; ++i) {
        double u = shift[i] + static_cast<double>(j + 1) * alpha[i];
        u -= std::floor(u);
        u = std::clamp(u, 1e-16, 1.0 - 1e-16);
        *out++ = normal_quantile(u);
      }
    }
  }
  return pts;
}

// Lattice points are reused across calls: the same (dim, draws, seed) always
// maps to the same immutable point set.
std::shared_ptr<const NormalPoints> cached_points(std::size_t dim, std::size_t draws, std::uint64_t seed) {
  static std::mutex mutex;
  static std::map<std::tuple<std::size_t, std::size_t, std::uint64_t>, std::shared_ptr<const NormalPoints>>
      cache;
  const auto key = std::make_tuple(dim, draws, seed);
  std::lock_guard lock(mutex);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() >= 16) cache.erase(cache.begin());
  auto pts = make_points(dim, draws, seed);
  cache.emplace(key, pts);
  return pts;
}

void validate_correlation(const Eigen::MatrixXd& corr) {
  if (corr.rows() == 0 || corr.rows() != corr.cols()) {
    throw Error(ErrorCode::InvalidCorrelation, "correlation matrix must be square and nonempty");
  }
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    if (!(std::abs(corr(i, i) - 1.0) <= kCorrTolerance)) {
      throw Error(ErrorCode::InvalidCorrelation, "diagonal entries must equal 1");
    }
    for (Eigen::Index j = 0; j < corr.cols(); ++j) {
      if (!(std::abs(corr(i, j)) <= 1.0 + kCorrTolerance) ||
          !(std::abs(corr(i, j) - corr(j, i)) <= kCorrTolerance)) {
        throw Error(ErrorCode::InvalidCorrelation, "entries must be symmetric and within [-1, 1]");
      }
    }
  }
}

}  // namespace

TailProbability mvn_tail(double threshold, const Eigen::MatrixXd& corr, std::size_t draws,
                         std::uint64_t seed) {
  validate_correlation(corr);
  if (draws == 0) throw Error(ErrorCode::InvalidArgument, "draws must be positive");
  if (std::isnan(threshold)) throw Error(ErrorCode::InvalidArgument, "threshold is NaN");

  const auto k = static_cast<std::size_t>(corr.rows());
  const double anchor = normal_upper_tail(threshold);
  if (k == 1) return {anchor, 0.0};

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (corr + corr.transpose()));
  const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::MatrixXd factor = eig.eigenvectors() * root.asDiagonal();
  std::vector<double> a(k * k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t l = 0; l < k; ++l) a[i * k + l] = factor(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(l));
  }

  const auto pts = cached_points(k, draws, seed);
  const double* x = pts->values.data();
  std::vector<double> shift_means(pts->shifts);
  for (std::size_t r = 0; r < pts->shifts; ++r) {
    std::size_t hits = 0;
    for (std::size_t j = 0; j < pts->per_shift; ++j, x += k) {
      double y0 = 0.0;
      for (std::size_t l = 0; l < k; ++l) y0 += a[l] * x[l];
      if (y0 > threshold) continue;
      for (std::size_t i = 1; i < k; ++i) {
        double yi = 0.0;
        for (std::size_t l = 0; l < k; ++l) yi += a[i * k + l] * x[l];
        if (yi > threshold) {
          ++hits;
          break;
        }
      }
    }
    shift_means[r] = static_cast<double>(hits) / static_cast<double>(pts->per_shift);
  }

  const double r = static_cast<double>(pts->shifts);
  double mean = 0.0;
  for (double m : shift_means) mean += m;
  mean /= r;
  double ss = 0.0;
  for (double m : shift_means) ss += (m - mean) * (m - mean);
  const double se = pts->shifts > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0;
  return {std::min(1.0, anchor + mean), se};
}

}  // namespace nph
