#pragma once

// Brute-force reference implementations used only by tests. They work
// directly on subject records with nested loops and share no code with the
// library's risk-table machinery.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "nph/random.hpp"
#include "nph/survival.hpp"

namespace nph::oracle {

struct Row {
  double time;
  double n, n1, r, r1;
};

inline std::vector<Row> rows(const std::vector<SubjectRecord>& recs) {
  std::set<double> times;
  for (const auto& s : recs) {
    if (s.event) times.insert(s.time);
  }
  std::vector<Row> out;
  for (double t : times) {
    Row row{t, 0, 0, 0, 0};
    for (const auto& s : recs) {
      const bool treated = s.arm == Arm::Treatment;
      if (s.time >= t) {
        row.n += 1;
        row.n1 += treated;
      }
      if (s.time == t && s.event) {
        row.r += 1;
        row.r1 += treated;
      }
    }
    out.push_back(row);
  }
  return out;
}

// Pooled KM left limit at t by direct product over event times < t.
inline double km_left(const std::vector<SubjectRecord>& recs, double t) {
  double s = 1.0;
  for (const auto& row : rows(recs)) {
    if (row.time < t) s *= 1.0 - row.r / row.n;
  }
  return s;
}

// Z of the weighted log-rank statistic evaluated term by term; w(t, S(t-)).
inline double wlrt_z(const std::vector<SubjectRecord>& recs, const std::function<double(double, double)>& w) {
  double num = 0.0, var = 0.0;
  for (const auto& row : rows(recs)) {
    const double wt = w(row.time, km_left(recs, row.time));
    num += wt * (row.r1 - row.r * row.n1 / row.n);
    if (row.n > 1) {
      var += wt * wt * row.r * (row.n1 / row.n) * (1.0 - row.n1 / row.n) * (row.n - row.r) / (row.n - 1.0);
    }
  }
  return num / std::sqrt(var);
}

// Breslow partial log-likelihood summed subject by subject.
inline double partial_loglik(const std::vector<SubjectRecord>& recs, double beta) {
  double ll = 0.0;
  for (const auto& row : rows(recs)) {
    double denom = 0.0;
    for (const auto& s : recs) {
      if (s.time >= row.time) denom += std::exp(beta * (s.arm == Arm::Treatment));
    }
    for (const auto& s : recs) {
      if (s.time == row.time && s.event) ll += beta * (s.arm == Arm::Treatment) - std::log(denom);
    }
  }
  return ll;
}

// Grid search over [lo, hi] followed by successively finer local grids.
inline double grid_argmax(const std::function<double(double)>& f, double lo, double hi) {
  double step = 0.01;
  double best = lo;
  double best_val = f(lo);
  for (double b = lo; b <= hi + 1e-12; b += step) {
    const double v = f(b);
    if (v > best_val) {
      best_val = v;
      best = b;
    }
  }
  while (step > 1e-11) {
    const double centre = best;
    const double a = std::max(lo, centre - step), z = std::min(hi, centre + step);
    step /= 20.0;
    for (double b = a; b <= z; b += step) {
      const double v = f(b);
      if (v > best_val) {
        best_val = v;
        best = b;
      }
    }
  }
  return best;
}

// Random two-arm dataset with tied times and censoring for property tests.
inline std::vector<SubjectRecord> random_records(Stream& rng, std::size_t n, bool ties = true) {
  std::vector<SubjectRecord> recs(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = recs[i];
    r.arm = i % 2 ? Arm::Treatment : Arm::Control;
    const double t = rng.exponential(r.arm == Arm::Treatment ? 0.07 : 0.1);
    r.time = ties ? std::ceil(t * 2.0) / 2.0 : t;
    r.event = rng.uniform() < 0.8;
  }
  recs[0].event = true;
  recs[1].event = true;
  return recs;
}

}  // namespace nph::oracle
