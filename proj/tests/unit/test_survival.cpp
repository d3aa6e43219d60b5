#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "nph/error.hpp"
#include "nph/random.hpp"
#include "nph/survival.hpp"
#include "oracles.hpp"

using namespace nph;

namespace {

SubjectRecord ctl(double t, bool ev) { return {t, ev, Arm::Control}; }
SubjectRecord trt(double t, bool ev) { return {t, ev, Arm::Treatment}; }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Unreachable;
}

}  // namespace

TEST(SurvivalSample, RejectsInvalidRecords) {
  EXPECT_EQ(code_of([] { SurvivalSample({}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { SurvivalSample({ctl(-1, true)}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { SurvivalSample({ctl(NAN, true)}); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([] { SurvivalSample({ctl(INFINITY, false)}); }), ErrorCode::InvalidArgument);
}

TEST(SurvivalSample, CountsAndSwap) {
  SurvivalSample s({ctl(1, true), ctl(2, false), trt(3, true)});
  EXPECT_EQ(s.count(Arm::Control), 2u);
  EXPECT_EQ(s.count(Arm::Treatment), 1u);
  EXPECT_EQ(s.events(), 2u);
  const auto swapped = s.with_swapped_arms();
  EXPECT_EQ(swapped.count(Arm::Control), 1u);
  EXPECT_EQ(swapped.records()[0].arm, Arm::Treatment);
}

TEST(RiskTable, HandEnumeratedExample) {
  SurvivalSample s({ctl(1, true), ctl(3, true), trt(2, true), trt(4, false)});
  const auto table = build_risk_table(s);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table.rows[0], (RiskRow{1, 4, 2, 1, 0}));
  EXPECT_EQ(table.rows[1], (RiskRow{2, 3, 2, 1, 1}));
  EXPECT_EQ(table.rows[2], (RiskRow{3, 2, 1, 1, 0}));
}

TEST(RiskTable, AllCensoredIsNoEvents) {
  SurvivalSample s({ctl(1, false), trt(2, false)});
  EXPECT_EQ(code_of([&] { build_risk_table(s); }), ErrorCode::NoEvents);
  EXPECT_EQ(code_of([&] { RiskSetIndex{s}; }), ErrorCode::NoEvents);
}

TEST(RiskTable, IdenticalGroupsSplitEvenly) {
  SurvivalSample s({ctl(1, true), ctl(2, true), trt(1, true), trt(2, true)});
  for (const auto& row : build_risk_table(s).rows) {
    EXPECT_EQ(2 * row.events_treatment, row.events);
    EXPECT_EQ(2 * row.at_risk_treatment, row.at_risk);
  }
}

TEST(RiskTable, CensoredAtEventTimeStaysAtRisk) {
  SurvivalSample s({ctl(2, true), trt(2, false), trt(3, true)});
  const auto table = build_risk_table(s);
  EXPECT_EQ(table.rows[0], (RiskRow{2, 3, 2, 1, 0}));
}

TEST(RiskTable, InvariantsOnRandomData) {
  Stream rng(7);
  for (int rep = 0; rep < 200; ++rep) {
    auto recs = oracle::random_records(rng, 5 + rep % 40);
    SurvivalSample s(recs);
    const auto table = build_risk_table(s);
    EXPECT_EQ(table.total_events(), static_cast<std::int64_t>(s.events()));
    for (std::size_t j = 0; j < table.size(); ++j) {
      const auto& r = table.rows[j];
      EXPECT_GT(r.at_risk, 0);
      if (j > 0) {
        EXPECT_LE(r.at_risk, table.rows[j - 1].at_risk);
        EXPECT_GT(r.time, table.rows[j - 1].time);
      }
      EXPECT_LE(r.at_risk_treatment, r.at_risk);
      EXPECT_GE(r.events, 1);
      EXPECT_LE(r.events, r.at_risk);
      EXPECT_LE(r.events_treatment, std::min(r.events, r.at_risk_treatment));
    }
    // First row counts everyone whose time is at least the first event time.
    const double t0 = table.rows[0].time;
    const auto at_or_after = std::count_if(recs.begin(), recs.end(), [&](auto& r) { return r.time >= t0; });
    EXPECT_EQ(table.rows[0].at_risk, at_or_after);

    const auto brute = oracle::rows(recs);
    ASSERT_EQ(brute.size(), table.size());
    for (std::size_t j = 0; j < brute.size(); ++j) {
      EXPECT_EQ(brute[j].n, table.rows[j].at_risk);
      EXPECT_EQ(brute[j].n1, table.rows[j].at_risk_treatment);
      EXPECT_EQ(brute[j].r, table.rows[j].events);
      EXPECT_EQ(brute[j].r1, table.rows[j].events_treatment);
    }
  }
}

TEST(RiskTable, FirstRowIsSampleSizeWithoutEarlyCensoring) {
  SurvivalSample s({ctl(1, true), ctl(5, false), trt(2, true), trt(3, false)});
  EXPECT_EQ(build_risk_table(s).rows[0].at_risk, 4);
}

TEST(RiskTable, RecordOrderDoesNotMatter) {
  Stream rng(11);
  auto recs = oracle::random_records(rng, 30);
  const auto ref = build_risk_table(SurvivalSample(recs));
  for (int rep = 0; rep < 20; ++rep) {
    for (std::size_t i = recs.size() - 1; i > 0; --i) std::swap(recs[i], recs[rng.below(i + 1)]);
    EXPECT_EQ(build_risk_table(SurvivalSample(recs)).rows, ref.rows);
  }
}

TEST(RiskSetIndex, MatchesDirectTableForAnyLabels) {
  Stream rng(3);
  auto recs = oracle::random_records(rng, 40);
  SurvivalSample s(recs);
  RiskSetIndex index(s);
  auto arms = s.arms();
  for (int rep = 0; rep < 50; ++rep) {
    for (std::size_t i = arms.size() - 1; i > 0; --i) std::swap(arms[i], arms[rng.below(i + 1)]);
    EXPECT_EQ(index.table(arms).rows, build_risk_table(s.with_arms(arms)).rows);
  }
  EXPECT_EQ(index.rows(), build_risk_table(s).size());
}

TEST(KmCurve, DistinctEventsDropByOneOverN) {
  std::vector<TimeEvent> obs{{1, true}, {2, true}, {3, true}, {4, true}};
  const auto km = km_estimate(obs);
  EXPECT_DOUBLE_EQ(km.at(2), 0.5);
  EXPECT_DOUBLE_EQ(km.left_limit(2), 0.75);
  EXPECT_DOUBLE_EQ(km.at(0.5), 1.0);
  EXPECT_DOUBLE_EQ(km.at(4), 0.0);
}

TEST(KmCurve, NoEventsIsFlat) {
  std::vector<TimeEvent> obs{{1, false}, {2, false}};
  const auto km = km_estimate(obs);
  EXPECT_DOUBLE_EQ(km.at(5), 1.0);
  EXPECT_DOUBLE_EQ(km.left_limit(5), 1.0);
}

TEST(KmCurve, EmptyInputRejected) {
  EXPECT_EQ(code_of([] { km_estimate(std::span<const TimeEvent>{}); }), ErrorCode::InvalidArgument);
}

TEST(KmCurve, InterleavedCensoring) {
  std::vector<TimeEvent> obs{{1, true}, {2, true}, {2.5, false}, {3, true}, {4, false}};
  const auto km = km_estimate(obs);
  EXPECT_NEAR(km.at(1), 0.8, 1e-15);
  EXPECT_NEAR(km.at(2), 0.6, 1e-15);
  EXPECT_NEAR(km.at(2.7), 0.6, 1e-15);
  EXPECT_NEAR(km.at(3), 0.3, 1e-15);
  EXPECT_NEAR(km.left_limit(3), 0.6, 1e-15);
  EXPECT_NEAR(km.at(10), 0.3, 1e-15);
}

TEST(KmCurve, TiesDropTogether) {
  std::vector<TimeEvent> obs{{1, true}, {1, true}, {1, false}, {2, true}};
  const auto km = km_estimate(obs);
  EXPECT_DOUBLE_EQ(km.at(1), 0.5);
  EXPECT_DOUBLE_EQ(km.at(2), 0.0);
}

TEST(KmCurve, PooledMatchesTableAndRankInvariance) {
  Stream rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    SurvivalSample s(oracle::random_records(rng, 25));
    const auto km = km_estimate(s);
    const auto from_table = km_from_table(build_risk_table(s));
    ASSERT_EQ(km.steps().size(), from_table.steps().size());
    const auto tr = s.with_transformed_times([](double t) { return t * t * t + t; });
    const auto km_tr = km_estimate(tr);
    ASSERT_EQ(km.steps().size(), km_tr.steps().size());
    for (std::size_t i = 0; i < km.steps().size(); ++i) {
      EXPECT_DOUBLE_EQ(km.steps()[i].survival, from_table.steps()[i].survival);
      EXPECT_EQ(km.steps()[i].survival, km_tr.steps()[i].survival);
      EXPECT_NEAR(oracle::km_left(std::vector<SubjectRecord>(s.records().begin(), s.records().end()),
                                  km.steps()[i].time + 1e-9),
                  km.steps()[i].survival, 1e-12);
    }
  }
}
