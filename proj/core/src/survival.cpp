#include "nph/survival.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nph/error.hpp"

namespace nph {

std::string_view to_string(Arm arm) noexcept {
  return arm == Arm::Treatment ? "treatment" : "control";
}

SurvivalSample::SurvivalSample(std::vector<SubjectRecord> records) : records_(std::move(records)) {
  if (records_.empty()) throw Error(ErrorCode::InvalidArgument, "survival sample is empty");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const double t = records_[i].time;
    if (!std::isfinite(t) || t < 0.0) {
      throw Error(ErrorCode::InvalidArgument,
                  "record " + std::to_string(i) + " has invalid time " + std::to_string(t));
    }
  }
}

std::size_t SurvivalSample::count(Arm arm) const noexcept {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [arm](const auto& r) { return r.arm == arm; }));
}

std::size_t SurvivalSample::events() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [](const auto& r) { return r.event; }));
}

std::vector<Arm> SurvivalSample::arms() const {
  std::vector<Arm> out(records_.size());
  std::transform(records_.begin(), records_.end(), out.begin(), [](const auto& r) { return r.arm; });
  return out;
}

SurvivalSample SurvivalSample::with_arms(std::span<const Arm> arms) const {
  if (arms.size() != records_.size()) {
    throw Error(ErrorCode::InvalidArgument, "arm vector length does not match sample size");
  }
  auto out = records_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].arm = arms[i];
  return SurvivalSample(std::move(out));
}

SurvivalSample SurvivalSample::with_swapped_arms() const {
  auto out = records_;
  for (auto& r : out) r.arm = r.arm == Arm::Control ? Arm::Treatment : Arm::Control;
  return SurvivalSample(std::move(out));
}

std::int64_t RiskTable::total_events() const noexcept {
  return std::accumulate(rows.begin(), rows.end(), std::int64_t{0},
                         [](std::int64_t acc, const RiskRow& r) { return acc + r.events; });
}

RiskSetIndex::RiskSetIndex(const SurvivalSample& sample) {
  const auto records = sample.records();
  const std::size_t n = records.size();

  std::vector<double> event_times;
  event_times.reserve(n);
  for (const auto& r : records) {
    if (r.event) event_times.push_back(r.time);
  }
  if (event_times.empty()) throw Error(ErrorCode::NoEvents, "every record is censored");
  std::sort(event_times.begin(), event_times.end());
  event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());

  const std::size_t rows = event_times.size();
  std::vector<std::int64_t> starts(rows + 1, 0);  // records whose last row is j
  std::vector<std::int64_t> events(rows, 0);
  last_row_.resize(n);
  event_row_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = records[i].time;
    auto it = std::upper_bound(event_times.begin(), event_times.end(), t);
    const auto last = static_cast<std::int32_t>(it - event_times.begin()) - 1;
    last_row_[i] = last;
    if (last >= 0) ++starts[static_cast<std::size_t>(last)];
    if (records[i].event) {
      event_row_[i] = last;  // t is itself an event time
      ++events[static_cast<std::size_t>(last)];
    } else {
      event_row_[i] = -1;
    }
  }

  pooled_.resize(rows);
  std::int64_t at_risk = 0;
  for (std::size_t j = rows; j-- > 0;) {
    at_risk += starts[j];
    pooled_[j] = PooledRow{event_times[j], at_risk, events[j]};
  }
  pooled_table_.rows.resize(rows);
  for (std::size_t j = 0; j < rows; ++j) {
    pooled_table_.rows[j] = RiskRow{pooled_[j].time, pooled_[j].at_risk, 0, pooled_[j].events, 0};
  }
}

RiskTable RiskSetIndex::table(std::span<const Arm> arms) const {
  if (arms.size() != last_row_.size()) {
    throw Error(ErrorCode::InvalidArgument, "arm vector length does not match indexed sample");
  }
  const std::size_t rows = pooled_.size();
  std::vector<std::int64_t> starts(rows, 0);
  RiskTable out;
  out.rows.resize(rows);
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (arms[i] != Arm::Treatment) continue;
    if (last_row_[i] >= 0) ++starts[static_cast<std::size_t>(last_row_[i])];
    if (event_row_[i] >= 0) ++out.rows[static_cast<std::size_t>(event_row_[i])].events_treatment;
  }
  std::int64_t at_risk_treatment = 0;
  for (std::size_t j = rows; j-- > 0;) {
    at_risk_treatment += starts[j];
    auto& row = out.rows[j];
    row.time = pooled_[j].time;
    row.at_risk = pooled_[j].at_risk;
    row.events = pooled_[j].events;
    row.at_risk_treatment = at_risk_treatment;
  }
  return out;
}

RiskTable build_risk_table(const SurvivalSample& sample) {
  return RiskSetIndex(sample).table(sample.arms());
}

KmCurve::KmCurve(std::vector<Step> steps) : steps_(std::move(steps)) {}

double KmCurve::at(double t) const noexcept {
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double v, const Step& s) { return v < s.time; });
  return it == steps_.begin() ? 1.0 : std::prev(it)->survival;
}

double KmCurve::left_limit(double t) const noexcept {
  auto it = std::lower_bound(steps_.begin(), steps_.end(), t,
                             [](const Step& s, double v) { return s.time < v; });
  return it == steps_.begin() ? 1.0 : std::prev(it)->survival;
}

KmCurve km_from_table(const RiskTable& table) {
  std::vector<KmCurve::Step> steps;
  steps.reserve(table.rows.size());
  double s = 1.0;
  for (const auto& row : table.rows) {
    s *= 1.0 - static_cast<double>(row.events) / static_cast<double>(row.at_risk);
    steps.push_back({row.time, s});
  }
  return KmCurve(std::move(steps));
}

KmCurve km_estimate(std::span<const TimeEvent> observations) {
  if (observations.empty()) throw Error(ErrorCode::InvalidArgument, "no observations for KM estimate");
  std::vector<SubjectRecord> records;
  records.reserve(observations.size());
  for (const auto& o : observations) records.push_back({o.time, o.event, Arm::Control});
  return km_estimate(SurvivalSample(std::move(records)));
}

KmCurve km_estimate(const SurvivalSample& sample) {
  if (sample.events() == 0) return KmCurve();
  return km_from_table(RiskSetIndex(sample).pooled());
}

}  // namespace nph
