#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace nph {

enum class Arm : std::uint8_t { Control = 0, Treatment = 1 };

std::string_view to_string(Arm arm) noexcept;

struct SubjectRecord {
  double time = 0.0;  // months
  bool event = false;
  Arm arm = Arm::Control;

  bool operator==(const SubjectRecord&) const = default;
};

// Right-censored two-group time-to-event data. Immutable once built.
class SurvivalSample {
 public:
  // Throws InvalidArgument if empty or if any time is negative or not finite.
  explicit SurvivalSample(std::vector<SubjectRecord> records);

  std::span<const SubjectRecord> records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }
  std::size_t count(Arm arm) const noexcept;
  std::size_t events() const noexcept;
  bool has_both_arms() const noexcept { return count(Arm::Control) > 0 && count(Arm::Treatment) > 0; }

  std::vector<Arm> arms() const;

  // Same times and events with a new arm for every record (record order).
  SurvivalSample with_arms(std::span<const Arm> arms) const;

  SurvivalSample with_swapped_arms() const;

  template <class F>
  SurvivalSample with_transformed_times(F&& f) const {
    auto out = records_;
    for (auto& r : out) r.time = f(r.time);
    return SurvivalSample(std::move(out));
  }

 private:
  std::vector<SubjectRecord> records_;
};

// One row per distinct event time.
struct RiskRow {
  double time = 0.0;
  std::int64_t at_risk = 0;
  std::int64_t at_risk_treatment = 0;
  std::int64_t events = 0;
  std::int64_t events_treatment = 0;

  bool operator==(const RiskRow&) const = default;
};

struct RiskTable {
  std::vector<RiskRow> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
  std::int64_t total_events() const noexcept;
};

// Maps every record to the event-time rows it contributes to. Built once per
// set of (time, event) pairs, it yields the risk table for any assignment of
// arms in O(n + J). Permutation tests rely on this: relabelling arms never
// changes the pooled risk sets.
class RiskSetIndex {
 public:
  // Throws NoEvents if every record is censored.
  explicit RiskSetIndex(const SurvivalSample& sample);

  // `arms` is in the record order of the sample used for construction.
  RiskTable table(std::span<const Arm> arms) const;

  std::size_t subjects() const noexcept { return last_row_.size(); }
  std::size_t rows() const noexcept { return pooled_.size(); }

  // Pooled table (treatment columns zero).
  const RiskTable& pooled() const noexcept { return pooled_table_; }

 private:
  struct PooledRow {
    double time;
    std::int64_t at_risk;
    std::int64_t events;
  };
  std::vector<PooledRow> pooled_;
  RiskTable pooled_table_;
  // Index of the last row whose time is <= the record's time, -1 if none.
  std::vector<std::int32_t> last_row_;
  // Row of the record's event, -1 if censored.
  std::vector<std::int32_t> event_row_;
};

// Censored subjects at time t stay in the risk set for events at t.
// Throws NoEvents if every record is censored.
RiskTable build_risk_table(const SurvivalSample& sample);

struct TimeEvent {
  double time = 0.0;
  bool event = false;
};

// Kaplan-Meier step function starting at S = 1.
class KmCurve {
 public:
  struct Step {
    double time;
    double survival;  // value from `time` onwards
  };

  KmCurve() = default;
  explicit KmCurve(std::vector<Step> steps);

  // Right-continuous value S(t).
  double at(double t) const noexcept;
  // Left limit S(t-).
  double left_limit(double t) const noexcept;

  std::span<const Step> steps() const noexcept { return steps_; }

 private:
  std::vector<Step> steps_;
};

// Throws InvalidArgument on empty input.
KmCurve km_estimate(std::span<const TimeEvent> observations);

// Pooled curve over both arms.
KmCurve km_estimate(const SurvivalSample& sample);

// Pooled curve from the event counts of a risk table.
KmCurve km_from_table(const RiskTable& table);

}  // namespace nph
