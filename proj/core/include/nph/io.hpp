#pragma once

#include <iosfwd>
#include <set>
#include <span>
#include <string>

#include "nph/simulate.hpp"
#include "nph/study.hpp"
#include "nph/survival.hpp"

namespace nph {

// Raised for malformed CSV input; line() is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Shortest decimal text that round-trips to the same double.
std::string format_number(double v);

// Columns time,event,group[,entry] in any order (header required). event is
// 0/1; group is control/treatment (any case) or 0/1. Extra columns are ignored.
SurvivalSample read_sample_csv(std::istream& in);

// time,event,group,entry,admin_censored
void write_dataset_csv(std::ostream& out, const TrialDataset& data);

// scenario,method,alpha_pre,hr,n,recruitment,rejection_rate,mc_se,n_reps,errors
void write_study_header(std::ostream& out);
void write_study_rows(std::ostream& out, std::span<const StudyRow> rows);

// Scenario ids present in an existing study results file.
std::set<std::string> read_study_scenarios(std::istream& in);

// replicate,p_pre,branch,p_second_step,p_logrank,p_alternative,failed
void write_conditional_csv(std::ostream& out, std::span<const ConditionalPValue> rows);

}  // namespace nph
