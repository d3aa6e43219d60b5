#include "nph/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <vector>

#include "nph/error.hpp"

namespace nph {
namespace {

std::string trim(std::string_view s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line, const char* column) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ParseError(line, std::string("column '") + column + "': '" + s + "' is not a number");
  }
  return v;
}

std::string optional_number(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& message)
    : Error(ErrorCode::InvalidArgument, "line " + std::to_string(line) + ": " + message), line_(line) {}

std::string format_number(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

SurvivalSample read_sample_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split(line);
  }
  if (header.empty()) throw ParseError(line_no == 0 ? 1 : line_no, "missing header");
  std::map<std::string, std::size_t> columns;
  for (std::size_t i = 0; i < header.size(); ++i) columns[lower(header[i])] = i;
  for (const char* required : {"time", "event", "group"}) {
    if (!columns.count(required)) {
      throw ParseError(line_no, std::string("header lacks required column '") + required + "'");
    }
  }
  const auto time_col = columns["time"];
  const auto event_col = columns["event"];
  const auto group_col = columns["group"];

  std::vector<SubjectRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                    std::to_string(fields.size()));
    }
    SubjectRecord r;
    r.time = parse_double(fields[time_col], line_no, "time");
    if (!(r.time >= 0.0) || !std::isfinite(r.time)) throw ParseError(line_no, "time must be finite and >= 0");
    const auto& ev = fields[event_col];
    if (ev == "1") r.event = true;
    else if (ev == "0") r.event = false;
    else throw ParseError(line_no, "column 'event': expected 0 or 1, found '" + ev + "'");
    const auto group = lower(fields[group_col]);
    if (group == "treatment" || group == "1") r.arm = Arm::Treatment;
    else if (group == "control" || group == "0") r.arm = Arm::Control;
    else throw ParseError(line_no, "column 'group': expected control/treatment or 0/1, found '" + fields[group_col] + "'");
    records.push_back(r);
  }
  if (records.empty()) throw ParseError(line_no, "no data rows");
  return SurvivalSample(std::move(records));
}

void write_dataset_csv(std::ostream& out, const TrialDataset& data) {
  out << "time,event,group,entry,admin_censored\n";
  for (const auto& s : data.subjects) {
    out << format_number(s.time) << ',' << (s.event ? 1 : 0) << ',' << to_string(s.arm) << ','
        << format_number(s.entry) << ',' << (s.admin_censored || !s.enrolled ? 1 : 0) << '\n';
  }
}

void write_study_header(std::ostream& out) {
  out << "scenario,method,alpha_pre,hr,n,recruitment,rejection_rate,mc_se,n_reps,errors\n";
}

void write_study_rows(std::ostream& out, std::span<const StudyRow> rows) {
  for (const auto& r : rows) {
    out << r.scenario << ',' << r.method << ',' << optional_number(r.alpha_pre) << ',' << optional_number(r.hr)
        << ',' << r.n << ',' << format_number(r.recruitment) << ',' << format_number(r.rejection_rate) << ','
        << format_number(r.mc_se) << ',' << r.n_reps << ',' << r.errors << '\n';
  }
}

std::set<std::string> read_study_scenarios(std::istream& in) {
  std::set<std::string> out;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    out.insert(split(line).front());
  }
  return out;
}

void write_conditional_csv(std::ostream& out, std::span<const ConditionalPValue> rows) {
  out << "replicate,p_pre,branch,p_second_step,p_logrank,p_alternative,failed\n";
  for (const auto& r : rows) {
    out << r.replicate << ',' << format_number(r.p_pre) << ',' << to_string(r.branch) << ','
        << format_number(r.p_second_step) << ',' << format_number(r.p_logrank) << ','
        << optional_number(r.p_alternative) << ',' << (r.failed ? 1 : 0) << '\n';
  }
}

}  // namespace nph
