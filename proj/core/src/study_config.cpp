#include "nph/study_config.hpp"

#include <cmath>
#include <sstream>

#include "nph/error.hpp"

namespace nph {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidArgument, "field '" + path + "': " + what);
}

const json& member(const json& doc, const std::string& key, const std::string& path) {
  if (!doc.is_object() || !doc.contains(key)) fail(path + "." + key, "missing");
  return doc.at(key);
}

double number(const json& doc, const std::string& path) {
  if (!doc.is_number()) fail(path, "expected a number");
  return doc.get<double>();
}

double number_or(const json& doc, const std::string& key, double fallback, const std::string& path) {
  if (!doc.contains(key)) return fallback;
  return number(doc.at(key), path + "." + key);
}

std::uint64_t count(const json& doc, const std::string& path) {
  if (!doc.is_number_integer() || doc.get<std::int64_t>() < 0) fail(path, "expected a nonnegative integer");
  return doc.get<std::uint64_t>();
}

std::string text(const json& doc, const std::string& path) {
  if (!doc.is_string()) fail(path, "expected a string");
  return doc.get<std::string>();
}

WeightSpec parse_weight(const json& doc, const std::string& path) {
  if (doc.is_string()) {
    const auto name = doc.get<std::string>();
    if (name == "logrank") return UnitWeight{};
    fail(path, "unknown weight '" + name + "'");
  }
  const auto kind = text(member(doc, "weight", path), path + ".weight");
  WeightSpec w;
  if (kind == "logrank") {
    w = UnitWeight{};
  } else if (kind == "fh") {
    w = FlemingHarrington{number(member(doc, "rho", path), path + ".rho"),
                          number(member(doc, "gamma", path), path + ".gamma")};
  } else if (kind == "modest") {
    w = ModestWeight{number(member(doc, "t_star", path), path + ".t_star")};
  } else {
    fail(path + ".weight", "unknown weight '" + kind + "'");
  }
  try {
    validate(w);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return w;
}

MaxComboSpec parse_maxcombo(const json& doc, const std::string& path) {
  MaxComboSpec spec;
  const auto& set = doc.at("maxcombo");
  if (set.is_string()) {
    const auto name = set.get<std::string>();
    if (name == "lin") spec = MaxComboSpec::lin();
    else if (name == "lin-two-step") spec = MaxComboSpec::lin_without_logrank();
    else fail(path + ".maxcombo", "unknown weight set '" + name + "'");
  } else if (set.is_array()) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      spec.components.push_back(parse_weight(set[i], path + ".maxcombo[" + std::to_string(i) + "]"));
    }
  } else {
    fail(path + ".maxcombo", "expected a set name or a list of weights");
  }
  if (doc.contains("draws")) spec.mvn_draws = count(doc.at("draws"), path + ".draws");
  if (doc.contains("seed")) spec.mvn_seed = count(doc.at("seed"), path + ".seed");
  try {
    validate(spec);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return spec;
}

std::vector<double> parse_alpha_pre_grid(const json& doc, const std::string& path) {
  std::vector<double> grid;
  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) grid.push_back(number(doc[i], path + "[" + std::to_string(i) + "]"));
  } else if (doc.is_object()) {
    const double from = number(member(doc, "from", path), path + ".from");
    const double to = number(member(doc, "to", path), path + ".to");
    const double step = number(member(doc, "step", path), path + ".step");
    if (!(step > 0.0) || to < from) fail(path, "need from <= to and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) grid.push_back(std::round((from + static_cast<double>(i) * step) * 1e12) / 1e12);
  } else {
    fail(path, "expected a list or {from, to, step}");
  }
  for (double a : grid) {
    if (!(a >= 0.0 && a <= 1.0)) fail(path, "levels must lie in [0, 1]");
  }
  return grid;
}

std::string hr_label(double hr) {
  std::ostringstream os;
  os << hr;
  return os.str();
}

}  // namespace

TieRule parse_tie_rule(std::string_view name) {
  if (name == "le") return TieRule::LessEqual;
  if (name == "lt") return TieRule::StrictLT;
  if (name == "add-one") return TieRule::AddOneSmoothing;
  throw Error(ErrorCode::InvalidArgument, "unknown tie rule '" + std::string(name) + "' (le, lt, add-one)");
}

TestSpec parse_test_spec(const json& doc, const std::string& path) {
  if (doc.is_string()) {
    const auto name = doc.get<std::string>();
    if (name == "logrank") return WeightSpec{UnitWeight{}};
    if (name == "maxcombo") return MaxComboSpec::lin();
    if (name == "maxcombo-two-step") return MaxComboSpec::lin_without_logrank();
    fail(path, "unknown test '" + name + "'");
  }
  if (!doc.is_object()) fail(path, "expected a string or an object");
  if (doc.contains("maxcombo")) return parse_maxcombo(doc, path);
  return parse_weight(doc, path);
}

ScenarioSpec parse_scenario(const json& doc, const std::string& path) {
  ScenarioSpec s;
  if (doc.is_string()) {
    try {
      return reference_scenario(doc.get<std::string>());
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }
  const auto type = text(member(doc, "type", path), path + ".type");
  const double mc = number_or(doc, "median_control", 12.0, path);
  if (type == "ph") {
    s = PhScenario{mc, number_or(doc, "median_treatment", 18.0, path)};
  } else if (type == "delayed") {
    s = DelayedScenario{mc, number_or(doc, "delay", 4.0, path), number_or(doc, "median_post", 18.0, path)};
  } else if (type == "subgroup") {
    s = SubgroupScenario{mc, number_or(doc, "prevalence", 0.2, path), number_or(doc, "median_subgroup", 120.0, path),
                         number_or(doc, "median_complement", 12.0, path)};
  } else if (type == "progression") {
    s = ProgressionScenario{mc, number_or(doc, "median_treatment", 18.0, path),
                            number_or(doc, "median_progression", 36.0, path),
                            number_or(doc, "median_post_progression", 3.0, path)};
  } else if (type == "null") {
    s = NullScenario{number_or(doc, "median", 12.0, path)};
  } else {
    fail(path + ".type", "unknown scenario type '" + type + "'");
  }
  try {
    validate(s);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return s;
}

TrialDesign parse_design(const json& doc, const std::string& path) {
  if (!doc.is_object()) fail(path, "expected an object");
  TrialDesign d;
  d.n_total = count(member(doc, "n_total", path), path + ".n_total");
  if (doc.contains("recruitment_days") && doc.contains("recruitment_months")) {
    fail(path, "give recruitment_days or recruitment_months, not both");
  }
  if (doc.contains("recruitment_days")) {
    d.recruitment_window = months_from_days(number(doc.at("recruitment_days"), path + ".recruitment_days"));
  } else if (doc.contains("recruitment_months")) {
    d.recruitment_window = number(doc.at("recruitment_months"), path + ".recruitment_months");
  }
  if (doc.contains("events") == doc.contains("event_fraction")) {
    fail(path, "give exactly one of events or event_fraction");
  }
  if (doc.contains("events")) {
    d.stop_rule = EventCount{count(doc.at("events"), path + ".events")};
  } else {
    d.stop_rule = EventFraction{number(doc.at("event_fraction"), path + ".event_fraction")};
  }
  try {
    validate(d);
  } catch (const Error& e) {
    fail(path, e.what());
  }
  return d;
}

StudyConfig parse_study_config(const json& doc) {
  if (!doc.is_object()) fail("$", "study config must be a JSON object");
  StudyConfig config;
  if (doc.contains("n_reps")) config.n_reps = count(doc.at("n_reps"), "n_reps");
  if (doc.contains("alpha")) config.alpha = number(doc.at("alpha"), "alpha");
  if (doc.contains("base_seed")) config.base_seed = count(doc.at("base_seed"), "base_seed");
  if (doc.contains("alpha_pre")) config.alpha_pre_grid = parse_alpha_pre_grid(doc.at("alpha_pre"), "alpha_pre");
  if (config.n_reps == 0) fail("n_reps", "must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) fail("alpha", "must lie in (0, 1)");

  const auto& cells = member(doc, "cells", "$");
  if (!cells.is_array() || cells.empty()) fail("cells", "expected a nonempty list");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const std::string path = "cells[" + std::to_string(i) + "]";
    const auto& c = cells[i];
    StudyCell cell;
    cell.id = text(member(c, "id", path), path + ".id");
    cell.scenario = parse_scenario(member(c, "scenario", path), path + ".scenario");
    cell.design = parse_design(member(c, "design", path), path + ".design");
    if (!c.contains("hr")) {
      config.cells.push_back(std::move(cell));
      continue;
    }
    const auto& hr = c.at("hr");
    std::vector<double> values;
    if (hr.is_array()) {
      for (std::size_t h = 0; h < hr.size(); ++h) values.push_back(number(hr[h], path + ".hr[" + std::to_string(h) + "]"));
    } else {
      values.push_back(number(hr, path + ".hr"));
    }
    for (double v : values) {
      StudyCell swept = cell;
      try {
        swept.scenario = with_hazard_ratio(cell.scenario, v);
      } catch (const Error& e) {
        fail(path + ".hr", e.what());
      }
      swept.hr = v;
      if (hr.is_array()) swept.id = cell.id + "@hr=" + hr_label(v);
      config.cells.push_back(std::move(swept));
    }
  }

  const auto& methods = member(doc, "methods", "$");
  if (!methods.is_array() || methods.empty()) fail("methods", "expected a nonempty list");
  for (std::size_t i = 0; i < methods.size(); ++i) {
    const std::string path = "methods[" + std::to_string(i) + "]";
    const auto& m = methods[i];
    MethodSpec method;
    method.id = text(member(m, "id", path), path + ".id");
    const auto type = text(member(m, "type", path), path + ".type");
    if (type == "conventional") {
      method.kind = ConventionalMethod{parse_test_spec(member(m, "test", path), path + ".test")};
    } else if (type == "naive" || type == "permutation") {
      TwoStepConfig cfg;
      cfg.alpha = config.alpha;
      cfg.alternative = parse_test_spec(member(m, "alternative", path), path + ".alternative");
      cfg.alpha_pre = number_or(m, "alpha_pre", cfg.alpha_pre, path);
      if (m.contains("permutations")) cfg.permutations = count(m.at("permutations"), path + ".permutations");
      if (m.contains("seed")) cfg.seed = count(m.at("seed"), path + ".seed");
      if (m.contains("tie_rule")) {
        try {
          cfg.tie_rule = parse_tie_rule(text(m.at("tie_rule"), path + ".tie_rule"));
        } catch (const Error& e) {
          fail(path + ".tie_rule", e.what());
        }
      }
      try {
        validate(cfg);
      } catch (const Error& e) {
        fail(path, e.what());
      }
      if (type == "naive") method.kind = NaiveTwoStepMethod{cfg};
      else method.kind = PermutationTwoStepMethod{cfg};
    } else {
      fail(path + ".type", "expected conventional, naive or permutation");
    }
    config.methods.push_back(std::move(method));
  }
  try {
    validate(config);
  } catch (const Error& e) {
    fail("$", e.what());
  }
  return config;
}

}  // namespace nph
