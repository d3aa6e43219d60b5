#include <gtest/gtest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "nph/error.hpp"
#include "nph/study.hpp"
#include "nph/study_config.hpp"

using namespace nph;
using nlohmann::json;

namespace {

StudyConfig small_study() {
  StudyConfig cfg;
  StudyCell cell;
  cell.id = "null";
  cell.scenario = NullScenario{};
  cell.design.n_total = 100;
  cfg.cells.push_back(cell);
  cell.id = "delay";
  cell.scenario = reference_scenario("delay_long");
  cell.design.stop_rule = EventCount{60};
  cfg.cells.push_back(cell);

  MaxComboSpec mc = MaxComboSpec::lin_without_logrank();
  mc.mvn_draws = 2000;
  TwoStepConfig ts;
  ts.alternative = mc;
  ts.alpha_pre = 0.2;
  ts.permutations = 40;
  cfg.methods.push_back({"lr", ConventionalMethod{}});
  cfg.methods.push_back({"fh01", ConventionalMethod{WeightSpec{FlemingHarrington{0, 1}}}});
  cfg.methods.push_back({"nts", NaiveTwoStepMethod{ts}});
  cfg.methods.push_back({"pts", PermutationTwoStepMethod{ts}});
  cfg.n_reps = 30;
  cfg.base_seed = 5;
  return cfg;
}

std::string message_of(const json& doc) {
  try {
    parse_study_config(doc);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidArgument);
    return e.what();
  }
  ADD_FAILURE() << "config accepted: " << doc.dump();
  return {};
}

json minimal_config() {
  return json::parse(R"({
    "n_reps": 10,
    "cells": [{"id": "null", "scenario": "null", "design": {"n_total": 40, "event_fraction": 0.75}}],
    "methods": [{"id": "lr", "type": "conventional", "test": "logrank"}]
  })");
}

}  // namespace

TEST(PredictionInterval, PlugIn) {
  const auto [lo, hi] = prediction_interval(0.025, 100000);
  EXPECT_NEAR(lo, 0.02403, 5e-6);
  EXPECT_NEAR(hi, 0.02597, 5e-6);
  const auto [lo2, hi2] = prediction_interval(0.025, 2000);
  EXPECT_NEAR(lo2, 0.01816, 5e-6);
  EXPECT_NEAR(hi2, 0.03184, 5e-6);
  const auto [lo3, hi3] = prediction_interval(0.025, 1000000000);
  EXPECT_LT(hi3 - lo3, 3e-5);
  EXPECT_LT(hi3 - lo3, prediction_interval(0.025, 1000).second - prediction_interval(0.025, 1000).first);
  const auto [lo4, hi4] = prediction_interval(0.5, 1);
  EXPECT_EQ(lo4, 0.0);
  EXPECT_EQ(hi4, 1.0);
}

TEST(Study, SingleReplicate) {
  auto cfg = small_study();
  cfg.n_reps = 1;
  for (const auto& row : run_study(cfg)) {
    EXPECT_TRUE(row.rejection_rate == 0.0 || row.rejection_rate == 1.0);
    EXPECT_EQ(row.mc_se, 0.0);
    EXPECT_EQ(row.n_reps, 1u);
  }
}

TEST(Study, RowsAndStandardErrors) {
  const auto rows = run_study(small_study());
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& row : rows) {
    const double r = row.rejection_rate;
    EXPECT_NEAR(row.mc_se, std::sqrt(r * (1 - r) / row.n_reps), 1e-15);
    EXPECT_EQ(row.alpha_pre.has_value(), row.method == "nts" || row.method == "pts");
    EXPECT_EQ(row.n, 100u);
  }
  EXPECT_EQ(rows[0].scenario, "null");
  EXPECT_EQ(rows[4].scenario, "delay");
}

TEST(Study, DeterministicAndThreadInvariant) {
  const auto cfg = small_study();
  const auto a = run_study(cfg);
  const auto b = run_study(cfg);
  StudyOptions opts;
  opts.threads = 4;
  const auto c = run_study(cfg, opts);
  ASSERT_EQ(a.size(), c.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].rejection_rate, b[i].rejection_rate);
    EXPECT_EQ(a[i].rejection_rate, c[i].rejection_rate);
    EXPECT_EQ(a[i].errors, c[i].errors);
  }
}

TEST(Study, NaiveAtZeroMatchesLogrankPerReplicate) {
  auto cfg = small_study();
  cfg.methods.resize(3);
  cfg.alpha_pre_grid = {0.0};
  cfg.n_reps = 60;
  const auto rows = run_study(cfg);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0].rejection_rate, rows[2].rejection_rate);
  EXPECT_EQ(rows[3].rejection_rate, rows[5].rejection_rate);
  // Per replicate: the exported PH-branch p-values equal the log-rank p-values.
  TwoStepConfig ts;
  ts.alpha_pre = 0.0;
  for (const auto& p : export_conditional_pvalues(cfg.cells[1], 1, cfg.base_seed, ts, 60)) {
    EXPECT_EQ(p.branch, Branch::PH);
    EXPECT_EQ(p.p_second_step, p.p_logrank);
  }
}

TEST(Study, GridAndCallbacks) {
  auto cfg = small_study();
  cfg.alpha_pre_grid = {0.0, 0.5, 1.0};
  std::size_t cells_seen = 0;
  StudyOptions opts;
  opts.on_cell = [&](std::span<const StudyRow> rows) {
    ++cells_seen;
    EXPECT_EQ(rows.size(), 8u);
  };
  opts.skip_cell = [](const StudyCell& c) { return c.id == "null"; };
  const auto rows = run_study(cfg, opts);
  EXPECT_EQ(cells_seen, 1u);
  EXPECT_EQ(rows.size(), 8u);
  for (const auto& r : rows) EXPECT_EQ(r.scenario, "delay");
}

TEST(Study, ValidationErrors) {
  auto cfg = small_study();
  cfg.methods.push_back(cfg.methods.front());
  EXPECT_THROW(validate(cfg), Error);
  cfg = small_study();
  cfg.cells.clear();
  EXPECT_THROW(validate(cfg), Error);
  cfg = small_study();
  cfg.n_reps = 0;
  EXPECT_THROW(run_study(cfg), Error);
}

TEST(ConditionalExport, BranchesAndLookup) {
  auto cfg = small_study();
  const auto rows = export_conditional_pvalues(cfg, "null", "nts", 1.0, 20);
  ASSERT_EQ(rows.size(), 20u);
  for (const auto& r : rows) {
    if (r.failed) continue;
    EXPECT_EQ(r.branch == Branch::NPH, r.p_pre <= 1.0);
    ASSERT_TRUE(r.p_alternative.has_value());
    EXPECT_EQ(r.p_second_step, *r.p_alternative);
  }
  EXPECT_THROW(export_conditional_pvalues(cfg, "nope", "nts", 0.2, 5), Error);
  EXPECT_THROW(export_conditional_pvalues(cfg, "null", "lr", 0.2, 5), Error);
}

TEST(StudyConfigJson, FullDocument) {
  const auto doc = json::parse(R"({
    "n_reps": 50, "alpha": 0.025, "base_seed": 7,
    "alpha_pre": {"from": 0, "to": 0.1, "step": 0.025},
    "cells": [
      {"id": "ph", "scenario": "ph", "design": {"n_total": 400, "recruitment_days": 400, "events": 300},
       "hr": [0.6, 0.8]},
      {"id": "d", "scenario": {"type": "delayed", "median_control": 12, "delay": 2, "median_post": 20},
       "design": {"n_total": 200, "recruitment_months": 6, "event_fraction": 0.5}}
    ],
    "methods": [
      {"id": "lr", "type": "conventional", "test": "logrank"},
      {"id": "m6", "type": "conventional", "test": {"weight": "modest", "t_star": 6}},
      {"id": "mc", "type": "conventional", "test": {"maxcombo": "lin", "draws": 1000, "seed": 3}},
      {"id": "nts", "type": "naive", "alternative": "maxcombo-two-step", "alpha_pre": 0.2},
      {"id": "pts", "type": "permutation", "alternative": {"weight": "fh", "rho": 0, "gamma": 1},
       "permutations": 500, "seed": 11, "tie_rule": "add-one"}
    ]
  })");
  const auto cfg = parse_study_config(doc);
  EXPECT_EQ(cfg.n_reps, 50u);
  EXPECT_EQ(cfg.base_seed, 7u);
  ASSERT_EQ(cfg.alpha_pre_grid.size(), 5u);
  EXPECT_EQ(cfg.alpha_pre_grid[3], 0.075);
  ASSERT_EQ(cfg.cells.size(), 3u);
  EXPECT_EQ(cfg.cells[0].id, "ph@hr=0.6");
  EXPECT_EQ(cfg.cells[1].id, "ph@hr=0.8");
  EXPECT_EQ(cfg.cells[1].hr, 0.8);
  EXPECT_EQ(std::get<PhScenario>(cfg.cells[1].scenario).median_treatment, 15.0);
  EXPECT_NEAR(cfg.cells[0].design.recruitment_window, 400 / 30.4375, 1e-12);
  EXPECT_EQ(cfg.cells[2].design.recruitment_window, 6.0);
  EXPECT_EQ(cfg.cells[2].design.target_events(), 100u);
  EXPECT_EQ(std::get<DelayedScenario>(cfg.cells[2].scenario).median_post, 20.0);
  ASSERT_EQ(cfg.methods.size(), 5u);
  const auto& mc = std::get<MaxComboSpec>(std::get<ConventionalMethod>(cfg.methods[2].kind).test);
  EXPECT_EQ(mc.mvn_draws, 1000u);
  EXPECT_EQ(mc.components.size(), 4u);
  const auto& pts = std::get<PermutationTwoStepMethod>(cfg.methods[4].kind).config;
  EXPECT_EQ(pts.permutations, 500u);
  EXPECT_EQ(pts.seed, 11u);
  EXPECT_EQ(pts.tie_rule, TieRule::AddOneSmoothing);
  EXPECT_EQ(std::get<NaiveTwoStepMethod>(cfg.methods[3].kind).config.alpha_pre, 0.2);
}

TEST(StudyConfigJson, ErrorsNameTheField) {
  EXPECT_NO_THROW(parse_study_config(minimal_config()));

  auto doc = minimal_config();
  doc["cells"][0]["design"]["n_total"] = 7;
  EXPECT_NE(message_of(doc).find("cells[0].design"), std::string::npos);

  doc = minimal_config();
  doc["cells"][0]["design"].erase("n_total");
  EXPECT_NE(message_of(doc).find("cells[0].design.n_total"), std::string::npos);

  doc = minimal_config();
  doc["cells"][0]["design"]["events"] = 500;
  doc["cells"][0]["design"].erase("event_fraction");
  EXPECT_NE(message_of(doc).find("cells[0].design"), std::string::npos);

  doc = minimal_config();
  doc["methods"][0]["test"] = "wilcoxon";
  EXPECT_NE(message_of(doc).find("methods[0].test"), std::string::npos);

  doc = minimal_config();
  doc["methods"].push_back({{"id", "nts"}, {"type", "naive"}, {"alternative", "maxcombo"}});
  EXPECT_NE(message_of(doc).find("methods[1]"), std::string::npos);

  doc = minimal_config();
  doc["methods"][0]["type"] = "magic";
  EXPECT_NE(message_of(doc).find("methods[0].type"), std::string::npos);

  doc = minimal_config();
  doc["alpha"] = 2;
  EXPECT_NE(message_of(doc).find("alpha"), std::string::npos);

  doc = minimal_config();
  doc["cells"][0]["hr"] = json::array({0.8});
  EXPECT_NE(message_of(doc).find("cells[0].hr"), std::string::npos);

  doc = minimal_config();
  doc["cells"][0]["scenario"] = {{"type", "ph"}, {"median_control", -3}};
  EXPECT_NE(message_of(doc).find("cells[0].scenario"), std::string::npos);

  doc = minimal_config();
  doc["alpha_pre"] = json::array({0.1, 1.5});
  EXPECT_NE(message_of(doc).find("alpha_pre"), std::string::npos);

  doc = minimal_config();
  doc["methods"].push_back(doc["methods"][0]);
  EXPECT_NE(message_of(doc).find("duplicate"), std::string::npos);
}

TEST(StudyConfigJson, TestSpecShorthands) {
  EXPECT_EQ(std::get<WeightSpec>(parse_test_spec("logrank")), WeightSpec{UnitWeight{}});
  EXPECT_EQ(std::get<MaxComboSpec>(parse_test_spec("maxcombo")), MaxComboSpec::lin());
  EXPECT_EQ(std::get<MaxComboSpec>(parse_test_spec("maxcombo-two-step")), MaxComboSpec::lin_without_logrank());
  const auto custom = std::get<MaxComboSpec>(
      parse_test_spec(json::parse(R"({"maxcombo": [{"weight": "fh", "rho": 1, "gamma": 0}, {"weight": "modest", "t_star": 6}]})")));
  ASSERT_EQ(custom.components.size(), 2u);
  EXPECT_EQ(custom.components[1], WeightSpec{ModestWeight{6}});
  EXPECT_THROW(parse_test_spec(json::parse(R"({"weight": "fh", "rho": -1, "gamma": 0})")), Error);
  EXPECT_EQ(parse_tie_rule("lt"), TieRule::StrictLT);
  EXPECT_THROW(parse_tie_rule("gt"), Error);
}
