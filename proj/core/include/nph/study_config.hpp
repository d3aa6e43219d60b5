#pragma once

#include <nlohmann/json.hpp>

#include "nph/study.hpp"

namespace nph {

// JSON form of a study. Errors are InvalidArgument naming the offending
// field path, e.g. "cells[1].design.n_total".
//
// {
//   "n_reps": 1000, "alpha": 0.025, "base_seed": 7,
//   "alpha_pre": [0.05, 0.2]   or   {"from": 0, "to": 1, "step": 0.025},
//   "cells": [{
//     "id": "ph",
//     "scenario": "ph"  or  {"type": "delayed", "median_control": 12, "delay": 4, "median_post": 18},
//     "design": {"n_total": 400, "recruitment_days": 400, "events": 300},
//     "hr": [0.6, 0.8, 1.0]        // optional sweep: one cell per value, id "ph@hr=0.8"
//   }],
//   "methods": [
//     {"id": "lr", "type": "conventional", "test": "logrank"},
//     {"id": "nts_mc", "type": "naive", "alternative": "maxcombo-two-step", "alpha_pre": 0.2},
//     {"id": "pts_fh01", "type": "permutation", "alternative": {"weight": "fh", "rho": 0, "gamma": 1},
//      "permutations": 500, "seed": 11, "tie_rule": "le"}
//   ]
// }
StudyConfig parse_study_config(const nlohmann::json& doc);

// Accepts "logrank", "maxcombo", "maxcombo-two-step", {"weight": "fh"|"modest"|"logrank", ...}
// or {"maxcombo": "lin"|"lin-two-step"|[weights...], "draws": N, "seed": S}.
TestSpec parse_test_spec(const nlohmann::json& doc, const std::string& path = "test");

ScenarioSpec parse_scenario(const nlohmann::json& doc, const std::string& path = "scenario");

TrialDesign parse_design(const nlohmann::json& doc, const std::string& path = "design");

TieRule parse_tie_rule(std::string_view name);

}  // namespace nph
