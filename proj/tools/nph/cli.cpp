#include "nph/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "nph/coxph.hpp"
#include "nph/error.hpp"
#include "nph/io.hpp"
#include "nph/maxcombo.hpp"
#include "nph/simulate.hpp"
#include "nph/study.hpp"
#include "nph/study_config.hpp"
#include "nph/twostep.hpp"
#include "nph/wlrt.hpp"

namespace nph::cli {
namespace {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int default_threads() {
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

SurvivalSample load_sample(const std::string& path) {
  if (path == "-") return read_sample_csv(std::cin);
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file '" + path + "'");
  return read_sample_csv(in);
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

// Weight and max-combo flags shared by `test` and `twostep`.
struct WeightArgs {
  std::optional<double> rho, gamma, t_star;
  std::optional<std::size_t> draws;
  std::optional<std::uint64_t> mvn_seed;

  void add(CLI::App& app) {
    app.add_option("--rho", rho, "Fleming-Harrington rho (method fh)");
    app.add_option("--gamma", gamma, "Fleming-Harrington gamma (method fh)");
    app.add_option("--t-star", t_star, "Modest weight t* in months (method modest)");
    app.add_option("--draws", draws, "MVN integration draws (max-combo)");
    app.add_option("--mvn-seed", mvn_seed, "MVN integration seed (max-combo)");
  }

  // Builds the test; rejects flags that do not belong to the chosen method.
  TestSpec build(const std::string& method, bool two_step) const {
    const bool fh = method == "fh";
    const bool modest = method == "modest";
    const bool mc = method == "maxcombo";
    if ((rho || gamma) && !fh) throw UsageError("--rho/--gamma require --method fh");
    if (t_star && !modest) throw UsageError("--t-star requires --method modest");
    if ((draws || mvn_seed) && !mc) throw UsageError("--draws/--mvn-seed require --method maxcombo");
    if (fh && !(rho && gamma)) throw UsageError("--method fh needs --rho and --gamma");
    if (modest && !t_star) throw UsageError("--method modest needs --t-star");

    TestSpec spec;
    if (method == "logrank") {
      spec = WeightSpec{UnitWeight{}};
    } else if (fh) {
      spec = WeightSpec{FlemingHarrington{*rho, *gamma}};
    } else if (modest) {
      spec = WeightSpec{ModestWeight{*t_star}};
    } else if (mc) {
      auto m = two_step ? MaxComboSpec::lin_without_logrank() : MaxComboSpec::lin();
      if (draws) m.mvn_draws = *draws;
      if (mvn_seed) m.mvn_seed = *mvn_seed;
      spec = m;
    } else {
      throw UsageError("unknown method '" + method + "'");
    }
    validate(spec);
    return spec;
  }
};

// Scenario and design flags shared by `simulate` and `calibrate`.
struct TrialArgs {
  std::string scenario = "ph";
  std::optional<double> mc, mt, delay, median_post, prevalence, median_subgroup, median_complement,
      median_progression, median_post_progression, median, hr;
  std::size_t n = 400;
  std::optional<double> recruitment_days, recruitment_months;
  std::optional<std::size_t> events;
  std::optional<double> event_fraction;

  void add_scenario(CLI::App& app) {
    app.add_option("--scenario", scenario,
                   "ph, delay_short, delay_long, subgroup_low, subgroup_high, progression_short, "
                   "progression_long or null")
        ->capture_default_str();
    app.add_option("--mc", mc, "Control median (months)");
    app.add_option("--mt", mt, "Treatment median (ph, progression)");
    app.add_option("--delay", delay, "Effect delay (delayed scenarios)");
    app.add_option("--median-post", median_post, "Treatment median after the delay");
    app.add_option("--prevalence", prevalence, "Subgroup prevalence");
    app.add_option("--median-subgroup", median_subgroup, "Subgroup median");
    app.add_option("--median-complement", median_complement, "Subgroup complement median");
    app.add_option("--median-progression", median_progression, "Median time to progression");
    app.add_option("--median-post-progression", median_post_progression, "Median survival after progression");
    app.add_option("--median", median, "Common median (null scenario)");
    app.add_option("--hr", hr, "Hazard ratio applied to the treatment-side median");
  }

  void add_design(CLI::App& app, bool stop_rule) {
    app.add_option("--n", n, "Total subjects (even)")->capture_default_str();
    auto* days = app.add_option("--recruitment-days", recruitment_days, "Recruitment window in days (default 400)");
    auto* months = app.add_option("--recruitment-months", recruitment_months, "Recruitment window in months");
    days->excludes(months);
    if (stop_rule) {
      auto* ev = app.add_option("--events", events, "Stop after this many events");
      auto* frac = app.add_option("--event-fraction", event_fraction, "Stop after this fraction of subjects had an event");
      ev->excludes(frac);
    }
  }

  ScenarioSpec build_scenario() const {
    ScenarioSpec s;
    try {
      s = reference_scenario(scenario);
    } catch (const Error&) {
      throw UsageError("--scenario: unknown scenario '" + scenario + "'");
    }
    const auto reject = [](const std::optional<double>& v, const char* flag, const char* kind) {
      if (v) throw UsageError(std::string(flag) + " does not apply to the " + kind + " scenario");
    };
    std::visit(overloaded{
                   [&](PhScenario& p) {
                     if (mc) p.median_control = *mc;
                     if (mt) p.median_treatment = *mt;
                     for (auto [v, f] : {std::pair{delay, "--delay"}, {median_post, "--median-post"},
                                         {prevalence, "--prevalence"}, {median_subgroup, "--median-subgroup"},
                                         {median_complement, "--median-complement"},
                                         {median_progression, "--median-progression"},
                                         {median_post_progression, "--median-post-progression"},
                                         {median, "--median"}}) {
                       reject(v, f, "ph");
                     }
                   },
                   [&](DelayedScenario& d) {
                     if (mc) d.median_control = *mc;
                     if (delay) d.delay = *delay;
                     if (median_post) d.median_post = *median_post;
                     for (auto [v, f] : {std::pair{mt, "--mt"}, {prevalence, "--prevalence"},
                                         {median_subgroup, "--median-subgroup"},
                                         {median_complement, "--median-complement"},
                                         {median_progression, "--median-progression"},
                                         {median_post_progression, "--median-post-progression"},
                                         {median, "--median"}}) {
                       reject(v, f, "delayed");
                     }
                   },
                   [&](SubgroupScenario& g) {
                     if (mc) g.median_control = *mc;
                     if (prevalence) g.prevalence = *prevalence;
                     if (median_subgroup) g.median_subgroup = *median_subgroup;
                     if (median_complement) g.median_complement = *median_complement;
                     for (auto [v, f] : {std::pair{mt, "--mt"}, {delay, "--delay"}, {median_post, "--median-post"},
                                         {median_progression, "--median-progression"},
                                         {median_post_progression, "--median-post-progression"},
                                         {median, "--median"}}) {
                       reject(v, f, "subgroup");
                     }
                   },
                   [&](ProgressionScenario& p) {
                     if (mc) p.median_control = *mc;
                     if (mt) p.median_treatment = *mt;
                     if (median_progression) p.median_progression = *median_progression;
                     if (median_post_progression) p.median_post_progression = *median_post_progression;
                     for (auto [v, f] : {std::pair{delay, "--delay"}, {median_post, "--median-post"},
                                         {prevalence, "--prevalence"}, {median_subgroup, "--median-subgroup"},
                                         {median_complement, "--median-complement"}, {median, "--median"}}) {
                       reject(v, f, "progression");
                     }
                   },
                   [&](NullScenario& z) {
                     if (median) z.median = *median;
                     for (auto [v, f] : {std::pair{mc, "--mc"}, {mt, "--mt"}, {delay, "--delay"},
                                         {median_post, "--median-post"}, {prevalence, "--prevalence"},
                                         {median_subgroup, "--median-subgroup"},
                                         {median_complement, "--median-complement"},
                                         {median_progression, "--median-progression"},
                                         {median_post_progression, "--median-post-progression"}, {hr, "--hr"}}) {
                       reject(v, f, "null");
                     }
                   },
               },
               s);
    if (hr) s = with_hazard_ratio(s, *hr);
    validate(s);
    return s;
  }

  TrialDesign build_design() const {
    TrialDesign d;
    d.n_total = n;
    if (recruitment_days) d.recruitment_window = months_from_days(*recruitment_days);
    if (recruitment_months) d.recruitment_window = *recruitment_months;
    if (events) d.stop_rule = EventCount{*events};
    if (event_fraction) d.stop_rule = EventFraction{*event_fraction};
    validate(d);
    return d;
  }
};

void print(std::ostream& out, bool as_json, const json& doc) {
  if (as_json) {
    out << doc.dump(2) << '\n';
    return;
  }
  for (const auto& [key, value] : doc.items()) {
    if (key == "schema_version") continue;
    if (value.is_array() && !value.empty() && value.front().is_object()) {
      out << key << ":\n";
      for (const auto& item : value) {
        out << " ";
        for (const auto& [k, v] : item.items()) out << ' ' << k << '=' << (v.is_string() ? v.get<std::string>() : v.dump());
        out << '\n';
      }
    } else {
      out << key << ": " << (value.is_string() ? value.get<std::string>() : value.dump()) << '\n';
    }
  }
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------- test

struct TestCommand {
  std::string input;
  std::string method = "logrank";
  WeightArgs weights;
  bool as_json = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("test", "Run a conventional test on a dataset");
    cmd->add_option("--input,-i", input, "CSV with columns time,event,group[,entry]; '-' for stdin")->required();
    cmd->add_option("--method,-m", method, "logrank, fh, modest or maxcombo")->capture_default_str();
    weights.add(*cmd);
    cmd->add_flag("--json", as_json, "Machine-readable output");
  }

  int run(std::ostream& out) const {
    const auto spec = weights.build(method, false);
    const auto sample = load_sample(input);
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "test";
    doc["method"] = describe(spec);
    doc["n"] = sample.size();
    doc["events"] = sample.events();
    std::visit(overloaded{
                   [&](const WeightSpec& w) {
                     const auto r = weighted_logrank(sample, w);
                     doc["z"] = r.z;
                     doc["p_one_sided"] = r.p_one_sided;
                     doc["p_two_sided"] = r.p_two_sided;
                   },
                   [&](const MaxComboSpec& m) {
                     const auto r = maxcombo_test(sample, m);
                     doc["z_max"] = r.z_max;
                     doc["p_one_sided"] = r.p_adjusted;
                     doc["mc_std_error"] = r.mc_std_error;
                     json comps = json::array();
                     for (std::size_t i = 0; i < m.components.size(); ++i) {
                       comps.push_back({{"weight", describe(m.components[i])},
                                        {"z", -r.z_oriented[i]},
                                        {"p_one_sided", r.p_component[i]}});
                     }
                     doc["components"] = comps;
                   },
               },
               spec);
    try {
      const auto gt = gt_test(sample);
      doc["pretest_statistic"] = gt.statistic;
      doc["p_pre"] = gt.p_pre;
    } catch (const Error& e) {
      if (!e.is_degenerate()) throw;
      doc["pretest_statistic"] = nullptr;
      doc["p_pre"] = nullptr;
    }
    print(out, as_json, doc);
    return kExitOk;
  }
};

// ---------------------------------------------------------------- twostep

struct TwoStepCommand {
  std::string input;
  std::string alternative = "maxcombo";
  WeightArgs weights;
  std::string mode = "naive";
  double alpha = 0.025;
  double alpha_pre = 0.05;
  std::size_t permutations = 2500;
  std::uint64_t seed = 1;
  std::string tie_rule = "le";
  int threads = default_threads();
  bool as_json = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("twostep", "Run the naive or permutation two-step test on a dataset");
    cmd->add_option("--input,-i", input, "CSV with columns time,event,group[,entry]; '-' for stdin")->required();
    cmd->add_option("--alternative,-a", alternative, "Second-step test for NPH: maxcombo, fh or modest")
        ->capture_default_str();
    weights.add(*cmd);
    cmd->add_option("--mode", mode, "naive or permutation")->capture_default_str();
    cmd->add_option("--alpha", alpha, "One-sided level")->capture_default_str();
    cmd->add_option("--alpha-pre", alpha_pre, "Two-sided level of the PH pre-test")->capture_default_str();
    cmd->add_option("--permutations", permutations, "Number of permutations")->capture_default_str();
    cmd->add_option("--seed", seed, "Permutation seed")->capture_default_str();
    cmd->add_option("--tie-rule", tie_rule, "le, lt or add-one")->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads")->envname("NPH_THREADS");
    cmd->add_flag("--json", as_json, "Machine-readable output");
  }

  int run(std::ostream& out) const {
    if (mode != "naive" && mode != "permutation") throw UsageError("--mode must be naive or permutation");
    if (alternative == "logrank") throw UsageError("--alternative must differ from the log-rank test");
    TwoStepConfig cfg;
    cfg.alternative = weights.build(alternative, true);
    cfg.alpha = alpha;
    cfg.alpha_pre = alpha_pre;
    cfg.permutations = permutations;
    cfg.seed = seed;
    cfg.tie_rule = parse_tie_rule(tie_rule);
    cfg.threads = threads;
    validate(cfg);
    const auto sample = load_sample(input);
    const auto r = mode == "naive" ? naive_two_step(sample, cfg) : permutation_two_step(sample, cfg);

    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "twostep";
    doc["mode"] = mode;
    doc["alternative"] = describe(cfg.alternative);
    doc["alpha"] = alpha;
    doc["alpha_pre"] = alpha_pre;
    doc["p_pre"] = r.p_pre;
    doc["pretest_degenerate"] = r.pretest_degenerate;
    doc["branch"] = std::string(to_string(r.branch));
    doc["p0"] = r.p0;
    doc["p_final"] = r.p_final;
    doc["reject"] = r.reject;
    if (mode == "permutation") {
      doc["permutations"] = r.permutations;
      doc["exceed_count"] = r.exceed_count;
      doc["failed_permutations"] = r.failed_permutations;
      doc["seed"] = seed;
      doc["tie_rule"] = std::string(to_string(cfg.tie_rule));
    }
    print(out, as_json, doc);
    return kExitOk;
  }
};

// ---------------------------------------------------------------- simulate

struct SimulateCommand {
  TrialArgs trial;
  std::uint64_t seed = 1;
  std::string output = "-";

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("simulate", "Simulate one trial and write it as CSV");
    trial.add_scenario(*cmd);
    trial.add_design(*cmd, true);
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    cmd->add_option("--output,-o", output, "Output CSV ('-' for stdout)")->capture_default_str();
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto scenario = trial.build_scenario();
    const auto design = trial.build_design();
    const auto data = simulate_trial(scenario, design, seed);
    err << "simulated " << describe(scenario) << ": " << data.subjects.size() << " subjects, " << data.events()
        << " events, cutoff " << format_number(data.cutoff) << " months, seed " << seed << '\n';
    if (data.not_enrolled > 0) err << data.not_enrolled << " subjects entered after the cutoff\n";
    if (output == "-") {
      write_dataset_csv(out, data);
    } else {
      std::ofstream file(output);
      if (!file) throw UsageError("cannot write '" + output + "'");
      write_dataset_csv(file, data);
    }
    return kExitOk;
  }
};

// ---------------------------------------------------------------- calibrate

struct CalibrateCommand {
  TrialArgs trial;
  double power = 0.8;
  double alpha = 0.025;
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  int threads = default_threads();
  bool as_json = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("calibrate", "Find the number of events giving a target log-rank power");
    trial.add_scenario(*cmd);
    trial.add_design(*cmd, false);
    cmd->add_option("--power", power, "Target one-sided log-rank power")->capture_default_str();
    cmd->add_option("--alpha", alpha, "One-sided level")->capture_default_str();
    cmd->add_option("--reps", reps, "Replicates per probe")->capture_default_str();
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads")->envname("NPH_THREADS");
    cmd->add_flag("--json", as_json, "Machine-readable output");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto scenario = trial.build_scenario();
    const auto design = trial.build_design();
    err << "calibrating " << describe(scenario) << " with " << reps << " replicates per probe\n";
    const auto r = calibrate_events(scenario, design, power, alpha, reps, seed, threads);
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = "calibrate";
    doc["scenario"] = describe(scenario);
    doc["n"] = design.n_total;
    doc["events"] = r.events;
    doc["power"] = r.power;
    doc["mc_se"] = r.mc_se;
    doc["target_power"] = power;
    doc["alpha"] = alpha;
    doc["reps"] = reps;
    doc["seed"] = seed;
    doc["monotonicity_violations"] = r.monotonicity_violations;
    json probes = json::array();
    for (const auto& p : r.probes) probes.push_back({{"events", p.events}, {"power", p.power}, {"mc_se", p.mc_se}});
    doc["probes"] = probes;
    print(out, as_json, doc);
    return kExitOk;
  }
};

// ---------------------------------------------------------------- study

struct StudyCommand {
  std::string config;
  std::string output = "-";
  bool resume = false;
  std::string conditional_output;
  std::string cell;
  std::string method;
  std::optional<double> alpha_pre;
  int threads = default_threads();
  bool quiet = false;

  void add(CLI::App& app) {
    auto* cmd = app.add_subcommand("study", "Run a simulation study from a JSON config");
    cmd->add_option("--config,-c", config, "Study config (JSON)")->required();
    cmd->add_option("--output,-o", output, "Results CSV ('-' for stdout)")->capture_default_str();
    cmd->add_flag("--resume", resume, "Skip cells already present in --output and append the rest");
    auto* cond = cmd->add_option("--conditional-output", conditional_output,
                                 "Write per-replicate pre-test decisions and second-step p-values instead");
    auto* c = cmd->add_option("--cell", cell, "Cell id for --conditional-output");
    auto* m = cmd->add_option("--method", method, "Two-step method id for --conditional-output");
    auto* a = cmd->add_option("--alpha-pre", alpha_pre, "Pre-test level for --conditional-output");
    c->needs(cond);
    m->needs(cond);
    a->needs(cond);
    cmd->add_option("--threads", threads, "Worker threads")->envname("NPH_THREADS");
    cmd->add_flag("--quiet,-q", quiet, "No progress on stderr");
  }

  int run(std::ostream& out, std::ostream& err) const {
    const auto cfg = parse_study_config(load_json(config));
    if (!conditional_output.empty()) return run_conditional(cfg, err);
    if (resume && output == "-") throw UsageError("--resume needs --output FILE");

    std::set<std::string> done;
    bool append = false;
    if (resume) {
      std::ifstream existing(output);
      if (existing) {
        done = read_study_scenarios(existing);
        append = true;
      }
    }
    std::ofstream file;
    std::ostream* sink = &out;
    if (output != "-") {
      file.open(output, append ? std::ios::app : std::ios::trunc);
      if (!file) throw UsageError("cannot write '" + output + "'");
      sink = &file;
    }
    if (!append) write_study_header(*sink);
    sink->flush();

    StudyOptions opts;
    opts.threads = threads;
    opts.skip_cell = [&](const StudyCell& c) {
      const bool skip = done.count(c.id) > 0;
      if (skip && !quiet) err << "skipping finished cell " << c.id << '\n';
      return skip;
    };
    std::size_t finished = 0;
    opts.on_cell = [&](std::span<const StudyRow> rows) {
      write_study_rows(*sink, rows);
      sink->flush();
      ++finished;
    };
    if (!quiet) opts.progress = [&](std::string_view msg) { err << msg << " (" << cfg.n_reps << " replicates)\n"; };
    run_study(cfg, opts);
    if (!quiet) err << "finished " << finished << " cells\n";
    return kExitOk;
  }

  int run_conditional(const StudyConfig& cfg, std::ostream& err) const {
    if (cell.empty() || method.empty()) throw UsageError("--conditional-output needs --cell and --method");
    const auto m = std::find_if(cfg.methods.begin(), cfg.methods.end(), [&](auto& x) { return x.id == method; });
    double level = 0.05;
    if (m != cfg.methods.end()) {
      std::visit(overloaded{[](const ConventionalMethod&) {}, [&](const auto& ts) { level = ts.config.alpha_pre; }},
                 m->kind);
    }
    if (alpha_pre) level = *alpha_pre;
    const auto rows = export_conditional_pvalues(cfg, cell, method, level, cfg.n_reps, threads);
    std::ofstream file(conditional_output);
    if (!file) throw UsageError("cannot write '" + conditional_output + "'");
    write_conditional_csv(file, rows);
    if (!quiet) err << "wrote " << rows.size() << " replicates to " << conditional_output << '\n';
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-step and permutation tests for survival data under non-proportional hazards", "nph"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "nph 0.1.0");

  TestCommand test;
  TwoStepCommand twostep;
  SimulateCommand simulate;
  CalibrateCommand calibrate;
  StudyCommand study;
  test.add(app);
  twostep.add(app);
  simulate.add(app);
  calibrate.add(app);
  study.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (app.got_subcommand("test")) return test.run(out);
    if (app.got_subcommand("twostep")) return twostep.run(out);
    if (app.got_subcommand("simulate")) return simulate.run(out, err);
    if (app.got_subcommand("calibrate")) return calibrate.run(out, err);
    if (app.got_subcommand("study")) return study.run(out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_degenerate() ? kExitDegenerate : kExitUsage;
  }
  return kExitUsage;
}

}  // namespace nph::cli
