#include "cli.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>

#include "CLI11.hpp"
#include "apil/harness/config.hpp"
#include "apil/harness/csv.hpp"
#include "apil/harness/gradcheck.hpp"
#include "apil/harness/reports.hpp"
#include "apil/harness/sweep.hpp"
#include "apil/training/metrics_csv.hpp"

namespace apil::cli {
namespace {

namespace fs = std::filesystem;
using training::RunConfig;

/// Run-configuration flags shared by train, eval, sweep and uncertainty-report.
/// Values given on the command line override the --config file.
struct RunFlags {
  std::string config;
  std::string env, map, teacher, method, rule;
  std::optional<int> horizon, episodes, n1, n2, uncertainty_every, teacher_rollouts;
  std::optional<std::uint64_t> seed;
  std::optional<double> persona_init, lr, sigma, epsilon, tau, dropout, errpred_threshold, teacher_final_distance;
  std::vector<int> probe_n1;
  bool greedy = false;
  bool train_dropout = false;

  void add_to(CLI::App& app, bool with_method, bool with_teacher) {
    app.add_option("--config", config, "JSON config file; flags override its values")
        ->check(CLI::ExistingFile);
    app.add_option("--env", env, "grid|maze");
    app.add_option("--map", map, "custom map file (overrides --env)");
    app.add_option("--horizon", horizon, "episode length for custom maps");
    if (with_teacher) app.add_option("--teacher", teacher, "detm|rand|tworand|twodifdetm");
    if (with_method) {
      app.add_option("--method", method,
                     "apil|phil-ignore|bc|dagger|intrun|extrun|behvun|errpred|never");
    }
    app.add_option("--episodes", episodes, "training episodes");
    app.add_option("--seed", seed, "run seed");
    app.add_option("--lr", lr, "Adam learning rate");
    app.add_option("--sigma", sigma, "progress ratio");
    app.add_option("--epsilon", epsilon, "final-gap tolerance");
    app.add_option("--rule", rule, "gap_reduction|listing");
    app.add_option("--tau", tau, "uncertainty threshold for intrun/extrun/behvun");
    app.add_option("--errpred-threshold", errpred_threshold, "errpred query threshold");
    app.add_option("--teacher-final-distance", teacher_final_distance,
                   "fixed d*_T instead of the rollout estimate");
    app.add_option("--teacher-rollouts", teacher_rollouts, "rollouts used to estimate d*_T");
    app.add_option("--n1", n1, "policy samples per dropout draw");
    app.add_option("--n2", n2, "dropout draws");
    app.add_option("--dropout", dropout, "MC-dropout rate");
    app.add_option("--persona-init", persona_init, "persona rows start uniform in [-x, x]");
    app.add_flag("--train-dropout", train_dropout, "apply dropout masks during updates");
    app.add_option("--uncertainty-every", uncertainty_every, "probe logging cadence");
    app.add_option("--probe-n1", probe_n1, "extra n1 values evaluated on the probe")
        ->delimiter(',');
    app.add_flag("--greedy", greedy, "argmax execution actions in evaluation");
  }

  RunConfig build(const CLI::App& app) const {
    RunConfig cfg;
    if (!config.empty()) cfg = harness::load_run_config(config);
    auto given = [&](const char* name) { return app.count(name) > 0; };
    if (given("--env")) cfg.env = env::parse_env_kind(env);
    if (given("--map")) cfg.map_path = map;
    if (horizon) cfg.horizon = horizon;
    if (!teacher.empty()) cfg.teacher = teachers::parse_teacher_model(teacher);
    if (!method.empty()) cfg.method = training::parse_method(method);
    if (episodes) cfg.episodes = *episodes;
    if (seed) cfg.seed = *seed;
    if (lr) cfg.lr = *lr;
    if (sigma) cfg.apil.sigma = *sigma;
    if (epsilon) cfg.apil.epsilon = *epsilon;
    if (!rule.empty()) {
      if (rule == "gap_reduction") cfg.apil.rule = query::ProgressRule::gap_reduction;
      else if (rule == "listing") cfg.apil.rule = query::ProgressRule::listing;
      else throw std::invalid_argument("invalid config field 'rule': expected gap_reduction or listing");
    }
    if (tau) cfg.tau = *tau;
    if (errpred_threshold) cfg.errpred_threshold = *errpred_threshold;
    if (teacher_final_distance) cfg.teacher_final_distance = teacher_final_distance;
    if (teacher_rollouts) cfg.teacher_rollouts = *teacher_rollouts;
    if (n1) cfg.uncertainty.n1 = *n1;
    if (n2) cfg.uncertainty.n2 = *n2;
    if (dropout) cfg.dropout_rate = *dropout;
    if (train_dropout) cfg.train_with_dropout = true;
    if (persona_init) cfg.persona_init_scale = *persona_init;
    if (uncertainty_every) cfg.uncertainty_every = *uncertainty_every;
    if (given("--probe-n1")) cfg.probe_n1 = probe_n1;
    if (greedy) cfg.greedy = true;
    training::validate(cfg);
    return cfg;
  }
};

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) {
    fs::create_directories(parent);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<fs::path> files;
  for (const auto& p : patterns) {
    const auto matched = harness::expand_glob(p);
    if (matched.empty()) throw std::runtime_error("no files match '" + p + "'");
    files.insert(files.end(), matched.begin(), matched.end());
  }
  return files;
}

// ---- subcommands ----------------------------------------------------------

struct TrainCmd {
  RunFlags flags;
  std::string out, probe_out, load, save;

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("train", "train one run and write its metrics CSV");
    flags.add_to(*app, true, true);
    app->add_option("--out", out, "metrics CSV path")->required();
    app->add_option("--probe-out", probe_out, "probe CSV path (default: <out>.probe.csv)");
    app->add_option("--load", load, "start from this checkpoint");
    app->add_option("--save", save, "write a checkpoint after training");
  }

  int run(const CLI::App& app, std::ostream& os) const {
    const auto cfg = flags.build(app);
    training::Learner learner(cfg);
    if (!load.empty()) learner.load(load);
    const auto result = training::train(learner);
    {
      auto f = open_out(out);
      training::write_metrics_csv(f, cfg, result.episodes);
    }
    if (!cfg.probe_n1.empty()) {
      auto path = probe_out.empty() ? fs::path(out).replace_extension(".probe.csv").string() : probe_out;
      auto f = open_out(path);
      training::write_probe_csv(f, cfg, result.probe);
    }
    if (!save.empty()) learner.save(save);
    os << fmt::format("trained {} episodes: final-100 query rate {:.4f}, success {:.4f}\n",
                      cfg.episodes, training::tail_query_rate(result.episodes, 100),
                      training::tail_success_rate(result.episodes, 100));
    return kOk;
  }
};

struct EvalCmd {
  RunFlags flags;
  std::string out, load;
  int eval_episodes = 100;

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("eval", "evaluate a checkpoint without updates");
    flags.add_to(*app, true, true);
    app->add_option("--load", load, "checkpoint to evaluate")->required();
    app->add_option("--eval-episodes", eval_episodes, "evaluation episodes")
        ->check(CLI::PositiveNumber);
    app->add_option("--out", out, "summary CSV path");
  }

  int run(const CLI::App& app, std::ostream& os) const {
    const auto cfg = flags.build(app);
    training::Learner learner(cfg);
    learner.load(load);
    const auto s = training::evaluate(learner, eval_episodes, cfg.seed);
    const auto line = fmt::format("{},{},{},{},{},{},{}\n", training::to_string(cfg.method),
                                  teachers::to_string(cfg.teacher), training::env_label(cfg),
                                  s.episodes, s.query_rate, s.success_rate, s.mean_final_dist);
    const std::string header = "method,teacher,env,episodes,query_rate,success_rate,mean_final_dist\n";
    if (!out.empty()) {
      auto f = open_out(out);
      f << header << line;
    }
    os << header << line;
    return kOk;
  }
};

struct SweepCmd {
  RunFlags flags;
  std::vector<std::string> methods, teacher_names;
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::string out;
  int threads = 0;

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("sweep", "run methods x teachers x seeds");
    flags.add_to(*app, false, false);
    app->add_option("--methods", methods, "comma-separated methods")->delimiter(',')->required();
    app->add_option("--teachers", teacher_names, "comma-separated teacher models")
        ->delimiter(',');
    app->add_option("--seeds", seeds, "comma-separated seeds")->delimiter(',');
    app->add_option("--out", out, "output directory")->required();
    app->add_option("--threads", threads, "worker threads (default: processors, capped by APIL_LAB_THREADS)");
  }

  int run(const CLI::App& app, std::ostream& os, std::ostream& es) const {
    harness::SweepSpec spec;
    spec.base = flags.build(app);
    for (const auto& m : methods) spec.methods.push_back(training::parse_method(m));
    if (teacher_names.empty()) {
      spec.teachers = {teachers::TeacherModel::detm, teachers::TeacherModel::rand,
                       teachers::TeacherModel::two_rand, teachers::TeacherModel::two_dif_detm};
    } else {
      for (const auto& t : teacher_names) spec.teachers.push_back(teachers::parse_teacher_model(t));
    }
    spec.seeds = seeds;
    spec.out_dir = out;
    spec.threads = threads;
    harness::validate(spec);
    const auto result = harness::run_sweep(spec);
    int failed = 0;
    for (const auto& c : result.cells) {
      if (!c.ok) {
        ++failed;
        es << fmt::format("cell {} failed: {}\n", c.metrics_file, c.error);
      }
    }
    os << fmt::format("{} cells, {} failed, manifest at {}\n", result.cells.size(), failed,
                      (fs::path(out) / "manifest.json").string());
    return failed == 0 ? kOk : kRunFailure;
  }
};

struct UncertaintyCmd {
  RunFlags flags;
  std::string out, load;
  int eval_episodes = 100;

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand(
        "uncertainty-report", "per-state uncertainty over the states visited in evaluation");
    flags.add_to(*app, true, true);
    app->add_option("--load", load, "checkpoint to analyse")->required();
    app->add_option("--eval-episodes", eval_episodes, "evaluation episodes")
        ->check(CLI::PositiveNumber);
    app->add_option("--out", out, "CSV path")->required();
  }

  int run(const CLI::App& app, std::ostream& os) const {
    const auto cfg = flags.build(app);
    training::Learner learner(cfg);
    learner.load(load);
    const auto v = harness::visited_state_uncertainty(learner, eval_episodes, cfg.seed);
    auto f = open_out(out);
    harness::write_uncertainty_csv(f, v, cfg.teacher);
    os << fmt::format("{} states, mean intrinsic {:.4f}, extrinsic {:.4f}, model {:.4f}\n",
                      v.states.size(), v.aggregate.intrinsic, v.aggregate.extrinsic,
                      v.aggregate.model);
    return kOk;
  }
};

struct ReportCmd {
  std::string kind, out;
  std::vector<std::string> inputs;

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("report", "aggregate CSVs into table/figure series");
    app->add_option("--kind", kind, "table1|fig4|fig5")
        ->required()
        ->check(CLI::IsMember({"table1", "fig4", "fig5"}));
    app->add_option("--in", inputs, "input CSV glob (repeatable)")->required();
    app->add_option("--out", out, "output CSV path")->required();
  }

  int run(std::ostream& os) const {
    const auto files = expand_inputs(inputs);
    auto f = open_out(out);
    if (kind == "table1") {
      const auto rows = harness::make_table1(files);
      harness::write_table1(f, rows);
      harness::write_table1(os, rows);
    } else if (kind == "fig4") {
      harness::write_fig4(f, harness::make_fig4(files));
    } else {
      const auto points = harness::make_fig5(files);
      harness::write_fig5(f, points);
      for (const auto& t : harness::fig5_trends(points)) {
        os << fmt::format("n1={}: first-third model {:.4f}, final-third {:.4f} ({})\n", t.n1,
                          t.first_third, t.final_third,
                          t.final_third > t.first_third ? "rising" : "falling");
      }
    }
    return kOk;
  }
};

struct GradcheckCmd {
  harness::GradCheckConfig cfg;

  void add(CLI::App& parent) {
    auto* app = parent.add_subcommand("gradcheck", "finite-difference checks of every gradient");
    app->add_option("--cases", cfg.cases, "randomised cases per suite")->check(CLI::PositiveNumber);
    app->add_option("--seed", cfg.seed, "case generator seed");
  }

  int run(std::ostream& os) const {
    bool ok = true;
    for (const auto& r : harness::run_gradchecks(cfg)) {
      os << fmt::format("{:<12} {:>4} cases  max rel error {:.3e}  {}\n", r.suite, r.cases,
                        r.max_rel_error, r.passed ? "PASS" : "FAIL");
      ok = ok && r.passed;
    }
    return ok ? kOk : kCheckFailure;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Teacher persona-aware active imitation learning lab", "apil_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", APIL_LAB_VERSION);

  TrainCmd train;
  EvalCmd eval;
  SweepCmd sweep;
  UncertaintyCmd uncertainty;
  ReportCmd report;
  GradcheckCmd gradcheck;
  train.add(app);
  eval.add(app);
  sweep.add(app);
  uncertainty.add(app);
  report.add(app);
  gradcheck.add(app);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << APIL_LAB_VERSION << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kUsage;
  }

  const auto* sub = app.get_subcommands().front();
  const auto& name = sub->get_name();
  try {
    if (name == "train") return train.run(*sub, out);
    if (name == "eval") return eval.run(*sub, out);
    if (name == "sweep") return sweep.run(*sub, out, err);
    if (name == "uncertainty-report") return uncertainty.run(*sub, out);
    if (name == "report") return report.run(out);
    if (name == "gradcheck") return gradcheck.run(out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRunFailure;
  }
  return kUsage;
}

}  // namespace apil::cli
