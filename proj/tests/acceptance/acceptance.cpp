// Runs the reproduction checks and prints one PASS/FAIL line per criterion.
// Usage: apil_acceptance [--out DIR]   (default: a fresh temp directory)

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "apil/harness/csv.hpp"
#include "apil/harness/gradcheck.hpp"
#include "apil/harness/reports.hpp"
#include "apil/harness/sweep.hpp"
#include "apil/nn/random.hpp"
#include "apil/query/labels.hpp"
#include "apil/query/query_net.hpp"
#include "apil/training/run.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace apil;
using training::Method;
using training::RunConfig;
using TM = teachers::TeacherModel;

namespace {

constexpr std::array kTeachers{TM::detm, TM::rand, TM::two_rand, TM::two_dif_detm};
constexpr std::array<std::uint64_t, 3> kSeeds{0, 1, 2};

using Clock = std::chrono::steady_clock;
double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

struct Timed {
  training::RunResult result;
  double seconds = 0;
};

Timed run(const RunConfig& cfg) {
  const auto t0 = Clock::now();
  training::Learner learner(cfg);
  Timed t{training::train(learner), 0};
  t.seconds = seconds_since(t0);
  return t;
}

RunConfig base(Method m, TM t, std::uint64_t seed) {
  RunConfig cfg;
  cfg.method = m;
  cfg.teacher = t;
  cfg.seed = seed;
  return cfg;
}

std::string fx(double v) { return fmt::format("{:.3f}", v); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// ---------------------------------------------------------------------------

std::map<TM, double> g_apil_rate;

Outcome criterion1() {
  Outcome o;
  for (TM t : kTeachers) {
    const auto r = run(base(Method::apil, t, 0));
    const double q = training::tail_query_rate(r.result.episodes, 100);
    const double s = training::tail_success_rate(r.result.episodes, 100);
    g_apil_rate[t] = q;
    o.require(q < 0.05 && s == 1.0 && r.seconds < 60,
              fmt::format("{} q={} succ={} {:.1f}s", teachers::to_string(t), fx(q), fx(s), r.seconds));
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const auto grid = training::default_tau_grid();
  const auto tuned = training::tune_threshold(base(Method::intrun, TM::detm, 0), g_apil_rate.at(TM::detm), grid);
  o.require(true, fmt::format("tau={:.2f} (detm q={})", tuned.tau, fx(tuned.query_rate)));
  for (TM t : {TM::rand, TM::two_rand}) {
    auto cfg = base(Method::intrun, t, 0);
    cfg.tau = tuned.tau;
    const double q = training::tail_query_rate(run(cfg).result.episodes, 100);
    const double gap = q - g_apil_rate.at(t);
    o.require(gap >= 0.25, fmt::format("{} intrun={} apil={} gap={}", teachers::to_string(t), fx(q),
                                       fx(g_apil_rate.at(t)), fx(gap)));
  }
  return o;
}

std::vector<uncertainty::UncertaintyReport> g_reports;

Outcome criterion3() {
  Outcome o;
  std::map<TM, std::pair<double, double>> mean;
  for (TM t : kTeachers) {
    double intr = 0, extr = 0;
    for (auto seed : kSeeds) {
      training::Learner learner(base(Method::dagger, t, seed));
      training::train(learner);
      const auto v = harness::visited_state_uncertainty(learner, 100, seed + 1000);
      for (const auto& s : v.states) g_reports.push_back(s.report);
      g_reports.push_back(v.aggregate);
      intr += v.aggregate.intrinsic / kSeeds.size();
      extr += v.aggregate.extrinsic / kSeeds.size();
    }
    mean[t] = {intr, extr};
  }
  const std::map<TM, std::pair<double, double>> reference{
      {TM::detm, {0.04, 0.00}}, {TM::rand, {0.72, 0.00}}, {TM::two_rand, {0.72, 0.00}},
      {TM::two_dif_detm, {0.05, 0.56}}};
  auto show = [&](TM t, bool ok) {
    o.require(ok, fmt::format("{} intr={} extr={} (ref {:.2f}/{:.2f})", teachers::to_string(t),
                              fx(mean[t].first), fx(mean[t].second), reference.at(t).first, reference.at(t).second));
  };
  show(TM::detm, mean[TM::detm].first <= 0.15 && mean[TM::detm].second <= 0.05);
  for (TM t : {TM::rand, TM::two_rand}) {
    show(t, mean[t].first >= 0.40 && mean[t].first <= 0.75 && mean[t].second <= 0.05);
  }
  show(TM::two_dif_detm, mean[TM::two_dif_detm].second >= 0.30 && mean[TM::two_dif_detm].first <= 0.15);
  return o;
}

harness::SweepResult g_sweep;
fs::path g_sweep_dir;

void run_full_sweep(const fs::path& out) {
  harness::SweepSpec spec;
  spec.base.probe_n1 = {5, 50};
  spec.methods.assign(training::all_methods().begin(), training::all_methods().end());
  spec.teachers.assign(kTeachers.begin(), kTeachers.end());
  spec.seeds.assign(kSeeds.begin(), kSeeds.end());
  spec.out_dir = g_sweep_dir = out / "sweep";
  g_sweep = harness::run_sweep(spec);
}

Outcome criterion4() {
  Outcome o;
  const auto t0 = Clock::now();
  std::vector<fs::path> probes;
  for (const auto& cell : g_sweep.cells) {
    if (cell.config.method == Method::dagger && cell.config.teacher == TM::two_dif_detm && cell.ok) {
      probes.push_back(g_sweep_dir / cell.probe_file);
    }
  }
  o.require(probes.size() == kSeeds.size(), fmt::format("{} probe files", probes.size()));
  const auto points = harness::make_fig5(probes);
  for (const auto& tr : harness::fig5_trends(points)) {
    const bool want_rise = tr.n1 == 5;
    const bool rises = tr.final_third > tr.first_third;
    o.require(rises == want_rise, fmt::format("N1={} first={:.4f} final={:.4f} ({})", tr.n1, tr.first_third,
                                              tr.final_third, rises ? "rises" : "falls"));
  }
  o.require(seconds_since(t0) < 300, "within budget");
  return o;
}

Outcome criterion5() {
  Outcome o;
  std::size_t n = 0;
  double worst_b = 0, worst_t = 0;
  auto visit = [&](const uncertainty::UncertaintyReport& r) {
    ++n;
    worst_b = std::max(worst_b, std::abs(r.behavioral - (r.intrinsic + r.extrinsic)));
    worst_t = std::max(worst_t, std::abs(r.total - (r.model + r.behavioral)));
  };
  for (const auto& cell : g_sweep.cells) {
    for (const auto& r : cell.reports) visit(r);
  }
  for (const auto& r : g_reports) visit(r);
  o.require(g_sweep.all_ok(), fmt::format("{} sweep cells ok", g_sweep.cells.size()));
  o.require(worst_b <= 1e-12, fmt::format("{} reports, max |B-(I+E)|={:.1e}", n, worst_b));
  o.require(worst_t <= 1e-12, fmt::format("max |T-(M+B)|={:.1e}", worst_t));
  return o;
}

Outcome criterion6() {
  Outcome o;
  harness::GradCheckConfig cfg;
  cfg.cases = 100;
  for (const auto& r : harness::run_gradchecks(cfg)) {
    o.require(r.passed && r.max_rel_error < 1e-4,
              fmt::format("{} x{} max={:.1e}", r.suite, r.cases, r.max_rel_error));
  }
  return o;
}

query::Trajectory make_trajectory(const std::vector<std::optional<double>>& d, double d_T) {
  query::Trajectory traj;
  for (const auto& x : d) {
    query::TrajectoryStep s;
    s.ask = x ? query::AskAction::query : query::AskAction::continue_;
    s.dist = x;
    traj.steps.push_back(s);
  }
  traj.final_dist = d_T;
  return traj;
}

Outcome criterion7() {
  Outcome o;
  const query::ApilConfig cfg;
  auto agrees = [&](const std::vector<std::optional<double>>& d, double d_T) {
    const auto labels = query::apil_labels(make_trajectory(d, d_T), cfg);
    for (std::size_t t = 0; t < d.size(); ++t) {
      const bool p = oracle::progress_at(t, d, d_T, cfg.sigma, cfg.epsilon, cfg.teacher_final_distance);
      if ((labels[t] == query::AskLabel::continue_) != p) return false;
    }
    return true;
  };

  std::size_t exhaustive = 0, bad = 0;
  for (int T = 1; T <= 4; ++T) {
    int combos = 1;
    for (int i = 0; i <= T; ++i) combos *= 6;
    for (int code = 0; code < combos; ++code) {
      std::vector<double> all;
      for (int i = 0, c = code; i <= T; ++i, c /= 6) all.push_back(c % 6);
      for (int mask = 0; mask < (1 << T); ++mask) {
        std::vector<std::optional<double>> d(T);
        for (int i = 0; i < T; ++i) {
          if (mask >> i & 1) d[i] = all[i];
        }
        ++exhaustive;
        if (!agrees(d, all[T])) ++bad;
      }
    }
  }
  o.require(bad == 0, fmt::format("exhaustive T<=4: {} trajectories, {} mismatches", exhaustive, bad));

  auto rng = nn::make_stream(77, 0);
  std::uniform_int_distribution<int> len(1, 8), dist(0, 12);
  bad = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<std::optional<double>> d(len(rng));
    for (auto& x : d) {
      if (rng() % 2) x = dist(rng);
    }
    if (!agrees(d, dist(rng))) ++bad;
  }
  o.require(bad == 0, fmt::format("random T<=8: 1000 trajectories, {} mismatches", bad));
  return o;
}

Outcome criterion8() {
  Outcome o;
  auto rng = nn::make_stream(88, 0);
  query::QueryNetConfig cfg;
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    query::QueryNet net(cfg, rng);
    query::QueryInput in;
    for (std::size_t f = 0; f < cfg.feature_width; ++f) in.features.push_back(nn::uniform01(rng));
    const double p = nn::uniform01(rng);
    in.mean_policy = {p, 1 - p};
    in.remaining = static_cast<int>(rng() % (cfg.horizon + 1));
    const auto a = rng() % 2 ? query::AskAction::query : query::AskAction::continue_;
    worst = std::max(worst, query::ignore_reinforce_gradient_gap(net, in, a));
  }
  o.require(worst < 1e-10, fmt::format("1000 cases, max diff={:.1e}", worst));
  return o;
}

Outcome criterion9() {
  Outcome o;
  {
    training::Learner learner(base(Method::dagger, TM::two_dif_detm, 0));
    training::train(learner);
    const auto& world = learner.world();
    const auto& agent = learner.agent();
    int right = 0, down = 0;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        const auto f = world.encode(world.state_at({r, c}));
        auto argmax = [&](std::size_t k) {
          const auto p = agent.persona_policy(f, k);
          return agent.config().actions[p[1] > p[0] ? 1 : 0];
        };
        right += argmax(0) == env::ExeAction::right;
        down += argmax(1) == env::ExeAction::down;
      }
    }
    o.require(right == 16 && down == 16, fmt::format("twodifdetm persona0 right {}/16, persona1 down {}/16", right, down));
  }
  {
    training::Learner learner(base(Method::dagger, TM::two_rand, 0));
    training::train(learner);
    const auto& world = learner.world();
    double worst = 0;
    for (auto cell : world.open_cells()) {
      const auto f = world.encode(world.state_at(cell));
      const auto a = learner.agent().persona_policy(f, 0);
      const auto b = learner.agent().persona_policy(f, 1);
      worst = std::max(worst, oracle::total_variation(a, b));
    }
    o.require(worst < 0.05, fmt::format("tworand max TV={:.4f} over {} states", worst, world.open_cells().size()));
  }
  return o;
}

Outcome criterion10() {
  Outcome o;
  auto maze = [](Method m) {
    auto cfg = base(m, TM::detm, 0);
    cfg.env = env::EnvKind::maze;
    return run(cfg);
  };
  const auto d = maze(Method::dagger);
  const auto a = maze(Method::apil);
  const double ds = training::tail_success_rate(d.result.episodes, 100);
  const double as = training::tail_success_rate(a.result.episodes, 100);
  const double aq = training::tail_query_rate(a.result.episodes, 100);
  o.require(ds >= 0.9 && d.seconds < 180, fmt::format("dagger succ={} {:.1f}s", fx(ds), d.seconds));
  o.require(ds - as <= 0.1 && aq <= 0.5 && a.seconds < 180,
            fmt::format("apil succ={} q={} {:.1f}s", fx(as), fx(aq), a.seconds));
  return o;
}

Outcome criterion11(const fs::path& out) {
  Outcome o;
  harness::SweepSpec spec;
  spec.base.probe_n1 = {5, 50};
  spec.methods = {Method::apil, Method::intrun, Method::dagger, Method::errpred};
  spec.teachers = {TM::rand, TM::two_dif_detm};
  spec.seeds = {1};
  spec.out_dir = out / "rerun";
  const auto again = harness::run_sweep(spec);
  int compared = 0, differ = 0;
  for (const auto& cell : again.cells) {
    for (const auto& file : {cell.metrics_file, cell.probe_file}) {
      ++compared;
      if (!fs::exists(g_sweep_dir / file) || slurp(g_sweep_dir / file) != slurp(spec.out_dir / file)) ++differ;
    }
  }
  o.require(again.all_ok() && differ == 0, fmt::format("{} CSVs re-run, {} differ", compared, differ));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = fs::temp_directory_path() / "apil_acceptance";
  if (argc == 3 && std::string(argv[1]) == "--out") {
    out = argv[2];
  } else if (argc != 1) {
    std::cerr << "usage: apil_acceptance [--out DIR]\n";
    return 1;
  }
  fs::remove_all(out);
  fs::create_directories(out);

  run_full_sweep(out);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, criterion1}, {2, criterion2},  {3, criterion3}, {4, criterion4},
      {5, criterion5}, {6, criterion6},  {7, criterion7}, {8, criterion8},
      {9, criterion9}, {10, criterion10}, {11, [&] { return criterion11(out); }},
  };
  int failed = 0;
  for (const auto& [id, check] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << fmt::format("criterion {:>2}: {} ({:.1f}s) {}", id, o.pass ? "PASS" : "FAIL", seconds_since(t0),
                             o.detail)
              << std::endl;
  }
  std::cout << fmt::format("{} of {} criteria passed; outputs in {}", criteria.size() - failed, criteria.size(),
                           out.string())
            << std::endl;
  return failed == 0 ? 0 : 3;
}
