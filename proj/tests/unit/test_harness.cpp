#include <filesystem>
#include <fstream>
#include <sstream>

#include "apil/harness/config.hpp"
#include "apil/harness/csv.hpp"
#include "apil/harness/reports.hpp"
#include "apil/harness/sweep.hpp"
#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace apil;
using namespace apil::harness;

namespace {
struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("apil_test_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

training::RunConfig tiny() {
  training::RunConfig cfg;
  cfg.episodes = 12;
  cfg.uncertainty.n1 = 4;
  cfg.uncertainty.n2 = 4;
  cfg.uncertainty_every = 5;
  return cfg;
}
}  // namespace

TEST_CASE("csv parsing") {
  const auto t = parse_csv("a,b,c\n1,,3\n4,5,6\n");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1].empty());
  CHECK(t.column("c") == 2);
  CHECK_FALSE(t.has_column("d"));
  CHECK_THROWS_AS(t.column("d"), std::runtime_error);
  CHECK_THROWS(parse_csv("a,b\n1,2,3\n"));
  CHECK(parse_real("0.1") == 0.1);
  CHECK_THROWS(parse_real("x"));
}

TEST_CASE("run config json") {
  training::RunConfig cfg = tiny();
  cfg.method = training::Method::intrun;
  cfg.tau = 0.35;
  cfg.probe_n1 = {5, 50};
  cfg.apil.rule = query::ProgressRule::listing;
  cfg.teacher_final_distance = 0.5;
  training::RunConfig back;
  apply_json(back, to_json(cfg));
  CHECK(to_json(back) == to_json(cfg));
  CHECK(back.probe_n1 == cfg.probe_n1);
  CHECK(back.tau == 0.35);

  SUBCASE("unknown key") {
    try {
      apply_json(back, R"({"sigmaa": 2})");
      FAIL("expected throw");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("sigmaa") != std::string::npos);
    }
  }
  SUBCASE("wrong type") { CHECK_THROWS_AS(apply_json(back, R"({"episodes": "many"})"), std::invalid_argument); }
}

TEST_CASE("sweep validation") {
  SweepSpec spec;
  spec.base = tiny();
  spec.teachers = {teachers::TeacherModel::detm};
  spec.seeds = {0};
  spec.out_dir = "unused";
  try {
    validate(spec);
    FAIL("expected throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()) == "invalid sweep: method list is empty");
  }
  spec.methods = {training::Method::apil};
  spec.seeds.clear();
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
}

TEST_CASE("sweep output is deterministic and listed in the manifest") {
  TempDir a("sweep_a"), b("sweep_b");
  SweepSpec spec;
  spec.base = tiny();
  spec.base.probe_n1 = {3};
  spec.methods = {training::Method::apil, training::Method::dagger};
  spec.teachers = {teachers::TeacherModel::detm, teachers::TeacherModel::two_dif_detm};
  spec.seeds = {0, 1};
  spec.threads = 2;
  spec.out_dir = a.path;
  const auto ra = run_sweep(spec);
  spec.threads = 1;
  spec.out_dir = b.path;
  const auto rb = run_sweep(spec);
  REQUIRE(ra.all_ok());
  REQUIRE(rb.all_ok());
  REQUIRE(ra.cells.size() == 8);
  for (const auto& cell : ra.cells) {
    CHECK(slurp(a.path / cell.metrics_file) == slurp(b.path / cell.metrics_file));
    CHECK(slurp(a.path / cell.probe_file) == slurp(b.path / cell.probe_file));
    CHECK_FALSE(cell.reports.empty());
  }
  const auto manifest = nlohmann::json::parse(slurp(a.path / "manifest.json"));
  REQUIRE(manifest["cells"].size() == 8);
  for (const auto& c : manifest["cells"]) {
    CHECK(c["status"] == "ok");
    CHECK(fs::exists(a.path / c["metrics_file"].get<std::string>()));
  }
  CHECK(manifest.contains("git_describe"));

  SUBCASE("reports over the sweep") {
    const auto files = expand_glob((a.path / "*_s?.csv").string());
    CHECK(files.size() == 8);
    const auto fig4 = make_fig4(files);
    CHECK_FALSE(fig4.empty());
    for (const auto& p : fig4) CHECK(p.runs == 2);
    CHECK_THROWS_WITH_AS(make_table1(files), doctest::Contains("missing teachers"), std::runtime_error);
    const auto probes = expand_glob((a.path / "*.probe.csv").string());
    const auto fig5 = make_fig5(probes);
    REQUIRE_FALSE(fig5.empty());
    CHECK(fig5.front().n1 == 3);
  }
}

TEST_CASE("fig5 trends split each series into thirds") {
  std::vector<Fig5Point> pts;
  for (int i = 0; i < 6; ++i) pts.push_back({5, i * 10, static_cast<double>(i), 1});
  const auto trends = fig5_trends(pts);
  REQUIRE(trends.size() == 1);
  CHECK(trends[0].first_third == doctest::Approx(0.5));
  CHECK(trends[0].final_third == doctest::Approx(4.5));
}

TEST_CASE("uncertainty report csv ends with the mean row") {
  auto cfg = tiny();
  cfg.method = training::Method::dagger;
  training::Learner learner(cfg);
  training::train(learner);
  const auto v = visited_state_uncertainty(learner, 5, 1);
  int visits = 0;
  for (const auto& s : v.states) visits += s.visits;
  CHECK(visits == 5 * 8);
  std::ostringstream out;
  write_uncertainty_csv(out, v, cfg.teacher);
  const auto t = parse_csv(out.str());
  CHECK(t.rows.back()[t.column("state_id")] == "mean");
  CHECK(t.rows.size() == v.states.size() + 1);
}

TEST_CASE("cli exit codes") {
  std::string out, err;
  CHECK(run_cli({"train", "--no-such-flag"}, &out, &err) == cli::kUsage);
  CHECK(run_cli({}, &out, &err) == cli::kUsage);

  TempDir dir("cli");
  const auto bad = dir.path / "bad.json";
  std::ofstream(bad) << R"({"episodes": 10, "sigma": 0.5})";
  CHECK(run_cli({"train", "--config", bad.string(), "--out", (dir.path / "x.csv").string()}, &out, &err) ==
        cli::kUsage);
  CHECK(err.find("sigma") != std::string::npos);

  const auto csv = dir.path / "run.csv";
  REQUIRE(run_cli({"train", "--episodes", "7", "--method", "dagger", "--n1", "3", "--n2", "3", "--out",
                   csv.string(), "--save", (dir.path / "run.ckpt").string()},
                  &out, &err) == cli::kOk);
  CHECK(read_csv(csv).rows.size() == 7);
  CHECK(run_cli({"eval", "--method", "dagger", "--load", (dir.path / "run.ckpt").string(), "--eval-episodes",
                 "3"},
                &out, &err) == cli::kOk);
  CHECK(run_cli({"report", "--kind", "table1", "--in", csv.string(), "--out", (dir.path / "t1.csv").string()},
                &out, &err) == cli::kRunFailure);
  CHECK(err.find("missing teachers") != std::string::npos);
  CHECK(run_cli({"gradcheck", "--cases", "5"}, &out, &err) == cli::kOk);
}
