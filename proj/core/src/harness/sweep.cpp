#include "apil/harness/sweep.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "apil/harness/config.hpp"
#include "apil/training/metrics_csv.hpp"
#include "json.hpp"

#ifndef APIL_LAB_VERSION
#define APIL_LAB_VERSION "unknown"
#endif
#ifndef APIL_LAB_GIT_DESCRIBE
#define APIL_LAB_GIT_DESCRIBE "unknown"
#endif

namespace apil::harness {

void validate(const SweepSpec& spec) {
  if (spec.methods.empty()) throw std::invalid_argument("invalid sweep: method list is empty");
  if (spec.teachers.empty()) throw std::invalid_argument("invalid sweep: teacher list is empty");
  if (spec.seeds.empty()) throw std::invalid_argument("invalid sweep: seed list is empty");
  if (spec.out_dir.empty()) throw std::invalid_argument("invalid sweep: output directory is empty");
  if (spec.threads < 0) throw std::invalid_argument("invalid sweep: threads must be nonnegative");
  training::validate(spec.base);
}

int default_thread_count() {
  int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* cap = std::getenv("APIL_LAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(cap, &end, 10);
    if (end != cap && *end == '\0' && v > 0) n = std::min<long>(n, v);
  }
  return n;
}

bool SweepResult::all_ok() const noexcept {
  return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok; });
}

std::string cell_stem(const training::RunConfig& cfg) {
  return fmt::format("{}_{}_{}_s{}", training::to_string(cfg.method),
                     teachers::to_string(cfg.teacher), training::env_label(cfg), cfg.seed);
}

CellResult run_cell(const training::RunConfig& cfg, const std::filesystem::path& out_dir) {
  CellResult cell;
  cell.config = cfg;
  const auto stem = cell_stem(cfg);
  cell.metrics_file = stem + ".csv";
  if (!cfg.probe_n1.empty()) cell.probe_file = stem + ".probe.csv";
  try {
    training::Learner learner(cfg);
    const auto result = training::train(learner);
    for (const auto& m : result.episodes) {
      if (m.uncertainty) cell.reports.push_back(*m.uncertainty);
    }
    for (const auto& p : result.probe) cell.reports.push_back(p.report);

    std::ofstream out(out_dir / cell.metrics_file, std::ios::binary);
    training::write_metrics_csv(out, cfg, result.episodes);
    if (!out) throw std::runtime_error("failed writing " + cell.metrics_file);
    if (!cell.probe_file.empty()) {
      std::ofstream probe(out_dir / cell.probe_file, std::ios::binary);
      training::write_probe_csv(probe, cfg, result.probe);
      if (!probe) throw std::runtime_error("failed writing " + cell.probe_file);
    }
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

namespace {

void write_manifest(const SweepSpec& spec, const SweepResult& result) {
  using nlohmann::json;
  json m;
  m["version"] = APIL_LAB_VERSION;
  m["git_describe"] = APIL_LAB_GIT_DESCRIBE;
  m["base_config"] = json::parse(to_json(spec.base));
  json cells = json::array();
  for (const auto& c : result.cells) {
    json j;
    j["config"] = json::parse(to_json(c.config));
    j["metrics_file"] = c.metrics_file;
    if (!c.probe_file.empty()) j["probe_file"] = c.probe_file;
    j["status"] = c.ok ? "ok" : "failed";
    if (!c.ok) j["error"] = c.error;
    cells.push_back(std::move(j));
  }
  m["cells"] = std::move(cells);
  std::ofstream out(spec.out_dir / "manifest.json", std::ios::binary);
  out << m.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing manifest.json");
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  validate(spec);
  std::filesystem::create_directories(spec.out_dir);

  std::vector<training::RunConfig> configs;
  for (auto method : spec.methods) {
    for (auto teacher : spec.teachers) {
      for (auto seed : spec.seeds) {
        auto cfg = spec.base;
        cfg.method = method;
        cfg.teacher = teacher;
        cfg.seed = seed;
        configs.push_back(std::move(cfg));
      }
    }
  }

  SweepResult result;
  result.cells.resize(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      result.cells[i] = run_cell(configs[i], spec.out_dir);
    }
  };
  const int threads = std::min<int>(spec.threads > 0 ? spec.threads : default_thread_count(),
                                    static_cast<int>(configs.size()));
  {
    std::vector<std::jthread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  write_manifest(spec, result);
  return result;
}

}  // namespace apil::harness
