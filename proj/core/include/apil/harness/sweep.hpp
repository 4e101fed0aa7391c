#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "apil/training/run.hpp"

namespace apil::harness {

struct SweepSpec {
  training::RunConfig base;
  std::vector<training::Method> methods;
  std::vector<teachers::TeacherModel> teachers;
  std::vector<std::uint64_t> seeds;
  std::filesystem::path out_dir;
  /// 0 means default_thread_count().
  int threads = 0;
};

/// Throws std::invalid_argument on empty method, teacher or seed lists.
void validate(const SweepSpec& spec);

/// Available processors, capped by APIL_LAB_THREADS when it holds a positive integer.
int default_thread_count();

struct CellResult {
  training::RunConfig config;
  std::string metrics_file;
  /// Empty unless config.probe_n1 is set.
  std::string probe_file;
  bool ok = false;
  std::string error;
  /// Every uncertainty report the cell emitted, for post-hoc checks.
  std::vector<uncertainty::UncertaintyReport> reports;
};

struct SweepResult {
  std::vector<CellResult> cells;
  bool all_ok() const noexcept;
};

/// "<method>_<teacher>_<env>_s<seed>" without extension.
std::string cell_stem(const training::RunConfig& cfg);

/// Runs one training run and writes its CSVs into out_dir.
CellResult run_cell(const training::RunConfig& cfg, const std::filesystem::path& out_dir);

/// Runs every (method, teacher, seed) cell, writes manifest.json into out_dir.
SweepResult run_sweep(const SweepSpec& spec);

}  // namespace apil::harness
