#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "apil/training/run.hpp"
#include "apil/uncertainty/estimators.hpp"

namespace apil::harness {

// ---- uncertainty-report -------------------------------------------------

struct StateUncertainty {
  uncertainty::UncertaintyReport report;
  int visits = 0;
};

struct VisitedUncertainty {
  /// Distinct states in first-visit order.
  std::vector<StateUncertainty> states;
  /// Visit-weighted mean over all decision states.
  uncertainty::UncertaintyReport aggregate;
};

/// Runs `eval_episodes` seeded evaluation episodes and estimates uncertainty
/// at every distinct state visited, using the learner's uncertainty config.
VisitedUncertainty visited_state_uncertainty(training::Learner& learner, int eval_episodes,
                                             std::uint64_t seed);

/// Columns: state_id,intrinsic,extrinsic,behavioral,total,model,n1,n2,teacher,visits.
/// The final row has state_id "mean".
void write_uncertainty_csv(std::ostream& out, const VisitedUncertainty& v,
                           teachers::TeacherModel teacher);

// ---- table1 -------------------------------------------------------------

struct Table1Row {
  teachers::TeacherModel teacher{};
  double intrinsic = 0.0;
  double extrinsic = 0.0;
  int runs = 0;
  double reference_intrinsic = 0.0;
  double reference_extrinsic = 0.0;
};

/// Accepts uncertainty-report CSVs (uses the "mean" row) and metrics CSVs
/// (uses the last row carrying uncertainty). One row per teacher, averaged
/// over files. Throws std::runtime_error listing teachers with no input.
std::vector<Table1Row> make_table1(std::span<const std::filesystem::path> csvs);
void write_table1(std::ostream& out, std::span<const Table1Row> rows);

// ---- fig4 ---------------------------------------------------------------

struct Fig4Point {
  std::string method;
  std::string teacher;
  int episode = 0;
  double query_rate = 0.0;
  double success = 0.0;
  int runs = 0;
};

/// Seed-averaged query rate and success per (method, teacher, episode).
std::vector<Fig4Point> make_fig4(std::span<const std::filesystem::path> metrics_csvs);
void write_fig4(std::ostream& out, std::span<const Fig4Point> points);

// ---- fig5 ---------------------------------------------------------------

struct Fig5Point {
  int n1 = 0;
  int episode = 0;
  double model = 0.0;
  int runs = 0;
};

struct Fig5Trend {
  int n1 = 0;
  double first_third = 0.0;
  double final_third = 0.0;
};

/// Seed-averaged model uncertainty per (n1, logged episode) from probe CSVs.
std::vector<Fig5Point> make_fig5(std::span<const std::filesystem::path> probe_csvs);
/// Means over the first and final thirds of each n1 series.
std::vector<Fig5Trend> fig5_trends(std::span<const Fig5Point> points);
void write_fig5(std::ostream& out, std::span<const Fig5Point> points);

}  // namespace apil::harness
