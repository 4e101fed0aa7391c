#include "apil/training/metrics_csv.hpp"

#include <fmt/format.h>

#include <ostream>

namespace apil::training {

std::string format_real(double v) { return fmt::format("{}", v); }

std::string env_label(const RunConfig& cfg) {
  return cfg.map_path.empty() ? std::string(env::to_string(cfg.env)) : "custom";
}

namespace {
std::string uncertainty_columns(const uncertainty::UncertaintyReport& r) {
  return fmt::format("{},{},{},{},{}", r.intrinsic, r.extrinsic, r.behavioral, r.total, r.model);
}
}  // namespace

void write_metrics_csv(std::ostream& out, const RunConfig& cfg,
                       std::span<const EpisodeMetrics> episodes) {
  out << kMetricsHeader << '\n';
  const auto prefix_tail = fmt::format("{},{},{},{}", to_string(cfg.method),
                                       teachers::to_string(cfg.teacher), env_label(cfg), cfg.seed);
  for (const auto& m : episodes) {
    out << fmt::format("{},{},{},{},{},{},{},", m.episode, prefix_tail, m.query_rate,
                       m.success ? 1 : 0, m.final_dist, m.exe_loss, m.ask_loss);
    out << (m.uncertainty ? uncertainty_columns(*m.uncertainty) : std::string(",,,,")) << '\n';
  }
}

void write_probe_csv(std::ostream& out, const RunConfig& cfg, std::span<const ProbeRow> rows) {
  out << kProbeHeader << '\n';
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},{},{},{},{},{}\n", r.episode, to_string(cfg.method),
                       teachers::to_string(cfg.teacher), env_label(cfg), cfg.seed, r.n1,
                       r.report.config.n2, uncertainty_columns(r.report));
  }
}

}  // namespace apil::training
