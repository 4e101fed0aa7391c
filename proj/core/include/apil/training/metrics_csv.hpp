#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

#include "apil/training/run.hpp"

namespace apil::training {

inline constexpr std::string_view kMetricsHeader =
    "episode,method,teacher,env,seed,query_rate,success,final_dist,exe_loss,ask_loss,"
    "intrinsic,extrinsic,behavioral,total,model";

inline constexpr std::string_view kProbeHeader =
    "episode,method,teacher,env,seed,n1,n2,intrinsic,extrinsic,behavioral,total,model";

/// Shortest decimal form that parses back to the same double.
std::string format_real(double v);

std::string env_label(const RunConfig& cfg);

/// One row per episode. Uncertainty columns are empty on episodes where the
/// probe was not evaluated.
void write_metrics_csv(std::ostream& out, const RunConfig& cfg,
                       std::span<const EpisodeMetrics> episodes);

/// One row per (logged episode, n1).
void write_probe_csv(std::ostream& out, const RunConfig& cfg, std::span<const ProbeRow> rows);

}  // namespace apil::training
