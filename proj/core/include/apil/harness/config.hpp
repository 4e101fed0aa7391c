#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "apil/training/run.hpp"

namespace apil::harness {

/// Applies the keys of a JSON object onto `cfg`. Keys mirror the CLI flags
/// with dashes replaced by underscores (env, map, horizon, teacher, method,
/// episodes, seed, lr, sigma, epsilon, rule, tau, teacher_final_distance,
/// teacher_rollouts, n1, n2, uncertainty_every, probe_n1, errpred_threshold,
/// dropout, train_dropout, persona_init, greedy). Unknown keys and ill-typed values throw
/// std::invalid_argument naming the field.
void apply_json(training::RunConfig& cfg, std::string_view json_text);

training::RunConfig load_run_config(const std::filesystem::path& path);

/// Every key accepted by apply_json, so the output reloads to the same config.
std::string to_json(const training::RunConfig& cfg, int indent = 2);

}  // namespace apil::harness
