#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace apil::nn {

using Rng = std::mt19937_64;

/// Independent engine for a named sub-stream of a run seed, so that adding
/// draws to one consumer never shifts the draws seen by another.
Rng make_stream(std::uint64_t seed, std::uint64_t stream);

/// Uniform draw from [0, 1).
double uniform01(Rng& rng);

/// Index i drawn with probability probs[i]. probs must be nonnegative.
std::size_t sample_categorical(std::span<const double> probs, Rng& rng);

}  // namespace apil::nn
