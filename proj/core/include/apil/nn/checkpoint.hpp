#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "apil/nn/params.hpp"

namespace apil::nn {

/// A named parameter group inside a checkpoint. Entries are written as
/// "<prefix>.<parameter name>".
struct CheckpointGroup {
  std::string prefix;
  ParamSet* params;
};

struct CheckpointEntry {
  std::string name;
  Tensor value;
};

inline constexpr char kCheckpointMagic[8] = {'A', 'P', 'I', 'L', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Byte layout is documented in docs/checkpoint_format.md.
void write_checkpoint(std::ostream& out, const std::vector<CheckpointEntry>& entries);
std::vector<CheckpointEntry> read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointGroup>& groups);

/// Loads values into the given groups. Every parameter of every group must be
/// present with an identical shape; otherwise std::runtime_error is thrown and
/// the groups are left untouched.
void load_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointGroup>& groups);

}  // namespace apil::nn
