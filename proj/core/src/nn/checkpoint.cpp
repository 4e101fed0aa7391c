#include "apil/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace apil::nn {
namespace {

static_assert(sizeof(double) == 8);

template <typename U>
void put_le(std::ostream& out, U value) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>(value >> (8 * i));
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) {
    throw std::runtime_error("checkpoint truncated");
  }
  U value = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) value |= static_cast<U>(bytes[i]) << (8 * i);
  return value;
}

constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 32;

}  // namespace

void write_checkpoint(std::ostream& out, const std::vector<CheckpointEntry>& entries) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(entries.size()));
  for (const auto& e : entries) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.value.rank()));
    for (auto d : e.value.shape()) put_le<std::uint64_t>(out, d);
    for (double v : e.value.values()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

std::vector<CheckpointEntry> read_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("not a checkpoint file (bad magic)");
  }
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  const auto count = get_le<std::uint32_t>(in);
  std::vector<CheckpointEntry> entries;
  entries.reserve(count);
  for (std::uint32_t n = 0; n < count; ++n) {
    CheckpointEntry e;
    e.name.resize(get_le<std::uint32_t>(in));
    if (!in.read(e.name.data(), static_cast<std::streamsize>(e.name.size()))) {
      throw std::runtime_error("checkpoint truncated");
    }
    const auto rank = get_le<std::uint32_t>(in);
    std::vector<std::size_t> shape(rank);
    std::uint64_t total = 1;
    for (auto& d : shape) {
      d = static_cast<std::size_t>(get_le<std::uint64_t>(in));
      total *= d;
      if (total > kMaxElements) throw std::runtime_error("checkpoint entry too large: " + e.name);
    }
    std::vector<double> values(total);
    for (auto& v : values) v = std::bit_cast<double>(get_le<std::uint64_t>(in));
    e.value = Tensor(std::move(shape), std::move(values));
    entries.push_back(std::move(e));
  }
  return entries;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointGroup>& groups) {
  std::vector<CheckpointEntry> entries;
  for (const auto& g : groups) {
    for (const auto& p : *g.params) entries.push_back({g.prefix + "." + p.name, p.value});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, entries);
}

void load_checkpoint(const std::filesystem::path& path, const std::vector<CheckpointGroup>& groups) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  const auto entries = read_checkpoint(in);

  auto find = [&](const std::string& name) -> const CheckpointEntry* {
    for (const auto& e : entries) {
      if (e.name == name) return &e;
    }
    return nullptr;
  };
  for (const auto& g : groups) {
    for (const auto& p : *g.params) {
      const auto* e = find(g.prefix + "." + p.name);
      if (!e) throw std::runtime_error("checkpoint is missing parameter " + g.prefix + "." + p.name);
      if (e->value.shape() != p.value.shape()) {
        throw std::runtime_error("checkpoint parameter " + e->name + " has shape " +
                                 shape_to_string(e->value.shape()) + ", expected " +
                                 shape_to_string(p.value.shape()));
      }
    }
  }
  for (const auto& g : groups) {
    for (auto& p : *g.params) p.value = find(g.prefix + "." + p.name)->value;
  }
}

}  // namespace apil::nn
