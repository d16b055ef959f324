#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "lakenet/layers.hpp"

namespace lakenet::nn {

inline constexpr int kCheckpointFormatVersion = 1;

/// Parsed checkpoint file.
///
/// Layout (line oriented text, values printed with 17 significant digits):
///
///     lakenet-checkpoint
///     format_version 1
///     component <tag>
///     step <optimizer step>
///     meta <key> <value>            (zero or more)
///     parameters <count>
///     parameter <name> <rows> <cols> <trainable 0|1>
///     values <v...>
///     adam_m <v...>
///     adam_v <v...>
///     end
struct Checkpoint {
  struct Entry {
    std::string name;
    Tensor value;
    Tensor adam_m;
    Tensor adam_v;
    bool trainable = true;
  };

  int format_version = kCheckpointFormatVersion;
  std::string component;
  std::uint64_t step = 0;
  std::map<std::string, std::string> meta;
  std::vector<Entry> entries;
};

Checkpoint capture(const ParameterStore& store, const std::string& component,
                   std::map<std::string, std::string> meta = {});
/// Copies values and optimizer state into `store`; names and shapes must match
/// exactly, otherwise FormatError.
void restore(ParameterStore& store, const Checkpoint& ckpt);

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt);
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(std::istream& in);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace lakenet::nn
