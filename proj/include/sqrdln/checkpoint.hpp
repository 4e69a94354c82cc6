#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sqrdln/parameter.hpp"

namespace sqrdln {

/// Checkpoint file layout:
///
///   bytes [0, 8)     magic "SQRDLNCK"
///   bytes [8, 16)    header length L, unsigned 64-bit little-endian
///   bytes [16, 16+L) UTF-8 JSON header
///   remainder        payload of 64-bit IEEE-754 little-endian floats
///
/// The header is an object {"format": "sqrdln-checkpoint", "version": 1,
/// "meta": <caller data>, "blocks": [...]}. Each block entry holds "name",
/// "shape", "constraint" {"kind", "dims"}, "offset" and "count" (both in
/// float units from the start of the payload).
struct StoredBlock {
  std::string name;
  std::vector<std::size_t> shape;
  Constraint constraint;
  std::vector<double> values;
};

struct Checkpoint {
  nlohmann::json meta;
  std::vector<StoredBlock> blocks;
};

inline constexpr char kCheckpointMagic[8] = {'S', 'Q', 'R', 'D', 'L', 'N', 'C', 'K'};

void write_checkpoint(const std::filesystem::path& path, const nlohmann::json& meta,
                      const ParameterList& params);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies stored values into `params`, matching by name and shape.
void restore_blocks(const Checkpoint& ckpt, const ParameterList& params);

}  // namespace sqrdln
