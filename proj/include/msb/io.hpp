#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "msb/mechanism.hpp"

namespace msb {

struct MechanismFile {
  BranchingMechanism branching;
  std::optional<ImmigrationMechanism> immigration;
};

/// Strict decoding; unknown keys, wrong types and non-integer z2 raise ValidationError.
MechanismFile parse_mechanism(const nlohmann::json& doc);
MechanismFile load_mechanism(const std::string& path);

nlohmann::json to_json(const LevyAtomMeasure& m);
nlohmann::json to_json(const BranchingMechanism& mech);
nlohmann::json to_json(const ImmigrationMechanism& imm);
nlohmann::json to_json(const MechanismFile& file);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

/// 16 hex digits of fnv1a64 over the compact dump (keys sorted by nlohmann::json).
std::string digest(const nlohmann::json& canonical);

/// Reads a whole file; missing files raise ValidationError naming the path.
std::string read_file(const std::string& path);

/// Writes `content` to `path` through a sibling temp file and rename.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace msb
