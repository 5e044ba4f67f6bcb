#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "madrl/policy.hpp"

namespace madrl {

// Versioned parameter snapshot. Serialization stores float32 payloads, so a
// round trip through bytes rounds parameters to float32; a second round trip
// is bit-exact.
struct PolicyCheckpoint {
  PolicyParams params;
  std::uint64_t version = 0;
  std::uint64_t step = 0;
};

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

std::vector<std::uint8_t> serialize_checkpoint(const PolicyCheckpoint& ckpt);
PolicyCheckpoint deserialize_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const PolicyCheckpoint& ckpt, const std::filesystem::path& path);
PolicyCheckpoint load_checkpoint(const std::filesystem::path& path);

// Rounds every parameter to float32 in place, matching what a save/load
// cycle would produce.
void round_to_float32(PolicyParams& params);

std::string policy_config_to_text(const PolicyConfig& config);
PolicyConfig policy_config_from_text(const std::string& text);

}  // namespace madrl
