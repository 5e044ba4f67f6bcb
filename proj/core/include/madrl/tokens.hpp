#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace madrl {

using TokenId = std::int32_t;
using TokenSeq = std::vector<TokenId>;

// Reserved ids shared by every vocabulary and by the policy.
inline constexpr TokenId kPadId = 0;
inline constexpr TokenId kBosId = 1;
inline constexpr TokenId kEosId = 2;
inline constexpr TokenId kUnkId = 3;
inline constexpr TokenId kNumReserved = 4;

// Drops a single trailing terminator, if present.
inline std::span<const TokenId> strip_eos(std::span<const TokenId> seq) {
  if (!seq.empty() && seq.back() == kEosId) return seq.first(seq.size() - 1);
  return seq;
}

}  // namespace madrl
