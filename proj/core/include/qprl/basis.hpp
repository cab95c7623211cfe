#pragma once

#include <cstdint>
#include <span>

namespace qprl {

// Basis-index convention: variable/qubit i is stored as bit i of the basis
// index, so |b_0 b_1 ... b_{n-1}> maps to sum_i b_i * 2^i. Every module that
// touches bitstrings goes through these helpers.

inline int bit_of(std::uint32_t index, int qubit) {
  return static_cast<int>((index >> qubit) & 1u);
}

inline std::uint32_t index_from_bits(std::span<const std::uint8_t> bits) {
  std::uint32_t idx = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) idx |= (1u << i);
  }
  return idx;
}

inline void bits_from_index(std::uint32_t index, int n,
                            std::span<std::uint8_t> out) {
  for (int i = 0; i < n; ++i) {
    out[i] = static_cast<std::uint8_t>((index >> i) & 1u);
  }
}

}  // namespace qprl
