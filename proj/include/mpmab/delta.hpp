#pragma once

#include <bit>
#include <cassert>
#include <cstdint>
#include <cstdlib>
#include <vector>

#include "mpmab/dyadic.hpp"

namespace mpmab {

// differential update of a quantized statistic: sign plus the magnitude in
// binary with leading zeros stripped (msb first), so small changes cost few
// bits; a zero delta has an empty payload
struct DeltaMessage {
  int sign = 0;                  // -1, 0 or +1; 0 iff payload is empty
  std::vector<uint8_t> payload;  // |delta| msb first, no leading zeros
  int frac_bits = 0;             // resolution of the new value
};

inline DeltaMessage delta_encode(const Dyadic& prev, const Dyadic& curr) {
  assert(curr.frac_bits >= prev.frac_bits);
  Dyadic base = prev.rescaled(curr.frac_bits);
  int64_t d = static_cast<int64_t>(curr.num) - static_cast<int64_t>(base.num);
  DeltaMessage msg;
  msg.frac_bits = curr.frac_bits;
  msg.sign = d > 0 ? 1 : d < 0 ? -1 : 0;
  uint64_t mag = static_cast<uint64_t>(std::llabs(d));
  int width = std::bit_width(mag);
  msg.payload.reserve(width);
  for (int i = width - 1; i >= 0; --i)
    msg.payload.push_back(static_cast<uint8_t>((mag >> i) & 1));
  return msg;
}

inline Dyadic delta_decode(const Dyadic& prev, const DeltaMessage& msg) {
  assert(msg.frac_bits >= prev.frac_bits);
  Dyadic base = prev.rescaled(msg.frac_bits);
  uint64_t mag = 0;
  for (uint8_t b : msg.payload) mag = (mag << 1) | b;
  int64_t num = static_cast<int64_t>(base.num) +
                msg.sign * static_cast<int64_t>(mag);
  assert(num >= 0);
  return Dyadic{static_cast<uint64_t>(num), msg.frac_bits};
}

}  // namespace mpmab
