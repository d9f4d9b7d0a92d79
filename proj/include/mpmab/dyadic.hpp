#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>

namespace mpmab {

// nonnegative dyadic rational num / 2^frac_bits; statistics travel between
// players in this form so both sides hold bit-identical values
struct Dyadic {
  uint64_t num = 0;
  int frac_bits = 0;

  double value() const { return std::ldexp(static_cast<double>(num), -frac_bits); }

  // same rational re-expressed at a finer resolution
  Dyadic rescaled(int bits) const {
    assert(bits >= frac_bits && bits <= 62);
    return Dyadic{num << (bits - frac_bits), bits};
  }

  friend bool operator==(const Dyadic&, const Dyadic&) = default;
};

// smallest multiple of 2^-frac_bits that is >= x, for x in [0, 1]; one ulp is
// added whenever x falls strictly between grid points, so the result never
// underestimates the input and overshoots by less than 2^-frac_bits
inline Dyadic quantize_ceil(double x, int frac_bits) {
  assert(x >= 0.0 && x <= 1.0);
  assert(frac_bits >= 0 && frac_bits <= 62);
  double scaled = std::ceil(std::ldexp(x, frac_bits));
  return Dyadic{static_cast<uint64_t>(scaled), frac_bits};
}

}  // namespace mpmab
