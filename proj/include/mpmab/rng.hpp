#pragma once

#include <cstdint>
#include <random>

namespace mpmab {

// splitmix64 finalizer, used to spread one master seed into independent
// substream seeds so that adding or removing a consumer never shifts the
// draws of another
inline uint64_t mix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// substream tags; every consumer of randomness hangs off one of these
enum : uint64_t {
  stream_arm = 1,       // per (arm, player) utility samples
  stream_ortho = 2,     // per player arm picks during orthogonalization
  stream_oracle = 3,    // approximation oracle coin flips
  stream_instance = 4,  // random instance generation
  stream_mc = 5,        // monte carlo reward estimates
};

inline uint64_t derive_seed(uint64_t master, uint64_t stream, uint64_t a = 0,
                            uint64_t b = 0) {
  uint64_t h = mix64(master ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ stream);
  h = mix64(h ^ a);
  return mix64(h ^ b);
}

inline std::mt19937_64 make_engine(uint64_t master, uint64_t stream,
                                   uint64_t a = 0, uint64_t b = 0) {
  return std::mt19937_64(derive_seed(master, stream, a, b));
}

// uniform double in [0, 1); hand rolled so results do not depend on the
// standard library's distribution implementation
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// uniform integer in [0, n)
inline int uniform_below(std::mt19937_64& eng, int n) {
  return static_cast<int>(uniform01(eng) * n) % n;
}

}  // namespace mpmab
