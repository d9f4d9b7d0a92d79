#include "mpmab/instances.hpp"

#include <stdexcept>

#include "mpmab/rng.hpp"

namespace mpmab {

UtilityMatrix bench_5x5() {
  UtilityMatrix u;
  u.K = 5;
  u.M = 5;
  u.mu = {
      0.50, 0.49, 0.39, 0.29, 0.50,   // player 1
      0.50, 0.49, 0.39, 0.29, 0.19,   // player 2
      0.29, 0.19, 0.50, 0.499, 0.39,  // player 3
      0.29, 0.49, 0.50, 0.50, 0.39,   // player 4
      0.49, 0.49, 0.49, 0.49, 0.50,   // player 5
  };
  return u;
}

UtilityMatrix bench_8x6() {
  UtilityMatrix u;
  u.K = 8;
  u.M = 6;
  u.mu = {
      0.45, 0.49, 0.59, 0.17, 0.37, 0.86, 0.94, 0.98,  // player 1
      0.39, 0.25, 0.40, 0.60, 0.24, 0.54, 0.43, 0.67,  // player 2
      0.39, 0.33, 0.80, 0.01, 0.12, 0.20, 0.61, 0.77,  // player 3
      0.95, 0.22, 0.24, 0.88, 0.20, 0.12, 0.29, 0.30,  // player 4
      0.69, 0.89, 0.25, 0.59, 0.43, 0.18, 0.01, 0.84,  // player 5
      0.97, 0.15, 0.89, 0.16, 0.09, 0.57, 0.61, 0.19,  // player 6
  };
  return u;
}

UtilityMatrix random_instance(int K, int M, uint64_t seed) {
  if (K <= 0 || M <= 0 || M > K)
    throw std::invalid_argument("need 1 <= players <= arms");
  UtilityMatrix u;
  u.K = K;
  u.M = M;
  u.mu.resize(static_cast<size_t>(K) * M);
  auto eng = make_engine(seed, stream_instance);
  for (double& v : u.mu) v = uniform01(eng);
  return u;
}

UtilityMatrix builtin_instance(std::string_view name) {
  if (name == "bench_5x5") return bench_5x5();
  if (name == "bench_8x6") return bench_8x6();
  throw std::invalid_argument("unknown builtin instance: " + std::string(name));
}

}  // namespace mpmab
