#pragma once

#include <cstdint>
#include <string_view>

#include "mpmab/env.hpp"

namespace mpmab {

// 5 arms, 5 players; near-degenerate benchmark (smallest gap 0.001)
UtilityMatrix bench_5x5();

// 8 arms, 6 players; heterogeneous benchmark
UtilityMatrix bench_8x6();

// i.i.d. uniform(0, 1) means
UtilityMatrix random_instance(int K, int M, uint64_t seed);

// "bench_5x5" | "bench_8x6"; throws std::invalid_argument otherwise
UtilityMatrix builtin_instance(std::string_view name);

}  // namespace mpmab
