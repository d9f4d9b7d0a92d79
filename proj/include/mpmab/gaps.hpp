#pragma once

#include <span>
#include <string>
#include <vector>

#include "mpmab/env.hpp"
#include "mpmab/reward.hpp"

namespace mpmab {

// suboptimality structure of an instance under a reward function; matchings
// are valued by their exact expected reward with no collisions
struct GapStats {
  double best_value = 0.0;
  std::vector<int> best_arms;
  // per (arm, player) pair, min/max of best_value - value over the strictly
  // suboptimal matchings containing that pair; +inf / -inf when no suboptimal
  // matching uses the pair
  std::vector<double> pair_min;  // [m * K + k]
  std::vector<double> pair_max;
  double min_gap = 0.0;  // over all strictly suboptimal matchings
  double max_gap = 0.0;
  int64_t matchings = 0;
  int64_t suboptimal = 0;
};

// enumerates all injective matchings (guarded at 10^7, throws
// std::invalid_argument beyond)
GapStats gap_stats(const UtilityMatrix& mu, const Reward& reward,
                   std::span<const OutcomeDist> dists);

// non-finite pair entries are serialized as the strings "inf" / "-inf"
std::string gap_stats_json(const GapStats& g, int K, int M);

}  // namespace mpmab
