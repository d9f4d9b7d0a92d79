#pragma once

#include <span>
#include <vector>

namespace mpmab {

struct AssignmentResult {
  std::vector<int> arms;  // arms[m] = arm of player m, injective
  double value = 0.0;
};

// maximum weight injective assignment of M players to K arms (M <= K),
// scores[m * K + k]; among equal-value optima the lexicographically smallest
// arm vector is returned
AssignmentResult hungarian_argmax(int M, int K, std::span<const double> scores);

// optimal value only, no tie resolution work
double hungarian_value(int M, int K, std::span<const double> scores);

}  // namespace mpmab
