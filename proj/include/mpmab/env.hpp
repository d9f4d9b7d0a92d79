#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <variant>
#include <vector>

namespace mpmab {

struct BernoulliDist {
  double p = 0.0;
};

// finite support on [0, 1]
struct DiscreteDist {
  std::vector<double> xs;
  std::vector<double> ps;
};

using OutcomeDist = std::variant<BernoulliDist, DiscreteDist>;

double dist_mean(const OutcomeDist& d);
void validate_dist(const OutcomeDist& d);  // throws std::invalid_argument

// expected utilities, mu[m * K + k] for arm k and player m, both 0-indexed
struct UtilityMatrix {
  int K = 0;
  int M = 0;
  std::vector<double> mu;

  double at(int k, int m) const { return mu[static_cast<size_t>(m) * K + k]; }
  double& at(int k, int m) { return mu[static_cast<size_t>(m) * K + k]; }
};

// lockstep environment: at each step every player pulls one arm, utilities are
// drawn per (arm, player) pair, and an arm shared by two or more players pays
// zero to all of them; each pair has its own random substream, advanced only
// when that pair is pulled, so traces are reproducible from the seed alone
class Env {
 public:
  Env(UtilityMatrix mu, uint64_t seed);
  Env(UtilityMatrix mu, std::vector<OutcomeDist> dists, uint64_t seed);

  int K() const { return mu_.K; }
  int M() const { return mu_.M; }
  const UtilityMatrix& mu() const { return mu_; }
  const OutcomeDist& dist(int k, int m) const {
    return dists_[static_cast<size_t>(m) * mu_.K + k];
  }

  // arms[m] = arm pulled by player m; fills outcome (zero when collided) and
  // eta (1 = sole occupant of the arm)
  void step(std::span<const int> arms, std::span<double> outcome,
            std::span<uint8_t> eta);

 private:
  UtilityMatrix mu_;
  std::vector<OutcomeDist> dists_;
  std::vector<std::mt19937_64> eng_;
  std::vector<int> count_;

  double sample(int k, int m);
};

}  // namespace mpmab
