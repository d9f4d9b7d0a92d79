#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mpmab/reward.hpp"

namespace mpmab {

struct OracleResult {
  std::vector<int> arms;
  double value = 0.0;
};

// ranks a matrix of per-pair score estimates and returns an injective matching
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual OracleResult solve(int M, int K, std::span<const double> scores) = 0;
};

// depth-first search over injective matchings in lexicographic order, keeping
// strict improvements only, so ties resolve to the smallest arm vector; with
// prune enabled, subtrees whose monotone upper bound cannot beat the incumbent
// are skipped (the result is identical either way); throws
// std::invalid_argument when K!/(K-M)! exceeds 10^7
OracleResult exhaustive_argmax(int M, int K, std::span<const double> scores,
                               const Reward& reward, bool prune = true);

// hungarian for linear rewards, exhaustive search otherwise
class ExactOracle final : public Oracle {
 public:
  ExactOracle(Reward reward, bool prune = true)
      : reward_(std::move(reward)), prune_(prune) {}
  OracleResult solve(int M, int K, std::span<const double> scores) override;

 private:
  Reward reward_;
  bool prune_;
};

// degraded oracle for (alpha, beta) experiments: with probability beta it
// returns the exact maximizer, otherwise the best matching scoring at most
// alpha times the optimum (or the overall worst matching when none qualifies)
class ApproxOracle final : public Oracle {
 public:
  ApproxOracle(Reward reward, double alpha, double beta, uint64_t seed);
  OracleResult solve(int M, int K, std::span<const double> scores) override;

  int64_t calls() const { return calls_; }
  // invocations whose returned value reached alpha times the optimum
  int64_t grade_hits() const { return hits_; }

 private:
  Reward reward_;
  double alpha_;
  double beta_;
  std::mt19937_64 eng_;
  int64_t calls_ = 0;
  int64_t hits_ = 0;
};

}  // namespace mpmab
