#include "mpmab/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mpmab/hungarian.hpp"
#include "mpmab/rng.hpp"

namespace mpmab {

namespace {

void check_dims(int M, int K, std::span<const double> scores) {
  if (M < 1 || K < M) throw std::invalid_argument("need 1 <= players <= arms");
  if (scores.size() != static_cast<size_t>(M) * K)
    throw std::invalid_argument("score matrix size mismatch");
}

void check_guard(int M, int K) {
  double perms = 1.0;
  for (int i = 0; i < M; ++i) perms *= static_cast<double>(K - i);
  if (perms > 1e7)
    throw std::invalid_argument(
        "too many matchings to enumerate (K!/(K-M)! > 1e7)");
}

// depth-first walk over injective matchings in lexicographic order; calls
// visit(arms, player_scores) at every leaf
template <class F>
void enumerate(int M, int K, std::span<const double> scores, F&& visit) {
  std::vector<int> arms(static_cast<size_t>(M), -1);
  std::vector<double> vals(static_cast<size_t>(M), 0.0);
  std::vector<char> used(static_cast<size_t>(K), 0);
  int m = 0;
  int k = 0;
  while (m >= 0) {
    if (k >= K) {
      --m;
      if (m >= 0) {
        k = arms[static_cast<size_t>(m)];
        used[static_cast<size_t>(k)] = 0;
        arms[static_cast<size_t>(m)] = -1;
        ++k;
      }
      continue;
    }
    if (used[static_cast<size_t>(k)]) {
      ++k;
      continue;
    }
    arms[static_cast<size_t>(m)] = k;
    vals[static_cast<size_t>(m)] = scores[static_cast<size_t>(m) * K + k];
    if (m + 1 == M) {
      visit(arms, vals);
      arms[static_cast<size_t>(m)] = -1;
      ++k;
    } else {
      used[static_cast<size_t>(k)] = 1;
      ++m;
      k = 0;
    }
  }
}

}  // namespace

OracleResult exhaustive_argmax(int M, int K, std::span<const double> scores,
                               const Reward& reward, bool prune) {
  check_dims(M, K, scores);
  check_guard(M, K);
  if (reward.players() != M)
    throw std::invalid_argument("reward player count mismatch");

  // per-player best score, for the monotone upper bound
  std::vector<double> colmax(static_cast<size_t>(M),
                             -std::numeric_limits<double>::infinity());
  for (int m = 0; m < M; ++m)
    for (int k = 0; k < K; ++k)
      colmax[static_cast<size_t>(m)] = std::max(
          colmax[static_cast<size_t>(m)], scores[static_cast<size_t>(m) * K + k]);

  OracleResult best;
  best.value = -std::numeric_limits<double>::infinity();

  // recursive version with pruning hooks
  std::vector<int> arms(static_cast<size_t>(M), -1);
  std::vector<double> vals(static_cast<size_t>(M), 0.0);
  std::vector<char> used(static_cast<size_t>(K), 0);

  auto bound_value = [&](int depth) {
    // replace unassigned players by their best possible score; the reward is
    // monotone coordinatewise, so this never underestimates a completion
    for (int m = depth; m < M; ++m)
      vals[static_cast<size_t>(m)] = colmax[static_cast<size_t>(m)];
    return reward.score_value(vals);
  };

  auto rec = [&](auto&& self, int m) -> void {
    if (m == M) {
      double v = reward.score_value(vals);
      if (v > best.value) {
        best.value = v;
        best.arms = arms;
      }
      return;
    }
    if (prune && best.arms.size() == static_cast<size_t>(M)) {
      if (bound_value(m) <= best.value) return;
    }
    for (int k = 0; k < K; ++k) {
      if (used[static_cast<size_t>(k)]) continue;
      used[static_cast<size_t>(k)] = 1;
      arms[static_cast<size_t>(m)] = k;
      vals[static_cast<size_t>(m)] = scores[static_cast<size_t>(m) * K + k];
      self(self, m + 1);
      used[static_cast<size_t>(k)] = 0;
    }
    arms[static_cast<size_t>(m)] = -1;
  };
  rec(rec, 0);
  return best;
}

OracleResult ExactOracle::solve(int M, int K, std::span<const double> scores) {
  if (reward_.kind() == RewardKind::linear) {
    AssignmentResult a = hungarian_argmax(M, K, scores);
    return {std::move(a.arms), a.value};
  }
  return exhaustive_argmax(M, K, scores, reward_, prune_);
}

ApproxOracle::ApproxOracle(Reward reward, double alpha, double beta,
                           uint64_t seed)
    : reward_(std::move(reward)),
      alpha_(alpha),
      beta_(beta),
      eng_(make_engine(seed, stream_oracle)) {
  if (!(alpha > 0.0 && alpha <= 1.0) || !(beta > 0.0 && beta <= 1.0))
    throw std::invalid_argument("need alpha, beta in (0, 1]");
}

OracleResult ApproxOracle::solve(int M, int K, std::span<const double> scores) {
  check_dims(M, K, scores);
  check_guard(M, K);
  ++calls_;

  OracleResult top;
  top.value = -std::numeric_limits<double>::infinity();
  enumerate(M, K, scores, [&](const std::vector<int>& arms,
                              const std::vector<double>& vals) {
    double v = reward_.score_value(vals);
    if (v > top.value) {
      top.value = v;
      top.arms = arms;
    }
  });

  if (uniform01(eng_) < beta_) {
    ++hits_;
    return top;
  }

  const double cutoff = alpha_ * top.value;
  OracleResult degraded, worst;
  degraded.value = -std::numeric_limits<double>::infinity();
  worst.value = std::numeric_limits<double>::infinity();
  enumerate(M, K, scores, [&](const std::vector<int>& arms,
                              const std::vector<double>& vals) {
    double v = reward_.score_value(vals);
    if (v <= cutoff && v > degraded.value) {
      degraded.value = v;
      degraded.arms = arms;
    }
    if (v < worst.value) {
      worst.value = v;
      worst.arms = arms;
    }
  });

  OracleResult out = degraded.arms.empty() ? worst : degraded;
  if (out.value >= cutoff) ++hits_;
  return out;
}

}  // namespace mpmab
