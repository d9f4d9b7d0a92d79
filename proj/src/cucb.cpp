#include "mpmab/cucb.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mpmab {

void run_cucb(Env& env, const Reward& reward, Oracle& oracle, int64_t horizon,
              RewardEval* eval, TraceSink* sink) {
  (void)reward;  // the oracle already ranks score matrices for this reward
  const int K = env.K();
  const int M = env.M();
  std::vector<double> sum(static_cast<size_t>(K) * M, 0.0);
  std::vector<int64_t> cnt(static_cast<size_t>(K) * M, 0);
  std::vector<double> scores(static_cast<size_t>(K) * M);
  std::vector<int> arms(static_cast<size_t>(M));
  std::vector<double> outcomes(static_cast<size_t>(M));
  std::vector<uint8_t> eta(static_cast<size_t>(M));

  for (int64_t t = 1; t <= horizon; ++t) {
    Phase ph;
    if (t <= K) {
      // visit every (arm, player) pair once, collision free
      for (int m = 0; m < M; ++m)
        arms[static_cast<size_t>(m)] = (m + static_cast<int>(t) - 1) % K;
      ph = Phase::activation;
    } else {
      const double lt = std::log(static_cast<double>(t));
      for (int m = 0; m < M; ++m)
        for (int k = 0; k < K; ++k) {
          const size_t i = static_cast<size_t>(m) * K + k;
          // capped at 1: scores double as Bernoulli means inside the oracle
          scores[i] =
              cnt[i] == 0
                  ? 1.0  // cannot happen after the warm start
                  : std::min(1.0, sum[i] / static_cast<double>(cnt[i]) +
                                      std::sqrt(1.5 * lt /
                                                static_cast<double>(cnt[i])));
        }
      arms = oracle.solve(M, K, scores).arms;
      ph = Phase::exploration;
    }

    env.step(arms, outcomes, eta);
    for (int m = 0; m < M; ++m) {
      const size_t i =
          static_cast<size_t>(m) * K + arms[static_cast<size_t>(m)];
      sum[i] += outcomes[static_cast<size_t>(m)];
      ++cnt[i];
    }

    StepView sv;
    sv.t = t;
    sv.arm_count = K;
    sv.phase = ph;
    sv.arms = arms;
    sv.outcomes = outcomes;
    sv.eta = eta;
    if (eval) {
      sv.realized_reward = eval->realized(arms, outcomes, eta);
      sv.expected_reward = eval->expected(arms, eta);
    }
    if (sink) sink->on_step(sv);
  }
}

}  // namespace mpmab
