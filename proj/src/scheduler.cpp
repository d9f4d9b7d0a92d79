#include "mpmab/scheduler.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace mpmab {

void run_lockstep(std::span<Agent* const> agents, Env& env, int64_t horizon,
                  RewardEval* eval, TraceSink* sink,
                  const std::function<bool(const StepView&)>& keep_going) {
  const int M = static_cast<int>(agents.size());
  if (M != env.M()) throw std::invalid_argument("agent count != players");
  std::vector<int> arms(M);
  std::vector<double> outcomes(M);
  std::vector<uint8_t> eta(M);

  for (int64_t t = 1; t <= horizon; ++t) {
    Phase ph = Phase::orthogonalization;
    for (int m = 0; m < M; ++m) ph = std::max(ph, agents[m]->phase());
    for (int m = 0; m < M; ++m) arms[m] = agents[m]->act();
    env.step(arms, outcomes, eta);
    for (int m = 0; m < M; ++m)
      agents[m]->feedback(outcomes[m], eta[m] == 0);

    StepView view;
    view.t = t;
    view.arm_count = env.K();
    view.phase = ph;
    view.arms = arms;
    view.outcomes = outcomes;
    view.eta = eta;
    if (eval) {
      view.realized_reward = eval->realized(arms, outcomes, eta);
      view.expected_reward = eval->expected(arms, eta);
    }
    if (sink) sink->on_step(view);
    if (keep_going && !keep_going(view)) return;
  }
}

}  // namespace mpmab
