#pragma once

#include <cstdint>
#include <functional>
#include <span>

#include "mpmab/env.hpp"
#include "mpmab/trace.hpp"

namespace mpmab {

// one decentralized player; the scheduler calls act() once per step for every
// agent, feeds the joint action to the environment, then hands each agent only
// her own outcome and collision flag
class Agent {
 public:
  virtual ~Agent() = default;
  virtual int act() = 0;
  virtual void feedback(double outcome, bool collided) = 0;
  virtual Phase phase() const = 0;
};

// evaluates the system reward of a joint pull for trace accounting
class RewardEval {
 public:
  virtual ~RewardEval() = default;
  virtual double realized(std::span<const int> arms,
                          std::span<const double> outcomes,
                          std::span<const uint8_t> eta) = 0;
  virtual double expected(std::span<const int> arms,
                          std::span<const uint8_t> eta) = 0;
};

// runs agents in lockstep for at most `horizon` steps; the recorded phase of a
// step is the maximum of the agents' phases (a step belongs to the most
// advanced stage any player has entered, e.g. stop signaling while late
// players still collect samples); an optional predicate stops the run early
// when it returns false
void run_lockstep(std::span<Agent* const> agents, Env& env, int64_t horizon,
                  RewardEval* eval, TraceSink* sink,
                  const std::function<bool(const StepView&)>& keep_going = {});

}  // namespace mpmab
