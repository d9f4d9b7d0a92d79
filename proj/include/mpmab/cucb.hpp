#pragma once

#include <cstdint>

#include "mpmab/oracle.hpp"
#include "mpmab/scheduler.hpp"

namespace mpmab {

// centralized combinatorial UCB baseline: one controller plays a collision
// free matching every step, observes all M outcomes, and keeps plain running
// means with confidence radius sqrt(3 ln t / (2 T)); the first K steps warm
// start every (arm, player) pair once via the staggered activation pattern
void run_cucb(Env& env, const Reward& reward, Oracle& oracle, int64_t horizon,
              RewardEval* eval, TraceSink* sink);

}  // namespace mpmab
