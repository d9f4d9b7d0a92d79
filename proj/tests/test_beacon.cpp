#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>

#include "mpmab/audit.hpp"
#include "mpmab/beacon.hpp"
#include "mpmab/instances.hpp"
#include "mpmab/runner.hpp"

using namespace mpmab;

namespace {

struct Run {
  Trace trace;
  AuditLog audit;
  std::vector<EpochRecord> epochs;
  BeaconTeam team;
  Env env;

  Run(UtilityMatrix mu, const Reward& reward, Oracle* oracle, uint64_t seed,
      int64_t horizon)
      : env(mu, seed) {
    struct Keeper final : EpochSink {
      std::vector<EpochRecord>* out;
      void on_epoch(const EpochRecord& e) override { out->push_back(e); }
    };
    Keeper keeper;
    keeper.out = &epochs;
    BeaconHooks hooks;
    hooks.audit = &audit;
    hooks.epochs = &keeper;
    team = BeaconTeam::make(mu.K, mu.M, reward, oracle, seed, hooks);
    RewardBridge bridge(reward, env);
    run_lockstep(team.raw, env, horizon, &bridge, &trace);
  }
};

}  // namespace

TEST_CASE("players learn distinct ranks and the true head count") {
  UtilityMatrix mu = bench_5x5();
  auto reward = Reward::linear(5);
  ExactOracle oracle(reward);
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    Run run(mu, reward, &oracle, seed, 400);
    std::set<int> ranks;
    for (const auto& a : run.team.agents) {
      CHECK(a->initialized());
      CHECK(a->players() == 5);
      ranks.insert(a->rank());
    }
    CHECK(ranks == std::set<int>{1, 2, 3, 4, 5});
    CHECK(run.team.leader() != nullptr);
    CHECK(run.team.leader()->rank() == 1);
  }
}

TEST_CASE("initialization phases precede the epoch phases in the trace") {
  UtilityMatrix mu = bench_5x5();
  auto reward = Reward::linear(5);
  ExactOracle oracle(reward);
  Run run(mu, reward, &oracle, 11, 600);
  const auto& ph = run.trace.phase;
  auto first_of = [&](Phase p) {
    return std::find(ph.begin(), ph.end(), p) - ph.begin();
  };
  const auto ortho = first_of(Phase::orthogonalization);
  const auto act = first_of(Phase::activation);
  const auto comm = first_of(Phase::communication);
  const auto expl = first_of(Phase::exploration);
  const auto sig = first_of(Phase::signaling);
  CHECK(ortho == 0);
  CHECK(act > ortho);
  CHECK(comm > act);
  CHECK(expl > comm);
  CHECK(sig > expl);
  // activation is exactly K collision free steps
  CHECK(std::count(ph.begin(), ph.end(), Phase::activation) == 5);
}

TEST_CASE("epoch records line up with the trace") {
  UtilityMatrix mu = bench_5x5();
  auto reward = Reward::linear(5);
  ExactOracle oracle(reward);
  Run run(mu, reward, &oracle, 7, 4000);
  REQUIRE(run.epochs.size() >= 5);
  for (size_t i = 0; i < run.epochs.size(); ++i) {
    const auto& e = run.epochs[i];
    CHECK(e.r == static_cast<int64_t>(i) + 1);
    CHECK(e.arms.size() == 5);
    // the explored matching is injective
    std::set<int> used(e.arms.begin(), e.arms.end());
    CHECK(used.size() == 5);
    CHECK(e.p_r >= 0);
    // the epoch starts on a communication step (first epoch right after
    // activation)
    const size_t idx = static_cast<size_t>(e.t_r) - 1;
    REQUIRE(idx < run.trace.steps());
    CHECK(run.trace.phase[idx] == Phase::communication);
    if (i > 0) CHECK(e.t_r > run.epochs[i - 1].t_r);
    CHECK(static_cast<int>(e.payload_bits.size()) == e.uploads);
  }
  // batch exponents grow over time
  CHECK(run.epochs.back().p_r > run.epochs.front().p_r);
}

TEST_CASE("full protocol audit comes back green") {
  UtilityMatrix mu = bench_5x5();
  auto reward = Reward::linear(5);
  ExactOracle oracle(reward);
  for (uint64_t seed : {3u, 14u}) {
    Run run(mu, reward, &oracle, seed, 6000);
    auto rep = audit_run(run.trace, run.audit);
    for (const auto& v : rep.violations) INFO(v);
    CHECK(rep.ok);
    CHECK(rep.epochs_checked >= 5);
    CHECK(rep.collisions_attributed > 0);
    CHECK(rep.exploration_collisions == 0);
    CHECK(rep.activation_collisions == 0);
    CHECK(rep.means_checked > 0);
  }
}

TEST_CASE("audit on a nonlinear reward run") {
  UtilityMatrix mu = bench_8x6();
  auto reward = Reward::minimal(6);
  ExactOracle oracle(reward);
  Run run(mu, reward, &oracle, 5, 5000);
  auto rep = audit_run(run.trace, run.audit);
  for (const auto& v : rep.violations) INFO(v);
  CHECK(rep.ok);
  CHECK(rep.epochs_checked >= 3);
}

TEST_CASE("the audit catches a tampered trace") {
  UtilityMatrix mu = bench_5x5();
  auto reward = Reward::linear(5);
  ExactOracle oracle(reward);
  Run run(mu, reward, &oracle, 21, 4000);
  REQUIRE(audit_run(run.trace, run.audit).ok);

  // flip one retained exploratory outcome; the recomputed hand-off means no
  // longer match what was transmitted
  Trace bad = run.trace;
  bool flipped = false;
  for (size_t i = 0; i < bad.steps() && !flipped; ++i) {
    if (bad.phase[i] != Phase::exploration) continue;
    for (int m = 0; m < bad.M; ++m) {
      const size_t off = static_cast<size_t>(bad.M) * i + m;
      if (bad.eta[off]) {
        bad.outcomes[off] = 1.0 - bad.outcomes[off];
        flipped = true;
        break;
      }
    }
  }
  REQUIRE(flipped);
  CHECK_FALSE(audit_run(bad, run.audit).ok);

  // claim a collision where none happened
  Trace bad2 = run.trace;
  for (size_t i = 0; i < bad2.steps(); ++i) {
    if (bad2.phase[i] != Phase::communication) continue;
    bool any = false;
    for (int m = 0; m < bad2.M; ++m) any |= !bad2.eta[static_cast<size_t>(bad2.M) * i + m];
    if (!any) {
      bad2.arms[static_cast<size_t>(bad2.M) * i + 1] =
          bad2.arms[static_cast<size_t>(bad2.M) * i + 0];
      break;
    }
  }
  CHECK_FALSE(audit_run(bad2, run.audit).ok);
}

TEST_CASE("same seed reproduces the trace byte for byte") {
  UtilityMatrix mu = bench_5x5();
  auto reward = Reward::linear(5);
  ExactOracle oracle(reward);
  auto bytes = [&](uint64_t seed) {
    Run run(mu, reward, &oracle, seed, 2500);
    std::ostringstream os;
    write_binary(run.trace, os);
    return os.str();
  };
  CHECK(bytes(99) == bytes(99));
  CHECK(bytes(99) != bytes(100));
}

TEST_CASE("binary trace round trip") {
  UtilityMatrix mu = bench_5x5();
  auto reward = Reward::linear(5);
  ExactOracle oracle(reward);
  Run run(mu, reward, &oracle, 13, 800);
  std::stringstream ss;
  write_binary(run.trace, ss);
  Trace back = read_binary(ss);
  CHECK(back.K == run.trace.K);
  CHECK(back.M == run.trace.M);
  CHECK(back.t == run.trace.t);
  CHECK(back.phase == run.trace.phase);
  CHECK(back.arms == run.trace.arms);
  CHECK(back.outcomes == run.trace.outcomes);
  CHECK(back.eta == run.trace.eta);
  CHECK(back.realized == run.trace.realized);
  CHECK(back.expected == run.trace.expected);

  std::stringstream trunc(ss.str().substr(0, 40));
  CHECK_THROWS_AS(read_binary(trunc), std::runtime_error);
}

TEST_CASE("a single player still runs epochs") {
  UtilityMatrix mu{3, 1, {0.2, 0.9, 0.5}};
  auto reward = Reward::linear(1);
  ExactOracle oracle(reward);
  Run run(mu, reward, &oracle, 4, 1500);
  CHECK(run.team.agents[0]->initialized());
  CHECK(run.team.agents[0]->rank() == 1);
  CHECK(run.team.agents[0]->players() == 1);
  CHECK(run.epochs.size() >= 3);
  // nobody to signal, nobody to talk to
  for (Phase p : run.trace.phase) CHECK(p != Phase::signaling);
  auto rep = audit_run(run.trace, run.audit);
  for (const auto& v : rep.violations) INFO(v);
  CHECK(rep.ok);
  // with one player the matching is a single arm, and the deepest batches
  // (occasional bonus-driven revisits aside) should belong to the best one
  std::array<int, 3> deepest{-1, -1, -1};
  for (const auto& e : run.epochs)
    deepest[e.arms[0]] = std::max(deepest[e.arms[0]], e.p_r);
  CHECK(deepest[1] > deepest[0]);
  CHECK(deepest[1] > deepest[2]);
}

TEST_CASE("early stop predicate halts the run") {
  UtilityMatrix mu = bench_5x5();
  auto reward = Reward::linear(5);
  ExactOracle oracle(reward);
  Env env(mu, 2);
  BeaconTeam team = BeaconTeam::make(5, 5, reward, &oracle, 2, {});
  Trace trace;
  run_lockstep(team.raw, env, 100000, nullptr, &trace,
               [](const StepView& s) { return s.phase != Phase::exploration; });
  CHECK(trace.steps() < 1000);
  CHECK(trace.phase.back() == Phase::exploration);
}

TEST_CASE("own ledger statistics grow with the epochs") {
  UtilityMatrix mu = bench_5x5();
  auto reward = Reward::linear(5);
  ExactOracle oracle(reward);
  Run run(mu, reward, &oracle, 17, 6000);
  const BeaconAgent* leader = run.team.leader();
  REQUIRE(leader != nullptr);
  int64_t total = 0;
  for (int k = 0; k < 5; ++k) {
    CHECK(leader->own(k).kept >= 1);
    total += leader->own(k).kept;
  }
  // activation gave one sample per arm, batches add the rest
  CHECK(total > 5);
  CHECK(leader->epoch() == static_cast<int64_t>(run.epochs.size()) + 1);
}
