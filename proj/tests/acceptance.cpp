// end-to-end acceptance checks, one printed line per criterion; exits with the
// number of failed criteria so the harness can gate on it
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "mpmab/audit.hpp"
#include "mpmab/beacon.hpp"
#include "mpmab/config.hpp"
#include "mpmab/delta.hpp"
#include "mpmab/dyadic.hpp"
#include "mpmab/hungarian.hpp"
#include "mpmab/instances.hpp"
#include "mpmab/oracle.hpp"
#include "mpmab/reward.hpp"
#include "mpmab/rng.hpp"
#include "mpmab/runner.hpp"
#include "mpmab/scheduler.hpp"
#include "mpmab/trace.hpp"

using namespace mpmab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* label, const Outcome& o) {
  std::printf("criterion %d (%s): %s — %s\n", id, label,
              o.pass ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- criterion 1

Outcome codec_roundtrips() {
  const auto t0 = std::chrono::steady_clock::now();
  auto eng = make_engine(2024, stream_mc);
  const int64_t n = 100000;
  int64_t mismatches = 0;
  for (int64_t i = 0; i < n; ++i) {
    const int b1 = static_cast<int>(eng() % 33);
    const int b2 = b1 + static_cast<int>(eng() % static_cast<uint64_t>(33 - b1));
    const double x1 = uniform01(eng);
    const double x2 = uniform01(eng);
    const Dyadic prev = quantize_ceil(x1, b1);
    const Dyadic cur = quantize_ceil(x2, b2);
    bool ok = prev.value() >= x1 && prev.value() - x1 < std::ldexp(1.0, -b1);
    ok = ok && cur.value() >= x2 && cur.value() - x2 < std::ldexp(1.0, -b2);
    const DeltaMessage msg = delta_encode(prev, cur);
    ok = ok && msg.payload.size() <= static_cast<size_t>(b2) + 1;
    ok = ok && delta_decode(prev, msg) == cur;
    if (!ok) ++mismatches;
  }
  const double dt = seconds_since(t0);
  Outcome o;
  o.pass = mismatches == 0 && dt < 10.0;
  o.detail = std::to_string(n) + " randomized roundtrips, " +
             std::to_string(mismatches) + " mismatches, " + num(dt) + " s";
  return o;
}

// --------------------------------------------------------- criteria 2, 3, 4

struct ProtocolStats {
  int runs_audited = 0;
  int runs_clean = 0;
  std::string first_violation;
  int64_t min_epochs = INT64_MAX;
  int64_t max_epochs = 0;
  int64_t uploads = 0;
  int64_t upload_steps = 0;
  int64_t payload_bits = 0;
  int64_t boundaries = 0;
  int64_t means_checked = 0;
};

ProtocolStats run_protocol_batch() {
  struct Keeper final : public EpochSink {
    std::vector<EpochRecord>* out;
    void on_epoch(const EpochRecord& e) override { out->push_back(e); }
  };
  ProtocolStats st;
  const UtilityMatrix mu = bench_5x5();
  const auto reward = Reward::linear(5);
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    ExactOracle oracle(reward);
    Env env(mu, seed);
    std::vector<EpochRecord> eps;
    Keeper keeper;
    keeper.out = &eps;
    AuditLog log;
    BeaconHooks hooks;
    hooks.audit = &log;
    hooks.epochs = &keeper;
    BeaconTeam team = BeaconTeam::make(5, 5, reward, &oracle, seed, hooks);
    Trace trace;
    run_lockstep(team.raw, env, 100000, nullptr, &trace);

    const AuditReport rep = audit_run(trace, log);
    ++st.runs_audited;
    if (rep.ok) {
      ++st.runs_clean;
    } else if (st.first_violation.empty() && !rep.violations.empty()) {
      st.first_violation = "seed " + std::to_string(seed) + ": " +
                           rep.violations.front();
    }
    st.boundaries += rep.epochs_checked;
    st.means_checked += rep.means_checked;
    st.min_epochs = std::min<int64_t>(st.min_epochs,
                                      static_cast<int64_t>(eps.size()));
    st.max_epochs = std::max<int64_t>(st.max_epochs,
                                      static_cast<int64_t>(eps.size()));
    for (const EpochRecord& e : eps) {
      st.uploads += e.uploads;
      st.upload_steps += e.upload_steps;
      for (int b : e.payload_bits) st.payload_bits += b;
    }
  }
  return st;
}

Outcome protocol_audit(const ProtocolStats& st) {
  Outcome o;
  o.pass = st.runs_clean == st.runs_audited && st.boundaries > 0 &&
           st.means_checked > 0;
  o.detail = std::to_string(st.runs_clean) + "/" +
             std::to_string(st.runs_audited) + " runs clean, " +
             std::to_string(st.boundaries) + " ledger boundaries, " +
             std::to_string(st.means_checked) + " hand-off means recomputed";
  if (!st.first_violation.empty()) o.detail += "; " + st.first_violation;
  return o;
}

Outcome communication_cost(const ProtocolStats& st) {
  const double mean_bits =
      static_cast<double>(st.payload_bits) / static_cast<double>(st.uploads);
  const double mean_steps =
      static_cast<double>(st.upload_steps) / static_cast<double>(st.uploads);
  Outcome o;
  o.pass = st.min_epochs >= 10 && st.uploads > 0 && mean_bits <= 7.0 &&
           mean_steps <= 18.0;
  o.detail = "mean payload " + num(mean_bits) + " bits (<= 7), mean " +
             num(mean_steps) + " steps per update (<= 18), min epochs " +
             std::to_string(st.min_epochs);
  return o;
}

Outcome epoch_bound(const ProtocolStats& st) {
  const double bound = 5.0 * 5.0 * std::log2(100000.0) + 5.0;
  Outcome o;
  o.pass = static_cast<double>(st.max_epochs) <= bound;
  o.detail = "max epochs " + std::to_string(st.max_epochs) + " within " +
             num(bound);
  return o;
}

// ---------------------------------------------------------------- criterion 5

Outcome solver_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  auto eng = make_engine(55, stream_instance);
  auto fill = [&](std::vector<double>& s) {
    for (double& v : s) v = uniform01(eng);
  };

  int64_t linear_bad = 0;
  for (auto [count, m, k] : {std::tuple{200, 5, 5}, std::tuple{50, 6, 8}}) {
    const auto reward = Reward::linear(m);
    std::vector<double> scores(static_cast<size_t>(m) * k);
    for (int i = 0; i < count; ++i) {
      fill(scores);
      const AssignmentResult h = hungarian_argmax(m, k, scores);
      const OracleResult e = exhaustive_argmax(m, k, scores, reward, false);
      if (std::fabs(h.value - e.value) > 1e-9 || h.arms != e.arms) ++linear_bad;
    }
  }

  int64_t prune_bad = 0;
  const std::vector<Reward> kinds = {
      Reward::proportional_fairness(std::vector<double>(5, 1.0), 0.01),
      Reward::minimal(5),
      Reward::threshold({0.3, 0.5, 0.7, 0.2, 0.9}),
      Reward::video_quality(std::vector<PiecewiseLinear>(
          5, PiecewiseLinear{{0.0, 0.5, 1.0}, {0.0, 1.2, 1.6}})),
      Reward::top_l(5, 3),
      Reward::max_min(5),
  };
  std::vector<double> scores(25);
  for (const Reward& r : kinds)
    for (int i = 0; i < 100; ++i) {
      fill(scores);
      const OracleResult a = exhaustive_argmax(5, 5, scores, r, true);
      const OracleResult b = exhaustive_argmax(5, 5, scores, r, false);
      if (a.arms != b.arms || std::fabs(a.value - b.value) > 1e-12) ++prune_bad;
    }

  const double dt = seconds_since(t0);
  Outcome o;
  o.pass = linear_bad == 0 && prune_bad == 0 && dt < 60.0;
  o.detail = "250 assignment cross-checks (" + std::to_string(linear_bad) +
             " off), 600 pruning cross-checks (" + std::to_string(prune_bad) +
             " off), " + num(dt) + " s";
  return o;
}

// ---------------------------------------------------------------- criterion 6

struct InitStats {
  int64_t runs = 0;
  int64_t correct = 0;
  double total_duration = 0.0;
  int64_t max_duration = 0;
};

InitStats run_init_batch(int K, int M, bool track_duration) {
  struct Counter final : public TraceSink {
    int64_t n = 0;
    Phase last = Phase::orthogonalization;
    void on_step(const StepView& s) override {
      ++n;
      last = s.phase;
    }
  };
  const auto reward = Reward::linear(M);
  ExactOracle oracle(reward);
  InitStats st;
  for (uint64_t run = 1; run <= 10000; ++run) {
    UtilityMatrix mu = random_instance(K, M, derive_seed(77, stream_instance, run));
    Env env(mu, run);
    BeaconTeam team = BeaconTeam::make(K, M, reward, &oracle, run, {});
    Counter counter;
    run_lockstep(team.raw, env, 100000, nullptr, &counter,
                 [](const StepView& s) {
                   return s.phase == Phase::orthogonalization;
                 });
    ++st.runs;
    bool ok = counter.last != Phase::orthogonalization;
    std::set<int> ranks;
    for (const auto& a : team.agents) {
      ok = ok && a->initialized() && a->players() == M;
      ranks.insert(a->rank());
    }
    ok = ok && static_cast<int>(ranks.size()) == M && *ranks.begin() == 1 &&
         *ranks.rbegin() == M;
    if (ok) ++st.correct;
    if (track_duration) {
      const int64_t dur = counter.n - 1;
      st.total_duration += static_cast<double>(dur);
      st.max_duration = std::max(st.max_duration, dur);
    }
  }
  return st;
}

Outcome initialization() {
  const InitStats wide = run_init_batch(10, 5, true);
  const InitStats tight = run_init_batch(5, 5, false);
  const double mean_dur =
      wide.total_duration / static_cast<double>(wide.runs);
  Outcome o;
  o.pass = wide.correct == wide.runs && tight.correct == tight.runs &&
           mean_dur <= 120.0;
  o.detail = "10 arms, 5 players: " + std::to_string(wide.correct) + "/" +
             std::to_string(wide.runs) + " correct, mean setup " +
             num(mean_dur) + " steps (<= 120, max " +
             std::to_string(wide.max_duration) + "); 5 arms, 5 players: " +
             std::to_string(tight.correct) + "/" + std::to_string(tight.runs) +
             " correct";
  return o;
}

// ------------------------------------------------------------ criteria 7, 8

std::vector<uint64_t> twenty_seeds() {
  std::vector<uint64_t> s(20);
  for (int i = 0; i < 20; ++i) s[static_cast<size_t>(i)] = i + 1;
  return s;
}

double row_pseudo(const RunMetrics& rm, int64_t t) {
  for (const RegretRow& r : rm.rows)
    if (r.t == t) return r.pseudo;
  return std::nan("");
}

double row_alpha_beta(const RunMetrics& rm, int64_t t) {
  for (const RegretRow& r : rm.rows)
    if (r.t == t) return r.alpha_beta;
  return std::nan("");
}

double mean_pseudo(const ExperimentResult& res, const std::string& algo,
                   int64_t t) {
  double sum = 0.0;
  int n = 0;
  for (const RunMetrics& rm : res.runs)
    if (rm.algorithm == algo) {
      sum += row_pseudo(rm, t);
      ++n;
    }
  return sum / n;
}

Outcome linear_regret_parity() {
  ExperimentConfig cfg;
  cfg.instance_name = "bench_5x5";
  cfg.instance = bench_5x5();
  cfg.reward = Reward::linear(5);
  cfg.algorithms = {"beacon", "cucb"};
  cfg.horizon = 1000000;
  cfg.seeds = twenty_seeds();
  cfg.sample_stride = 100000;
  const ExperimentResult res = run_experiment(cfg, 1);

  const double b_full = mean_pseudo(res, "beacon", 1000000);
  const double b_tenth = mean_pseudo(res, "beacon", 100000);
  const double c_full = mean_pseudo(res, "cucb", 1000000);
  const double c_tenth = mean_pseudo(res, "cucb", 100000);
  const double b_growth = b_full / b_tenth;
  const double c_growth = c_full / c_tenth;
  Outcome o;
  o.pass = std::isfinite(b_full) && std::isfinite(c_full) &&
           b_full <= 3.0 * c_full && b_growth <= 2.0 && c_growth <= 2.0;
  o.detail = "mean final regret " + num(b_full) + " vs " + num(c_full) +
             " centralized (x" + num(b_full / c_full) +
             ", <= 3); tenfold-horizon growth " + num(b_growth) + " and " +
             num(c_growth) + " (<= 2)";
  return o;
}

struct NonlinearSummary {
  bool pass = true;
  std::string detail;
};

NonlinearSummary nonlinear_case(const char* name, const Reward& reward) {
  ExperimentConfig cfg;
  cfg.instance_name = "bench_8x6";
  cfg.instance = bench_8x6();
  cfg.reward = reward;
  cfg.algorithms = {"beacon", "cucb"};
  cfg.horizon = 100000;
  cfg.seeds = twenty_seeds();
  cfg.sample_stride = 1000;
  const ExperimentResult res = run_experiment(cfg, 1);

  bool monotone = true;
  bool finite = true;
  for (const RunMetrics& rm : res.runs) {
    for (size_t i = 0; i < rm.rows.size(); ++i) {
      finite = finite && std::isfinite(rm.rows[i].pseudo);
      if (i > 0) monotone = monotone && rm.rows[i].pseudo >=
                                            rm.rows[i - 1].pseudo - 1e-9;
    }
  }
  const double b = mean_pseudo(res, "beacon", 100000);
  const double c = mean_pseudo(res, "cucb", 100000);
  NonlinearSummary s;
  s.pass = finite && monotone && b <= 3.0 * c;
  s.detail = std::string(name) + " " + num(b) + " vs " + num(c) + " (x" +
             num(b / c) + ")" + (monotone ? "" : ", regret not monotone") +
             (finite ? "" : ", non-finite regret");
  return s;
}

Outcome nonlinear_regret_parity() {
  const NonlinearSummary a = nonlinear_case("min-user", Reward::minimal(6));
  const NonlinearSummary b = nonlinear_case(
      "fairness",
      Reward::proportional_fairness(std::vector<double>(6, 1.0), 0.01));
  Outcome o;
  o.pass = a.pass && b.pass;
  o.detail = a.detail + "; " + b.detail + "; both <= 3x centralized";
  return o;
}

// ---------------------------------------------------------------- criterion 9

Outcome expectation_engine() {
  const int M = 6;
  int64_t cases = 0, off = 0;
  for (int kind = 0; kind < 7; ++kind)
    for (int c = 0; c < 20; ++c) {
      auto eng = make_engine(900 + static_cast<uint64_t>(kind), stream_mc,
                             static_cast<uint64_t>(c));
      std::vector<double> mu_s(M);
      std::vector<OutcomeDist> dists(M);
      for (int m = 0; m < M; ++m) {
        mu_s[static_cast<size_t>(m)] = uniform01(eng);
        dists[static_cast<size_t>(m)] =
            BernoulliDist{mu_s[static_cast<size_t>(m)]};
      }
      std::vector<uint8_t> eta(M, 1);
      if (c % 2 == 1) eta[1] = eta[3] = 0;

      Reward r = Reward::linear(M);
      switch (kind) {
        case 0:
          break;
        case 1: {
          std::vector<double> w(M);
          for (double& v : w) v = 0.5 + uniform01(eng);
          r = Reward::proportional_fairness(std::move(w), 0.01);
          break;
        }
        case 2:
          r = Reward::minimal(M);
          break;
        case 3: {
          std::vector<double> phis(M);
          for (double& v : phis) v = 0.05 + 0.95 * uniform01(eng);
          r = Reward::threshold(std::move(phis));
          break;
        }
        case 4: {
          std::vector<PiecewiseLinear> us;
          for (int m = 0; m < M; ++m) {
            const double y1 = 0.5 + uniform01(eng);
            const double y2 = y1 + 0.5 * y1 * uniform01(eng);
            us.push_back(PiecewiseLinear{{0.0, 0.5, 1.0}, {0.0, y1, y2}});
          }
          r = Reward::video_quality(std::move(us));
          break;
        }
        case 5:
          r = Reward::top_l(M, 1 + c % M);
          break;
        case 6:
          r = Reward::max_min(M);
          break;
      }

      const double exact = expected_reward(r, mu_s, eta, dists);
      const McEstimate mc = mc_expected_reward(
          r, mu_s, eta, dists, 1000000,
          derive_seed(4242, static_cast<uint64_t>(kind),
                      static_cast<uint64_t>(c)));
      ++cases;
      const double diff = std::fabs(exact - mc.mean);
      const bool ok =
          mc.stderr_ > 0.0 ? diff <= 4.0 * mc.stderr_ : diff <= 1e-12;
      if (!ok) ++off;
    }
  Outcome o;
  o.pass = off == 0;
  o.detail = std::to_string(cases) +
             " enumerated-vs-sampled expectations across 7 reward kinds, " +
             std::to_string(off) + " outside 4 standard errors";
  return o;
}

// --------------------------------------------------------------- criterion 10

Outcome degraded_oracle_harness() {
  ExperimentConfig cfg;
  cfg.instance_name = "bench_8x6";
  cfg.instance = bench_8x6();
  cfg.reward = Reward::minimal(6);
  cfg.algorithms = {"beacon"};
  cfg.horizon = 100000;
  cfg.seeds = twenty_seeds();
  cfg.oracle.kind = OracleConfig::Kind::approx;
  cfg.oracle.alpha = 0.9;
  cfg.oracle.beta = 0.8;
  cfg.sample_stride = 10000;
  const ExperimentResult res = run_experiment(cfg, 1);

  int64_t calls = 0, hits = 0;
  double ab_full = 0.0, ab_tenth = 0.0;
  for (const RunMetrics& rm : res.runs) {
    calls += rm.oracle_calls;
    hits += rm.oracle_hits;
    ab_full += row_alpha_beta(rm, 100000);
    ab_tenth += row_alpha_beta(rm, 10000);
  }
  ab_full /= static_cast<double>(res.runs.size());
  ab_tenth /= static_cast<double>(res.runs.size());

  const double rate = static_cast<double>(hits) / static_cast<double>(calls);
  const double floor_rate =
      0.8 - 3.0 * std::sqrt(0.8 * 0.2 / static_cast<double>(calls));
  const double growth = ab_full / ab_tenth;
  Outcome o;
  o.pass = rate >= floor_rate && growth <= 2.5;
  o.detail = "success rate " + num(rate) + " over " + std::to_string(calls) +
             " calls (floor " + num(floor_rate) + "); scaled-target regret " +
             num(ab_tenth) + " -> " + num(ab_full) + ", tenfold growth " +
             num(growth) + " (<= 2.5)";
  return o;
}

}  // namespace

int main() {
  report(1, "delta codec roundtrips", codec_roundtrips());

  const ProtocolStats st = run_protocol_batch();
  report(2, "protocol audit", protocol_audit(st));
  report(3, "communication cost", communication_cost(st));
  report(4, "epoch count bound", epoch_bound(st));

  report(5, "matching solver agreement", solver_agreement());
  report(6, "initialization", initialization());
  report(7, "linear regret parity", linear_regret_parity());
  report(8, "nonlinear regret parity", nonlinear_regret_parity());
  report(9, "expectation engine", expectation_engine());
  report(10, "degraded oracle harness", degraded_oracle_harness());

  std::printf("%d of 10 criteria passed\n", 10 - failures);
  return failures;
}
