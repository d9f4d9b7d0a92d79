#include "mpmab/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <thread>

#include "mpmab/audit.hpp"
#include "mpmab/cucb.hpp"
#include "mpmab/instances.hpp"
#include "mpmab/rng.hpp"

namespace mpmab {

namespace {

std::vector<OutcomeDist> bernoulli_dists(const UtilityMatrix& mu) {
  std::vector<OutcomeDist> out;
  out.reserve(mu.mu.size());
  for (double p : mu.mu) out.push_back(BernoulliDist{p});
  return out;
}

// fans epoch records out and tallies communication volume
struct EpochTally final : public EpochSink {
  std::vector<EpochSink*> next;
  int64_t epochs = 0;
  int64_t uploads = 0;
  int64_t upload_steps = 0;
  int64_t payload_total = 0;

  void on_epoch(const EpochRecord& e) override {
    ++epochs;
    uploads += e.uploads;
    upload_steps += e.upload_steps;
    for (int b : e.payload_bits) payload_total += b;
    for (auto* s : next) s->on_epoch(e);
  }
};

std::string run_stem(const std::string& algo, uint64_t seed) {
  return algo + "_" + std::to_string(seed);
}

void dump_epochs(const std::vector<EpochRecord>& eps, const std::string& path) {
  std::ofstream os(path);
  os << std::setprecision(17);
  for (const auto& e : eps) {
    os << "{\"epoch\": " << e.r << ", \"start\": " << e.t_r << ", \"arms\": [";
    for (size_t i = 0; i < e.arms.size(); ++i)
      os << (i ? ", " : "") << e.arms[i] + 1;
    os << "], \"batch_exponent\": " << e.p_r << ", \"uploads\": " << e.uploads
       << ", \"upload_steps\": " << e.upload_steps << ", \"payload_bits\": [";
    for (size_t i = 0; i < e.payload_bits.size(); ++i)
      os << (i ? ", " : "") << e.payload_bits[i];
    os << "]}\n";
  }
}

std::string_view wire_event_name(WireEvent e) {
  switch (e) {
    case WireEvent::upload_start: return "upload_start";
    case WireEvent::upload_bit: return "upload_bit";
    case WireEvent::upload_end: return "upload_end";
    case WireEvent::assign_init: return "assign_init";
    case WireEvent::assign_bit: return "assign_bit";
    case WireEvent::stop_signal: return "stop_signal";
  }
  return "?";
}

void dump_wire(const Trace& tr, const AuditLog& log, const std::string& path) {
  std::ofstream os(path);
  os << "t,phase,arms,collision_arm,event,sender_rank,receiver_rank,bit\n";
  std::map<int64_t, const WireRecord*> events;
  for (const auto& w : log.wire) events.emplace(w.t, &w);
  for (size_t i = 0; i < tr.steps(); ++i) {
    const Phase ph = tr.phase[i];
    if (ph != Phase::communication && ph != Phase::signaling) continue;
    os << tr.t[i] << ',' << phase_name(ph) << ',';
    for (int m = 0; m < tr.M; ++m)
      os << (m ? ";" : "") << tr.arms[static_cast<size_t>(tr.M) * i + m] + 1;
    int coll_arm = -1;
    for (int m = 0; m < tr.M && coll_arm < 0; ++m) {
      const size_t off = static_cast<size_t>(tr.M) * i + m;
      if (!tr.eta[off]) coll_arm = tr.arms[off];
    }
    os << ',' << (coll_arm < 0 ? 0 : coll_arm + 1);
    auto it = events.find(tr.t[i]);
    if (it != events.end()) {
      const WireRecord& w = *it->second;
      os << ',' << wire_event_name(w.event) << ',' << w.sender_rank << ','
         << w.receiver_rank << ',' << w.bit;
    } else {
      os << ",,,,";
    }
    os << '\n';
  }
}

struct Task {
  std::string algorithm;
  uint64_t seed = 0;
};

}  // namespace

RewardBridge::RewardBridge(const Reward& reward, const Env& env)
    : reward_(reward), env_(env) {
  const size_t M = static_cast<size_t>(env.M());
  mu_buf_.resize(M);
  dist_buf_.resize(M);
}

double RewardBridge::expected(std::span<const int> arms,
                              std::span<const uint8_t> eta) {
  const bool same = have_ && std::equal(arms.begin(), arms.end(), last_arms_.begin()) &&
                    std::equal(eta.begin(), eta.end(), last_eta_.begin());
  if (same) return cached_;
  for (int m = 0; m < env_.M(); ++m) {
    mu_buf_[static_cast<size_t>(m)] = env_.mu().at(arms[static_cast<size_t>(m)], m);
    dist_buf_[static_cast<size_t>(m)] = env_.dist(arms[static_cast<size_t>(m)], m);
  }
  cached_ = expected_reward(reward_, mu_buf_, eta, dist_buf_);
  last_arms_.assign(arms.begin(), arms.end());
  last_eta_.assign(eta.begin(), eta.end());
  have_ = true;
  return cached_;
}

double RewardBridge::realized(std::span<const int> arms,
                              std::span<const double> outcomes,
                              std::span<const uint8_t> eta) {
  if (reward_.has_instantaneous()) return reward_.instantaneous(outcomes);
  return expected(arms, eta);
}

RegretAccumulator::RegretAccumulator(double best_value, double alpha,
                                     double beta, int64_t stride)
    : best_(best_value), ab_target_(alpha * beta * best_value), stride_(stride) {}

void RegretAccumulator::on_step(const StepView& s) {
  cur_.t = s.t;
  cur_.pseudo += best_ - s.expected_reward;
  cur_.alpha_beta += ab_target_ - s.expected_reward;
  if (s.phase == Phase::communication) ++cur_.comm_steps;
  if (s.phase == Phase::signaling) ++cur_.signal_steps;
  if (s.t % stride_ == 0) rows_.push_back(cur_);
}

void RegretAccumulator::on_epoch(const EpochRecord& e) { cur_.epoch = e.r; }

double RegretAccumulator::pseudo_at(int64_t t) const {
  double v = 0.0;
  for (const auto& r : rows_) {
    if (r.t > t) break;
    v = r.pseudo;
  }
  return v;
}

double RegretAccumulator::alpha_beta_at(int64_t t) const {
  double v = 0.0;
  for (const auto& r : rows_) {
    if (r.t > t) break;
    v = r.alpha_beta;
  }
  return v;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers,
                                const std::string& out_dir) {
  const Reward reward =
      cfg.reward ? *cfg.reward : Reward::linear(cfg.instance.M);
  auto dists = bernoulli_dists(cfg.instance);

  ExperimentResult res;
  // with per-seed instances there is no single gap structure to report; each
  // run computes its own best value below
  if (!cfg.instance_per_seed) res.gaps = gap_stats(cfg.instance, reward, dists);

  const bool approx = cfg.oracle.kind == OracleConfig::Kind::approx;
  const double alpha = approx ? cfg.oracle.alpha : 1.0;
  const double beta = approx ? cfg.oracle.beta : 1.0;

  const bool want_dumps = !out_dir.empty() &&
                          (cfg.dumps.csv || cfg.dumps.binary ||
                           cfg.dumps.epochs || cfg.dumps.wire);
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

  std::vector<Task> tasks;
  for (const auto& algo : cfg.algorithms)
    for (uint64_t seed : cfg.seeds) tasks.push_back({algo, seed});
  res.runs.resize(tasks.size());

  auto run_one = [&](const Task& task) {
    RunMetrics out;
    out.algorithm = task.algorithm;
    out.seed = task.seed;

    UtilityMatrix mu = cfg.instance;
    double best = res.gaps.best_value;
    if (cfg.instance_per_seed) {
      mu = random_instance(cfg.instance.K, cfg.instance.M,
                           derive_seed(task.seed, stream_instance));
      best = exhaustive_argmax(cfg.instance.M, cfg.instance.K, mu.mu, reward)
                 .value;
    }
    Env env(mu, task.seed);
    std::unique_ptr<Oracle> oracle;
    ApproxOracle* approx_oracle = nullptr;
    if (approx) {
      auto ao = std::make_unique<ApproxOracle>(
          reward, alpha, beta, derive_seed(task.seed, stream_oracle));
      approx_oracle = ao.get();
      oracle = std::move(ao);
    } else {
      oracle = std::make_unique<ExactOracle>(reward);
    }

    RewardBridge bridge(reward, env);
    RegretAccumulator acc(best, alpha, beta, cfg.sample_stride);
    EpochTally tally;
    tally.next.push_back(&acc);

    Trace trace;
    std::vector<EpochRecord> epoch_dump;
    struct EpochKeeper final : public EpochSink {
      std::vector<EpochRecord>* out;
      void on_epoch(const EpochRecord& e) override { out->push_back(e); }
    } keeper;
    AuditLog audit;

    MultiSink sink;
    sink.add(&acc);
    if (want_dumps && (cfg.dumps.csv || cfg.dumps.binary || cfg.dumps.wire))
      sink.add(&trace);
    if (want_dumps && cfg.dumps.epochs) {
      keeper.out = &epoch_dump;
      tally.next.push_back(&keeper);
    }

    if (task.algorithm == "beacon") {
      BeaconHooks hooks;
      hooks.epochs = &tally;
      if (want_dumps && cfg.dumps.wire) hooks.audit = &audit;
      BeaconTeam team = BeaconTeam::make(cfg.instance.K, cfg.instance.M, reward,
                                         oracle.get(), task.seed, hooks);
      run_lockstep(team.raw, env, cfg.horizon, &bridge, &sink);
    } else {
      run_cucb(env, reward, *oracle, cfg.horizon, &bridge, &sink);
    }

    out.rows = acc.rows();
    if (out.rows.empty() || out.rows.back().t != acc.current().t)
      out.rows.push_back(acc.current());
    out.final_pseudo = acc.current().pseudo;
    out.final_alpha_beta = acc.current().alpha_beta;
    out.comm_steps = acc.current().comm_steps;
    out.signal_steps = acc.current().signal_steps;
    out.epochs = tally.epochs;
    out.mean_payload_bits =
        tally.uploads ? static_cast<double>(tally.payload_total) /
                            static_cast<double>(tally.uploads)
                      : std::nan("");
    out.mean_steps_per_upload =
        tally.uploads ? static_cast<double>(tally.upload_steps) /
                            static_cast<double>(tally.uploads)
                      : std::nan("");
    if (approx_oracle) {
      out.oracle_calls = approx_oracle->calls();
      out.oracle_hits = approx_oracle->grade_hits();
    }

    if (want_dumps) {
      const std::string stem =
          (std::filesystem::path(out_dir) / run_stem(task.algorithm, task.seed))
              .string();
      if (cfg.dumps.csv) {
        std::ofstream os(stem + "_trace.csv");
        write_csv(trace, os);
      }
      if (cfg.dumps.binary) {
        std::ofstream os(stem + "_trace.bin", std::ios::binary);
        write_binary(trace, os);
      }
      if (cfg.dumps.epochs) dump_epochs(epoch_dump, stem + "_epochs.jsonl");
      if (cfg.dumps.wire && task.algorithm == "beacon")
        dump_wire(trace, audit, stem + "_wire.csv");
    }
    return out;
  };

  if (workers <= 1 || tasks.size() <= 1) {
    for (size_t i = 0; i < tasks.size(); ++i) res.runs[i] = run_one(tasks[i]);
  } else {
    std::atomic<size_t> next{0};
    auto drain = [&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        res.runs[i] = run_one(tasks[i]);
      }
    };
    const size_t n = std::min<size_t>(static_cast<size_t>(workers), tasks.size());
    std::vector<std::thread> pool;
    for (size_t i = 0; i < n; ++i) pool.emplace_back(drain);
    for (auto& th : pool) th.join();
  }

  if (!out_dir.empty()) write_outputs(res, cfg, out_dir);
  return res;
}

void write_outputs(const ExperimentResult& res, const ExperimentConfig& cfg,
                   const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream os(fs::path(out_dir) / "runs.csv");
    os << std::setprecision(17);
    os << "algorithm,seed,t,pseudo_regret,alpha_beta_regret,comm_steps,"
          "signal_steps,epoch\n";
    for (const auto& run : res.runs)
      for (const auto& row : run.rows)
        os << run.algorithm << ',' << run.seed << ',' << row.t << ','
           << row.pseudo << ',' << row.alpha_beta << ',' << row.comm_steps
           << ',' << row.signal_steps << ',' << row.epoch << '\n';
  }

  {
    // per (algorithm, t): mean and spread of the pseudo-regret across seeds
    std::map<std::pair<std::string, int64_t>, std::vector<double>> cells;
    for (const auto& run : res.runs)
      for (const auto& row : run.rows)
        cells[{run.algorithm, row.t}].push_back(row.pseudo);
    std::ofstream os(fs::path(out_dir) / "aggregate.csv");
    os << std::setprecision(17);
    os << "algorithm,t,runs,mean_pseudo_regret,sd_pseudo_regret,"
          "min_pseudo_regret,max_pseudo_regret\n";
    for (const auto& [key, vals] : cells) {
      double sum = 0.0, lo = vals[0], hi = vals[0];
      for (double v : vals) {
        sum += v;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      const double mean = sum / static_cast<double>(vals.size());
      double sq = 0.0;
      for (double v : vals) sq += (v - mean) * (v - mean);
      const double sd =
          vals.size() > 1
              ? std::sqrt(sq / static_cast<double>(vals.size() - 1))
              : 0.0;
      os << key.first << ',' << key.second << ',' << vals.size() << ','
         << mean << ',' << sd << ',' << lo << ',' << hi << '\n';
    }
  }

  {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "{\n  \"version\": 1,\n";
    os << "  \"instance\": \"" << cfg.instance_name << "\",\n";
    os << "  \"arms\": " << cfg.instance.K << ",\n";
    os << "  \"players\": " << cfg.instance.M << ",\n";
    const Reward reward =
        cfg.reward ? *cfg.reward : Reward::linear(cfg.instance.M);
    os << "  \"reward\": \"" << reward_name(reward.kind()) << "\",\n";
    os << "  \"horizon\": " << cfg.horizon << ",\n";
    os << "  \"seeds\": " << cfg.seeds.size() << ",\n";
    os << "  \"oracle\": {\"kind\": \""
       << (cfg.oracle.kind == OracleConfig::Kind::approx ? "approx" : "exact")
       << "\", \"alpha\": " << cfg.oracle.alpha
       << ", \"beta\": " << cfg.oracle.beta << "},\n";
    if (!cfg.instance_per_seed) {
      os << "  \"best_value\": " << res.gaps.best_value << ",\n";
      os << "  \"min_gap\": " << res.gaps.min_gap << ",\n";
      os << "  \"max_gap\": " << res.gaps.max_gap << ",\n";
      os << "  \"matchings\": " << res.gaps.matchings << ",\n";
    }
    os << "  \"algorithms\": {";
    bool first_algo = true;
    for (const auto& algo : cfg.algorithms) {
      double pseudo = 0.0, ab = 0.0, payload = 0.0, steps_per = 0.0;
      int64_t n = 0, epochs = 0, comm = 0, sig = 0, calls = 0, hits = 0;
      int64_t payload_runs = 0;
      for (const auto& run : res.runs) {
        if (run.algorithm != algo) continue;
        ++n;
        pseudo += run.final_pseudo;
        ab += run.final_alpha_beta;
        epochs += run.epochs;
        comm += run.comm_steps;
        sig += run.signal_steps;
        calls += run.oracle_calls;
        hits += run.oracle_hits;
        if (!std::isnan(run.mean_payload_bits)) {
          payload += run.mean_payload_bits;
          steps_per += run.mean_steps_per_upload;
          ++payload_runs;
        }
      }
      if (n == 0) continue;
      os << (first_algo ? "" : ",") << "\n    \"" << algo << "\": {";
      os << "\"runs\": " << n;
      os << ", \"mean_final_pseudo_regret\": " << pseudo / static_cast<double>(n);
      os << ", \"mean_final_alpha_beta_regret\": " << ab / static_cast<double>(n);
      os << ", \"mean_epochs\": "
         << static_cast<double>(epochs) / static_cast<double>(n);
      os << ", \"mean_comm_steps\": "
         << static_cast<double>(comm) / static_cast<double>(n);
      os << ", \"mean_signal_steps\": "
         << static_cast<double>(sig) / static_cast<double>(n);
      if (payload_runs) {
        os << ", \"mean_payload_bits\": "
           << payload / static_cast<double>(payload_runs);
        os << ", \"mean_steps_per_upload\": "
           << steps_per / static_cast<double>(payload_runs);
      }
      if (calls) {
        os << ", \"oracle_calls\": " << calls;
        os << ", \"oracle_hits\": " << hits;
      }
      // per-run final regrets, in seed order; histogram material when each
      // seed drew its own instance
      os << ", \"final_pseudo_regrets\": [";
      bool first_run = true;
      for (const auto& run : res.runs) {
        if (run.algorithm != algo) continue;
        os << (first_run ? "" : ", ") << run.final_pseudo;
        first_run = false;
      }
      os << "]}";
      first_algo = false;
    }
    os << "\n  }\n}\n";
    std::ofstream f(fs::path(out_dir) / "summary.json");
    f << os.str();
  }
}

}  // namespace mpmab
