#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mpmab/beacon.hpp"
#include "mpmab/config.hpp"
#include "mpmab/gaps.hpp"
#include "mpmab/scheduler.hpp"

namespace mpmab {

// RewardEval over a concrete instance; consecutive steps usually repeat the
// same joint pull, so the expected value is memoized on (arms, eta)
class RewardBridge final : public RewardEval {
 public:
  RewardBridge(const Reward& reward, const Env& env);
  double realized(std::span<const int> arms, std::span<const double> outcomes,
                  std::span<const uint8_t> eta) override;
  double expected(std::span<const int> arms,
                  std::span<const uint8_t> eta) override;

 private:
  const Reward& reward_;
  const Env& env_;
  std::vector<int> last_arms_;
  std::vector<uint8_t> last_eta_;
  std::vector<double> mu_buf_;
  std::vector<OutcomeDist> dist_buf_;
  double cached_ = 0.0;
  bool have_ = false;
};

struct RegretRow {
  int64_t t = 0;
  double pseudo = 0.0;      // cumulative best - expected
  double alpha_beta = 0.0;  // cumulative alpha*beta*best - expected
  int64_t comm_steps = 0;
  int64_t signal_steps = 0;
  int64_t epoch = 0;
};

// streaming regret bookkeeping; rows are sampled every `stride` steps and at
// the final step
class RegretAccumulator final : public TraceSink, public EpochSink {
 public:
  RegretAccumulator(double best_value, double alpha, double beta,
                    int64_t stride);
  void on_step(const StepView& s) override;
  void on_epoch(const EpochRecord& e) override;

  const std::vector<RegretRow>& rows() const { return rows_; }
  const RegretRow& current() const { return cur_; }
  // cumulative pseudo-regret at the sampled step closest below or at t
  double pseudo_at(int64_t t) const;
  double alpha_beta_at(int64_t t) const;

 private:
  double best_, ab_target_;
  int64_t stride_;
  RegretRow cur_;
  std::vector<RegretRow> rows_;
};

struct RunMetrics {
  std::string algorithm;
  uint64_t seed = 0;
  std::vector<RegretRow> rows;
  double final_pseudo = 0.0;
  double final_alpha_beta = 0.0;
  int64_t comm_steps = 0;
  int64_t signal_steps = 0;
  int64_t epochs = 0;
  double mean_payload_bits = 0.0;     // nan when nothing was uploaded
  double mean_steps_per_upload = 0.0;
  int64_t oracle_calls = 0;
  int64_t oracle_hits = 0;
};

struct ExperimentResult {
  GapStats gaps;
  std::vector<RunMetrics> runs;
};

// executes every (algorithm, seed) pair, `workers` runs in parallel (each run
// itself is single threaded and fully determined by its seed)
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers,
                                const std::string& out_dir = "");

// runs.csv, aggregate.csv and summary.json under out_dir
void write_outputs(const ExperimentResult& res, const ExperimentConfig& cfg,
                   const std::string& out_dir);

}  // namespace mpmab
