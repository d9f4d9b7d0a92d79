#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

namespace mpmab {

// ordering matters: the system phase of a step is the maximum over the phases
// the individual players report, see run_lockstep
enum class Phase : uint8_t {
  orthogonalization = 0,
  activation = 1,
  communication = 2,
  exploration = 3,
  signaling = 4,
};

std::string_view phase_name(Phase p);
Phase phase_from_name(std::string_view s);

struct StepView {
  int64_t t = 0;  // 1-based global step
  int arm_count = 0;
  Phase phase = Phase::orthogonalization;
  std::span<const int> arms;        // per player, 0-indexed
  std::span<const double> outcomes;  // per player, zero when collided
  std::span<const uint8_t> eta;      // 1 = clean pull
  double realized_reward = 0.0;
  double expected_reward = 0.0;
};

class TraceSink {
 public:
  virtual ~TraceSink() = default;
  virtual void on_step(const StepView& s) = 0;
};

// materialized run history (column layout); fine for moderate horizons, large
// experiments stream into accumulating sinks instead
class Trace final : public TraceSink {
 public:
  int K = 0;
  int M = 0;
  std::vector<int64_t> t;
  std::vector<Phase> phase;
  std::vector<int> arms;         // M entries per step
  std::vector<double> outcomes;  // M entries per step
  std::vector<uint8_t> eta;      // M entries per step
  std::vector<double> realized;
  std::vector<double> expected;

  void on_step(const StepView& s) override;
  size_t steps() const { return t.size(); }
  int collisions_at(size_t i) const;  // players on shared arms at step i
};

// fans one step stream out to several sinks
class MultiSink final : public TraceSink {
 public:
  void add(TraceSink* s) {
    if (s) sinks_.push_back(s);
  }
  void on_step(const StepView& s) override {
    for (auto* k : sinks_) k->on_step(s);
  }

 private:
  std::vector<TraceSink*> sinks_;
};

// csv: t,phase,arms (1-indexed, ';' joined),collisions,realized_reward,expected_reward
void write_csv(const Trace& tr, std::ostream& os);

// compact little-endian binary form, byte-stable for determinism checks
void write_binary(const Trace& tr, std::ostream& os);
Trace read_binary(std::istream& is);  // throws std::runtime_error on damage

}  // namespace mpmab
