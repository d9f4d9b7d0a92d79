#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

#include "mpmab/delta.hpp"
#include "mpmab/dyadic.hpp"
#include "mpmab/oracle.hpp"
#include "mpmab/scheduler.hpp"

namespace mpmab {

// raised when an agent observes something the protocol rules out (a missing
// forced collision, a corrupted frame, an activation collision); simulation
// bugs surface here instead of silently desynchronizing the players
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// per-arm statistics a player accumulates from her own clean exploratory
// pulls; sample means are always taken over the first 2^p samples, so sums at
// power-of-two prefixes are checkpointed as they are crossed
struct ArmRecord {
  int64_t kept = 0;  // exploratory samples retained
  int p = -1;        // floor(log2(kept)), -1 while empty
  int p_committed = -1;  // p at the last statistics hand-off for this arm
  Dyadic tilde;      // last quantized mean
  double sum = 0.0;
  std::array<double, 44> pow2_sum{};

  void add_sample(double x) {
    sum += x;
    ++kept;
    if ((kept & (kept - 1)) == 0) {
      int i = std::bit_width(static_cast<uint64_t>(kept)) - 1;
      pow2_sum[static_cast<size_t>(i)] = sum;
      p = i;
    }
  }
  double mean_at(int pw) const {
    return std::ldexp(pow2_sum[static_cast<size_t>(pw)], -pw);
  }
};

// the leader's view of another player's statistics, reconstructed purely from
// the shared protocol (counts follow from the common batch schedule, means
// from the received deltas)
struct MirrorRecord {
  int64_t kept = 0;
  int p = -1;
  int p_committed = -1;
  Dyadic tilde;
};

// one completed epoch, as reported by the leader
struct EpochRecord {
  int64_t r = 0;
  int64_t t_r = 0;            // global step at which the epoch began
  std::vector<int> arms;      // matching explored this epoch, by rank-1 index
  int p_r = 0;                // batch exponent, batch length = 2^p_r
  int uploads = 0;            // statistics transfers received
  int64_t upload_steps = 0;   // total steps those transfers took, starts included
  std::vector<int> payload_bits;  // per transfer
};

class EpochSink {
 public:
  virtual ~EpochSink() = default;
  virtual void on_epoch(const EpochRecord& e) = 0;
};

// protocol bookkeeping collected for audits; see audit.hpp
enum class WireEvent : uint8_t {
  upload_start = 0,  // leader opens a transfer on the sender's channel arm
  upload_bit = 1,    // a payload/sign bit sent as a forced collision
  upload_end = 2,    // frame terminator
  assign_init = 3,   // leader opens an assignment message
  assign_bit = 4,    // assignment bit sent as a forced collision
  stop_signal = 5,   // leader ends a batch on a player's exploration arm
};

struct WireRecord {
  int64_t t = 0;
  WireEvent event = WireEvent::upload_start;
  int arm = 0;
  int sender_rank = 0;
  int receiver_rank = 0;
  int bit = -1;  // decoded/sent bit where applicable
};

struct LedgerRow {
  int k = 0;
  int m = 0;  // rank of the player the row describes
  int64_t kept = 0;
  int p = -1;
  Dyadic tilde;
};

struct LedgerSnapshot {
  int64_t epoch = 0;
  int rank = 0;  // 1 = leader (mirror rows for everyone), else own rows
  std::vector<LedgerRow> rows;
};

// a quantized mean hand-off, with the raw mean it was computed from, recorded
// at commit time so audits can recheck it against the trace
struct UploadNote {
  int64_t epoch = 0;
  int k = 0;
  int m = 0;
  int p = 0;
  double hat = 0.0;
  Dyadic tilde;
};

struct AuditLog {
  std::vector<WireRecord> wire;
  std::vector<LedgerSnapshot> snapshots;
  std::vector<UploadNote> uploads;
  std::vector<int> rank_of_slot;  // learned rank per constructed agent
};

struct BeaconHooks {
  AuditLog* audit = nullptr;
  EpochSink* epochs = nullptr;
};

// one player running the batched exploration / implicit communication
// algorithm; all players are constructed identically and discover their role
// (leader or follower) during initialization
class BeaconAgent final : public Agent {
 public:
  // slot only labels the agent inside the simulator (rng substream, audit
  // bookkeeping); players_hint sizes the orthogonalization safety cap and is
  // not otherwise used by the protocol
  BeaconAgent(int K, int players_hint, const Reward& reward, Oracle* oracle,
              uint64_t run_seed, int slot, const BeaconHooks& hooks = {});
  ~BeaconAgent() override;

  int act() override;
  void feedback(double outcome, bool collided) override;
  Phase phase() const override;

  // introspection for tests and audits
  bool initialized() const;  // past orthogonalization + rank assignment
  int rank() const;
  int players() const;  // learned count
  int64_t epoch() const;
  const ArmRecord& own(int k) const;
  const MirrorRecord& mirror(int k, int m) const;  // leader only

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// convenience bundle: K-player-team construction with shared hooks
struct BeaconTeam {
  std::vector<std::unique_ptr<BeaconAgent>> agents;
  std::vector<Agent*> raw;

  static BeaconTeam make(int K, int M, const Reward& reward, Oracle* oracle,
                         uint64_t run_seed, const BeaconHooks& hooks = {});
  const BeaconAgent* leader() const;  // null before initialization completes
};

}  // namespace mpmab
