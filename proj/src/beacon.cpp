#include "mpmab/beacon.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "mpmab/rng.hpp"

namespace mpmab {

namespace {

inline int floor_log2(int64_t n) {
  return n <= 0 ? -1 : std::bit_width(static_cast<uint64_t>(n)) - 1;
}

// resolution of a quantized mean at exponent p
inline int quant_bits(int p) { return 1 + (p + 1) / 2; }

}  // namespace

struct BeaconAgent::Impl {
  enum class St {
    ortho_pick,
    ortho_cast,
    rank_walk,
    activation,
    // leader
    l_up_open,
    l_up_sign,
    l_up_mark,
    l_up_bit,
    l_as_open,
    l_as_bit,
    l_explore,
    l_signal,
    // follower
    f_idle,
    f_up_sign,
    f_up_mark,
    f_up_bit,
    f_up_end,
    f_as_bit,
    f_hold,
    f_explore,
    f_wait,
  };

  // immutable setup
  int K;
  Reward reward;
  Oracle* oracle;
  BeaconHooks hooks;
  int slot;
  int B;  // bits per arm index in assignment messages
  std::mt19937_64 pick_rng;
  int64_t block_cap;

  St st = St::ortho_pick;
  int64_t global_t = 0;  // completed steps
  int cur_arm = -1;

  // orthogonalization
  bool fixed = false;
  int fixed_arm = -1;
  int block_pos = 0;  // 0 = random pick, 1..K broadcast
  bool saw_unfixed = false;
  int64_t blocks = 0;

  // rank assignment
  int rank_step = 1;
  int stay_coll = 0;
  int total_coll = 0;
  int rank = 0;
  int M = 0;

  // activation
  int act_idx = 0;

  // statistics
  std::vector<ArmRecord> own;
  std::vector<MirrorRecord> mir;  // leader only, rank-major

  // epoch bookkeeping
  int64_t r = 0;
  int comm_arm = -1;
  int lead_arm = -1;
  std::vector<int> comm_arms;  // leader: channel arm per rank

  // leader upload receive
  std::vector<std::pair<int, int>> sched;  // (k, rank)
  size_t sched_i = 0;
  bool recv_neg = false;
  std::vector<uint8_t> recv_bits;
  int64_t transfer_steps = 0;
  int64_t t_r = 0;

  // leader assignment send
  int asg_rank = 0;
  std::vector<uint8_t> asg_bits;
  size_t asg_i = 0;

  // exploration
  std::vector<int> S;
  int p_r = 0;
  int64_t explore_len = 0;
  int64_t explore_i = 0;
  int signal_rank = 0;
  EpochRecord diag;

  // follower
  std::vector<int> upq;
  size_t upq_i = 0;
  int up_k = -1;
  DeltaMessage out;
  size_t out_i = 0;
  int asg_recv_i = 0;
  int asg_s1 = 0;
  int asg_sm = 0;
  int next_lead_arm = -1;
  int hold_left = 0;
  int expl_arm = -1;
  std::vector<double> batch;
  int64_t clean = 0;
  int wait_left = 0;

  Impl(int K_, int players_hint, const Reward& rw, Oracle* orc, uint64_t seed,
       int slot_, const BeaconHooks& hk)
      : K(K_),
        reward(rw),
        oracle(orc),
        hooks(hk),
        slot(slot_),
        B(std::bit_width(static_cast<unsigned>(K_ - 1))),
        pick_rng(make_engine(seed, stream_ortho, static_cast<uint64_t>(slot_))),
        own(static_cast<size_t>(K_)) {
    if (K_ < 1 || players_hint < 1 || players_hint > K_)
      throw std::invalid_argument("need 1 <= players <= arms");
    int spare = K_ - players_hint + 1;
    block_cap = 10LL * ((static_cast<int64_t>(K_) * K_ + spare - 1) / spare);
  }

  size_t mi(int k, int rk) const {
    return static_cast<size_t>(rk - 1) * K + k;
  }

  void note_wire(WireEvent e, int arm, int sr, int rr, int bit) {
    if (hooks.audit)
      hooks.audit->wire.push_back({global_t, e, arm, sr, rr, bit});
  }

  void note_upload(int k, int m, int p, double hat, const Dyadic& tilde) {
    if (hooks.audit) hooks.audit->uploads.push_back({r, k, m, p, hat, tilde});
  }

  [[noreturn]] void protocol_fail(const char* what) const {
    throw ProtocolError(std::string(what) + " (slot " + std::to_string(slot) +
                        ", step " + std::to_string(global_t) + ")");
  }

  // ---- epoch machinery -------------------------------------------------

  void enter_epochs() {
    r = 1;
    comm_arm = rank - 1;
    lead_arm = 0;
    if (rank == 1) {
      mir.assign(static_cast<size_t>(K) * M, MirrorRecord{});
      for (auto& mr : mir) mr.kept = 1;  // one activation pull everywhere
      comm_arms.resize(static_cast<size_t>(M));
      for (int j = 1; j <= M; ++j) comm_arms[static_cast<size_t>(j - 1)] = j - 1;
      leader_plan();
    } else {
      follower_comm_entry();
    }
  }

  void refresh_own_arm(int k) {
    ArmRecord& a = own[static_cast<size_t>(k)];
    if (a.p > a.p_committed) {
      double hat = a.mean_at(a.p);
      a.tilde = quantize_ceil(hat, quant_bits(a.p));
      a.p_committed = a.p;
      note_upload(k, 1, a.p, hat, a.tilde);
    }
  }

  void leader_plan() {
    t_r = global_t + 1;
    diag = EpochRecord{};
    diag.r = r;
    diag.t_r = t_r;
    for (int k = 0; k < K; ++k) {
      refresh_own_arm(k);
      const ArmRecord& a = own[static_cast<size_t>(k)];
      mir[mi(k, 1)] = {a.kept, a.p, a.p_committed, a.tilde};
    }
    sched.clear();
    sched_i = 0;
    for (int k = 0; k < K; ++k) {
      for (int m = 2; m <= M; ++m) {
        MirrorRecord& mr = mir[mi(k, m)];
        mr.p = floor_log2(mr.kept);
        if (mr.p > mr.p_committed) sched.emplace_back(k, m);
      }
    }
    if (!sched.empty()) {
      begin_transfer();
    } else {
      leader_decide();
    }
  }

  void begin_transfer() {
    recv_bits.clear();
    recv_neg = false;
    transfer_steps = 0;
    st = St::l_up_open;
  }

  void finish_transfer() {
    auto [k, m] = sched[sched_i];
    MirrorRecord& mr = mir[mi(k, m)];
    const int b = quant_bits(mr.p);
    if (static_cast<int>(recv_bits.size()) > b + 1)
      protocol_fail("frame longer than the resolution permits");
    DeltaMessage msg;
    msg.frac_bits = b;
    msg.sign = recv_bits.empty() ? 0 : (recv_neg ? -1 : 1);
    msg.payload = recv_bits;
    mr.tilde = delta_decode(mr.tilde, msg);
    if (mr.tilde.num > (1ULL << b)) protocol_fail("decoded mean above one");
    mr.p_committed = mr.p;
    ++diag.uploads;
    diag.upload_steps += transfer_steps;
    diag.payload_bits.push_back(static_cast<int>(recv_bits.size()));
    ++sched_i;
    if (sched_i < sched.size()) {
      begin_transfer();
    } else {
      leader_decide();
    }
  }

  void leader_decide() {
    std::vector<double> bar(static_cast<size_t>(M) * K);
    const double lt = std::log(static_cast<double>(t_r));
    for (int m = 1; m <= M; ++m) {
      for (int k = 0; k < K; ++k) {
        const MirrorRecord& mr = mir[mi(k, m)];
        // capped at 1: scores double as Bernoulli means inside the oracle
        bar[mi(k, m)] = std::min(
            1.0,
            mr.tilde.value() + std::sqrt(std::ldexp(3.0 * lt, -(mr.p + 1))));
      }
    }
    OracleResult res = oracle->solve(M, K, bar);
    S = std::move(res.arms);
    p_r = mir[mi(S[0], 1)].p;
    for (int m = 2; m <= M; ++m)
      p_r = std::min(p_r, mir[mi(S[static_cast<size_t>(m - 1)], m)].p);
    diag.arms = S;
    diag.p_r = p_r;
    if (M > 1) {
      asg_rank = 2;
      build_assignment();
      st = St::l_as_open;
    } else {
      start_explore();
    }
  }

  void build_assignment() {
    asg_bits.clear();
    asg_i = 0;
    for (int idx : {S[0], S[static_cast<size_t>(asg_rank - 1)]})
      for (int i = B - 1; i >= 0; --i)
        asg_bits.push_back(static_cast<uint8_t>((idx >> i) & 1));
  }

  void start_explore() {
    explore_len = int64_t{1} << p_r;
    explore_i = 0;
    st = St::l_explore;
  }

  void snapshot_leader() {
    if (!hooks.audit) return;
    LedgerSnapshot snap;
    snap.epoch = r;
    snap.rank = 1;
    for (int m = 1; m <= M; ++m)
      for (int k = 0; k < K; ++k) {
        const MirrorRecord& mr = mir[mi(k, m)];
        snap.rows.push_back({k, m, mr.kept, mr.p_committed, mr.tilde});
      }
    hooks.audit->snapshots.push_back(std::move(snap));
  }

  void snapshot_follower() {
    if (!hooks.audit) return;
    LedgerSnapshot snap;
    snap.epoch = r;
    snap.rank = rank;
    for (int k = 0; k < K; ++k) {
      const ArmRecord& a = own[static_cast<size_t>(k)];
      snap.rows.push_back({k, rank, a.kept, a.p_committed, a.tilde});
    }
    hooks.audit->snapshots.push_back(std::move(snap));
  }

  void leader_epoch_end() {
    for (int m = 1; m <= M; ++m)
      mir[mi(S[static_cast<size_t>(m - 1)], m)].kept += explore_len;
    snapshot_leader();
    if (hooks.epochs) hooks.epochs->on_epoch(diag);
    ++r;
    comm_arms = S;
    comm_arm = S[0];
    leader_plan();
  }

  void follower_comm_entry() {
    upq.clear();
    upq_i = 0;
    for (int k = 0; k < K; ++k)
      if (own[static_cast<size_t>(k)].p > own[static_cast<size_t>(k)].p_committed)
        upq.push_back(k);
    st = St::f_idle;
  }

  void follower_begin_upload() {
    up_k = upq[upq_i];
    ArmRecord& a = own[static_cast<size_t>(up_k)];
    double hat = a.mean_at(a.p);
    Dyadic t2 = quantize_ceil(hat, quant_bits(a.p));
    out = delta_encode(a.tilde, t2);
    out_i = 0;
    a.tilde = t2;
    a.p_committed = a.p;
    note_upload(up_k, rank, a.p, hat, t2);
    st = St::f_up_sign;
  }

  void follower_begin_explore() {
    batch.clear();
    clean = 0;
    st = St::f_explore;
  }

  void follower_epoch_end() {
    int64_t len = clean - (rank - 2);
    if (len < 1 || (len & (len - 1)) != 0)
      protocol_fail("stop signal at a non power-of-two sample count");
    ArmRecord& a = own[static_cast<size_t>(expl_arm)];
    for (int64_t i = 0; i < len; ++i)
      a.add_sample(batch[static_cast<size_t>(i)]);
    snapshot_follower();
    wait_left = M - rank;
    comm_arm = expl_arm;
    lead_arm = next_lead_arm;
    ++r;
    if (wait_left > 0) {
      st = St::f_wait;
    } else {
      follower_comm_entry();
    }
  }

  // ---- act/feedback ----------------------------------------------------

  int act() {
    switch (st) {
      case St::ortho_pick:
        cur_arm = fixed ? fixed_arm : uniform_below(pick_rng, K);
        break;
      case St::ortho_cast:
        cur_arm = fixed ? fixed_arm : block_pos - 1;
        break;
      case St::rank_walk: {
        const int k1 = fixed_arm + 1;
        cur_arm = rank_step <= 2 * k1
                      ? fixed_arm
                      : (fixed_arm + (rank_step - 2 * k1)) % K;
        break;
      }
      case St::activation:
        cur_arm = (rank - 1 + act_idx) % K;
        break;
      case St::l_up_open:
        cur_arm = comm_arms[static_cast<size_t>(sched[sched_i].second - 1)];
        break;
      case St::l_up_sign:
      case St::l_up_mark:
      case St::l_up_bit:
        cur_arm = comm_arm;
        break;
      case St::l_as_open:
        cur_arm = comm_arms[static_cast<size_t>(asg_rank - 1)];
        break;
      case St::l_as_bit:
        cur_arm = asg_bits[asg_i]
                      ? comm_arms[static_cast<size_t>(asg_rank - 1)]
                      : comm_arm;
        break;
      case St::l_explore:
        cur_arm = S[0];
        break;
      case St::l_signal:
        cur_arm = S[static_cast<size_t>(signal_rank - 1)];
        break;
      case St::f_idle:
      case St::f_up_mark:
      case St::f_as_bit:
      case St::f_hold:
      case St::f_wait:
        cur_arm = comm_arm;
        break;
      case St::f_up_sign:
        cur_arm = out.sign < 0 ? lead_arm : comm_arm;
        break;
      case St::f_up_bit:
        cur_arm = out.payload[out_i] ? lead_arm : comm_arm;
        break;
      case St::f_up_end:
        cur_arm = lead_arm;
        break;
      case St::f_explore:
        cur_arm = expl_arm;
        break;
    }
    return cur_arm;
  }

  void feedback(double outcome, bool collided) {
    ++global_t;
    switch (st) {
      case St::ortho_pick:
        if (!fixed && !collided) {
          fixed = true;
          fixed_arm = cur_arm;
        }
        block_pos = 1;
        saw_unfixed = false;
        st = St::ortho_cast;
        break;

      case St::ortho_cast:
        if (fixed && cur_arm == block_pos - 1 && collided) saw_unfixed = true;
        ++block_pos;
        if (block_pos == K + 1) {
          ++blocks;
          if (fixed && !saw_unfixed) {
            rank_step = 1;
            st = St::rank_walk;
          } else {
            if (blocks >= block_cap)
              protocol_fail("orthogonalization exceeded its block cap");
            block_pos = 0;
            st = St::ortho_pick;
          }
        }
        break;

      case St::rank_walk: {
        const int k1 = fixed_arm + 1;
        if (collided) {
          ++total_coll;
          if (rank_step <= 2 * k1) ++stay_coll;
        }
        ++rank_step;
        if (rank_step > 2 * K) {
          rank = 1 + stay_coll;
          M = 1 + total_coll;
          if (rank < 1 || rank > M || M > K)
            protocol_fail("inconsistent rank assignment");
          if (hooks.audit) {
            auto& ranks = hooks.audit->rank_of_slot;
            if (static_cast<int>(ranks.size()) <= slot)
              ranks.resize(static_cast<size_t>(slot) + 1, 0);
            ranks[static_cast<size_t>(slot)] = rank;
          }
          act_idx = 0;
          st = St::activation;
        }
        break;
      }

      case St::activation:
        if (collided) protocol_fail("collision during activation");
        own[static_cast<size_t>(cur_arm)].add_sample(outcome);
        ++act_idx;
        if (act_idx == K) enter_epochs();
        break;

      // ---- leader ----
      case St::l_up_open:
        if (!collided) protocol_fail("transfer start signal went unanswered");
        note_wire(WireEvent::upload_start, cur_arm, 1, sched[sched_i].second,
                  -1);
        ++transfer_steps;
        st = St::l_up_sign;
        break;

      case St::l_up_sign:
        recv_neg = collided;
        ++transfer_steps;
        st = St::l_up_mark;
        break;

      case St::l_up_mark:
        ++transfer_steps;
        if (collided) {
          finish_transfer();
        } else {
          st = St::l_up_bit;
        }
        break;

      case St::l_up_bit:
        if (recv_bits.size() > 64) protocol_fail("runaway frame");
        recv_bits.push_back(collided ? 1 : 0);
        ++transfer_steps;
        st = St::l_up_mark;
        break;

      case St::l_as_open:
        if (!collided) protocol_fail("assignment start signal went unanswered");
        note_wire(WireEvent::assign_init, cur_arm, 1, asg_rank, -1);
        if (B > 0) {
          st = St::l_as_bit;
        } else if (++asg_rank <= M) {
          build_assignment();
        } else {
          start_explore();
        }
        break;

      case St::l_as_bit:
        if (asg_bits[asg_i]) {
          if (!collided) protocol_fail("assignment bit lost");
          note_wire(WireEvent::assign_bit, cur_arm, 1, asg_rank, 1);
        }
        ++asg_i;
        if (asg_i == asg_bits.size()) {
          if (++asg_rank <= M) {
            build_assignment();
            st = St::l_as_open;
          } else {
            start_explore();
          }
        }
        break;

      case St::l_explore:
        if (collided) protocol_fail("collision during a clean batch");
        own[static_cast<size_t>(cur_arm)].add_sample(outcome);
        ++explore_i;
        if (explore_i == explore_len) {
          if (M > 1) {
            signal_rank = 2;
            st = St::l_signal;
          } else {
            leader_epoch_end();
          }
        }
        break;

      case St::l_signal:
        if (!collided) protocol_fail("stop signal went unanswered");
        note_wire(WireEvent::stop_signal, cur_arm, 1, signal_rank, -1);
        ++signal_rank;
        if (signal_rank > M) leader_epoch_end();
        break;

      // ---- follower ----
      case St::f_idle:
        if (collided) {
          if (upq_i < upq.size()) {
            follower_begin_upload();
          } else {
            asg_recv_i = 0;
            asg_s1 = 0;
            asg_sm = 0;
            st = St::f_as_bit;
          }
        }
        break;

      case St::f_up_sign:
        if (out.sign < 0) {
          if (!collided) protocol_fail("sign bit lost");
          note_wire(WireEvent::upload_bit, cur_arm, rank, 1, 1);
        }
        st = out.payload.empty() ? St::f_up_end : St::f_up_mark;
        break;

      case St::f_up_mark:
        st = St::f_up_bit;
        break;

      case St::f_up_bit:
        if (out.payload[out_i]) {
          if (!collided) protocol_fail("payload bit lost");
          note_wire(WireEvent::upload_bit, cur_arm, rank, 1, 1);
        }
        ++out_i;
        st = out_i < out.payload.size() ? St::f_up_mark : St::f_up_end;
        break;

      case St::f_up_end:
        if (!collided) protocol_fail("frame terminator lost");
        note_wire(WireEvent::upload_end, cur_arm, rank, 1, -1);
        ++upq_i;
        st = St::f_idle;
        break;

      case St::f_as_bit: {
        int bit = collided ? 1 : 0;
        if (asg_recv_i < B) {
          asg_s1 = (asg_s1 << 1) | bit;
        } else {
          asg_sm = (asg_sm << 1) | bit;
        }
        ++asg_recv_i;
        if (asg_recv_i == 2 * B) {
          if (asg_s1 >= K || asg_sm >= K) protocol_fail("assignment corrupt");
          next_lead_arm = asg_s1;
          expl_arm = asg_sm;
          hold_left = (M - rank) * (1 + 2 * B);
          if (hold_left > 0) {
            st = St::f_hold;
          } else {
            follower_begin_explore();
          }
        }
        break;
      }

      case St::f_hold:
        if (collided) protocol_fail("collision while holding the channel arm");
        --hold_left;
        if (hold_left == 0) follower_begin_explore();
        break;

      case St::f_explore:
        if (!collided) {
          ++clean;
          batch.push_back(outcome);
        } else {
          follower_epoch_end();
        }
        break;

      case St::f_wait:
        if (collided) protocol_fail("collision while waiting out stop signals");
        --wait_left;
        if (wait_left == 0) follower_comm_entry();
        break;
    }
  }

  Phase phase() const {
    switch (st) {
      case St::ortho_pick:
      case St::ortho_cast:
      case St::rank_walk:
        return Phase::orthogonalization;
      case St::activation:
        return Phase::activation;
      case St::l_explore:
      case St::f_explore:
        return Phase::exploration;
      case St::l_signal:
      case St::f_wait:
        return Phase::signaling;
      default:
        return Phase::communication;
    }
  }
};

BeaconAgent::BeaconAgent(int K, int players_hint, const Reward& reward,
                         Oracle* oracle, uint64_t run_seed, int slot,
                         const BeaconHooks& hooks)
    : impl_(std::make_unique<Impl>(K, players_hint, reward, oracle, run_seed,
                                   slot, hooks)) {}

BeaconAgent::~BeaconAgent() = default;

int BeaconAgent::act() { return impl_->act(); }
void BeaconAgent::feedback(double outcome, bool collided) {
  impl_->feedback(outcome, collided);
}
Phase BeaconAgent::phase() const { return impl_->phase(); }

bool BeaconAgent::initialized() const { return impl_->rank >= 1; }
int BeaconAgent::rank() const { return impl_->rank; }
int BeaconAgent::players() const { return impl_->M; }
int64_t BeaconAgent::epoch() const { return impl_->r; }

const ArmRecord& BeaconAgent::own(int k) const {
  return impl_->own[static_cast<size_t>(k)];
}

const MirrorRecord& BeaconAgent::mirror(int k, int m) const {
  if (impl_->rank != 1) throw std::logic_error("mirror is leader state");
  return impl_->mir[impl_->mi(k, m)];
}

BeaconTeam BeaconTeam::make(int K, int M, const Reward& reward, Oracle* oracle,
                            uint64_t run_seed, const BeaconHooks& hooks) {
  BeaconTeam team;
  for (int slot = 0; slot < M; ++slot) {
    team.agents.push_back(std::make_unique<BeaconAgent>(
        K, M, reward, oracle, run_seed, slot, hooks));
    team.raw.push_back(team.agents.back().get());
  }
  return team;
}

const BeaconAgent* BeaconTeam::leader() const {
  for (const auto& a : agents)
    if (a->initialized() && a->rank() == 1) return a.get();
  return nullptr;
}

}  // namespace mpmab
