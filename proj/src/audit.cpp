#include "mpmab/audit.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "mpmab/dyadic.hpp"

namespace mpmab {

namespace {

struct StepArms {
  // arms pulled by two or more players at one step
  std::vector<int> shared;
};

StepArms shared_arms(const Trace& tr, size_t i) {
  StepArms out;
  const int* a = tr.arms.data() + static_cast<size_t>(tr.M) * i;
  for (int m = 0; m < tr.M; ++m) {
    int arm = a[m];
    if (std::find(out.shared.begin(), out.shared.end(), arm) != out.shared.end())
      continue;
    int n = 0;
    for (int j = 0; j < tr.M; ++j) n += a[j] == arm;
    if (n >= 2) out.shared.push_back(arm);
  }
  return out;
}

int pullers_of(const Trace& tr, size_t i, int arm) {
  const int* a = tr.arms.data() + static_cast<size_t>(tr.M) * i;
  int n = 0;
  for (int m = 0; m < tr.M; ++m) n += a[m] == arm;
  return n;
}

void check_structure(const Trace& tr, AuditReport& rep) {
  int64_t want_t = 1;
  int furthest = 0;  // 0 = init phases, 1 = activation seen, 2 = epochs
  for (size_t i = 0; i < tr.steps(); ++i) {
    if (tr.t[i] != want_t) {
      rep.fail("step numbering breaks at index " + std::to_string(i));
      return;
    }
    ++want_t;
    const Phase ph = tr.phase[i];
    switch (ph) {
      case Phase::orthogonalization:
        if (furthest > 0)
          rep.fail("orthogonalization step after initialization ended, t=" +
                   std::to_string(tr.t[i]));
        break;
      case Phase::activation:
        if (furthest > 1)
          rep.fail("activation step after epochs began, t=" +
                   std::to_string(tr.t[i]));
        furthest = 1;
        break;
      default:
        furthest = 2;
        break;
    }
    for (int m = 0; m < tr.M; ++m) {
      const size_t off = static_cast<size_t>(tr.M) * i + m;
      const int arm = tr.arms[off];
      if (arm < 0 || arm >= tr.K) {
        rep.fail("arm out of range at t=" + std::to_string(tr.t[i]));
        continue;
      }
      const bool clash = pullers_of(tr, i, arm) >= 2;
      if (clash == (tr.eta[off] != 0))
        rep.fail("collision flag contradicts the joint pulls at t=" +
                 std::to_string(tr.t[i]));
      if (clash && tr.outcomes[off] != 0.0)
        rep.fail("collided pull carries a nonzero outcome at t=" +
                 std::to_string(tr.t[i]));
    }
    if (ph == Phase::activation || ph == Phase::exploration) {
      auto sh = shared_arms(tr, i);
      if (!sh.shared.empty()) {
        (ph == Phase::activation ? rep.activation_collisions
                                 : rep.exploration_collisions)++;
        rep.fail(std::string(phase_name(ph)) + " step has a collision, t=" +
                 std::to_string(tr.t[i]));
      }
    }
  }
}

void check_ledgers(const AuditLog& log, AuditReport& rep) {
  // leader snapshots carry every player's mirrored row; follower snapshots
  // carry that player's own rows for the same epoch boundary
  std::map<int64_t, const LedgerSnapshot*> leader;
  for (const auto& s : log.snapshots)
    if (s.rank == 1) {
      if (!leader.emplace(s.epoch, &s).second)
        rep.fail("two leader snapshots for epoch " + std::to_string(s.epoch));
    }
  rep.epochs_checked = static_cast<int64_t>(leader.size());
  for (const auto& s : log.snapshots) {
    if (s.rank == 1) continue;
    auto it = leader.find(s.epoch);
    if (it == leader.end()) continue;  // run ended before the leader's boundary
    const LedgerSnapshot& ls = *it->second;
    for (const LedgerRow& row : s.rows) {
      const LedgerRow* mine = nullptr;
      for (const LedgerRow& lr : ls.rows)
        if (lr.k == row.k && lr.m == s.rank) {
          mine = &lr;
          break;
        }
      if (!mine) {
        rep.fail("leader holds no mirror row for arm " + std::to_string(row.k) +
                 ", rank " + std::to_string(s.rank));
        continue;
      }
      if (mine->kept != row.kept || mine->p != row.p ||
          mine->tilde.num != row.tilde.num ||
          mine->tilde.frac_bits != row.tilde.frac_bits)
        rep.fail("mirror drift at epoch " + std::to_string(s.epoch) + ", arm " +
                 std::to_string(row.k) + ", rank " + std::to_string(s.rank));
    }
  }
}

void check_attribution(const Trace& tr, const AuditLog& log, AuditReport& rep) {
  std::map<int64_t, const WireRecord*> events;
  for (const auto& w : log.wire)
    if (!events.emplace(w.t, &w).second)
      rep.fail("two protocol events at t=" + std::to_string(w.t));
  for (size_t i = 0; i < tr.steps(); ++i) {
    const Phase ph = tr.phase[i];
    if (ph != Phase::communication && ph != Phase::signaling) continue;
    auto sh = shared_arms(tr, i);
    auto it = events.find(tr.t[i]);
    if (sh.shared.empty()) {
      if (it != events.end())
        rep.fail("recorded event without a collision at t=" +
                 std::to_string(tr.t[i]));
      continue;
    }
    if (sh.shared.size() > 1) {
      rep.fail("simultaneous collisions on different arms at t=" +
               std::to_string(tr.t[i]));
      continue;
    }
    if (it == events.end()) {
      rep.fail("unattributed collision at t=" + std::to_string(tr.t[i]));
      continue;
    }
    if (it->second->arm != sh.shared[0]) {
      rep.fail("event arm disagrees with the collision at t=" +
               std::to_string(tr.t[i]));
      continue;
    }
    if (pullers_of(tr, i, sh.shared[0]) != 2) {
      rep.fail("more than two players in a forced collision at t=" +
               std::to_string(tr.t[i]));
      continue;
    }
    ++rep.collisions_attributed;
  }
}

void check_handoffs(const Trace& tr, const AuditLog& log, AuditReport& rep) {
  if (log.rank_of_slot.empty()) return;
  const int M = tr.M;
  std::vector<int> slot_of_rank(static_cast<size_t>(M) + 1, -1);
  for (size_t s = 0; s < log.rank_of_slot.size(); ++s) {
    int rk = log.rank_of_slot[s];
    if (rk < 1 || rk > M || slot_of_rank[static_cast<size_t>(rk)] != -1) {
      rep.fail("learned ranks are not a permutation");
      return;
    }
    slot_of_rank[static_cast<size_t>(rk)] = static_cast<int>(s);
  }
  // retained samples per (arm, rank): clean pulls on activation and
  // exploration steps, in order; batch overruns land on signaling steps and
  // stay out by construction
  std::vector<std::vector<double>> kept(static_cast<size_t>(tr.K) * M);
  for (size_t i = 0; i < tr.steps(); ++i) {
    const Phase ph = tr.phase[i];
    if (ph != Phase::activation && ph != Phase::exploration) continue;
    for (int rk = 1; rk <= M; ++rk) {
      const size_t off =
          static_cast<size_t>(M) * i + slot_of_rank[static_cast<size_t>(rk)];
      if (!tr.eta[off]) continue;
      kept[static_cast<size_t>(rk - 1) * tr.K + tr.arms[off]].push_back(
          tr.outcomes[off]);
    }
  }
  for (const UploadNote& u : log.uploads) {
    const auto& xs = kept[static_cast<size_t>(u.m - 1) * tr.K + u.k];
    const int64_t n = int64_t{1} << u.p;
    if (static_cast<int64_t>(xs.size()) < n) {
      rep.fail("hand-off claims more samples than the trace holds, arm " +
               std::to_string(u.k) + ", rank " + std::to_string(u.m));
      continue;
    }
    double sum = 0.0;
    for (int64_t i = 0; i < n; ++i) sum += xs[static_cast<size_t>(i)];
    const double mean = std::ldexp(sum, -u.p);
    if (mean != u.hat) {
      rep.fail("recorded raw mean disagrees with the trace, arm " +
               std::to_string(u.k) + ", rank " + std::to_string(u.m));
      continue;
    }
    const Dyadic q = quantize_ceil(mean, u.tilde.frac_bits);
    if (q.num != u.tilde.num) {
      rep.fail("quantized hand-off disagrees with its raw mean, arm " +
               std::to_string(u.k) + ", rank " + std::to_string(u.m));
      continue;
    }
    ++rep.means_checked;
  }
}

void json_string(std::ostream& os, const std::string& s) {
  os << '"';
  for (char c : s) {
    if (c == '"' || c == '\\') os << '\\';
    os << c;
  }
  os << '"';
}

}  // namespace

AuditReport audit_run(const Trace& trace, const AuditLog& log) {
  AuditReport rep;
  check_structure(trace, rep);
  check_ledgers(log, rep);
  check_attribution(trace, log, rep);
  check_handoffs(trace, log, rep);
  return rep;
}

AuditReport audit_trace(const Trace& trace) {
  AuditReport rep;
  check_structure(trace, rep);
  return rep;
}

std::string audit_report_json(const AuditReport& r) {
  std::ostringstream os;
  os << "{\n  \"ok\": " << (r.ok ? "true" : "false")
     << ",\n  \"epochs_checked\": " << r.epochs_checked
     << ",\n  \"collisions_attributed\": " << r.collisions_attributed
     << ",\n  \"exploration_collisions\": " << r.exploration_collisions
     << ",\n  \"activation_collisions\": " << r.activation_collisions
     << ",\n  \"means_checked\": " << r.means_checked << ",\n  \"violations\": [";
  for (size_t i = 0; i < r.violations.size(); ++i) {
    os << (i ? ", " : "");
    json_string(os, r.violations[i]);
  }
  os << "]\n}\n";
  return os.str();
}

}  // namespace mpmab
