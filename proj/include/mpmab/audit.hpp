#pragma once

#include <string>
#include <vector>

#include "mpmab/beacon.hpp"
#include "mpmab/trace.hpp"

namespace mpmab {

struct AuditReport {
  bool ok = true;
  std::vector<std::string> violations;  // empty when ok
  int64_t epochs_checked = 0;       // boundaries where ledgers were compared
  int64_t collisions_attributed = 0;
  int64_t exploration_collisions = 0;
  int64_t activation_collisions = 0;
  int64_t means_checked = 0;        // quantized hand-offs recomputed from raw pulls

  void fail(std::string v) {
    ok = false;
    if (violations.size() < 64) violations.push_back(std::move(v));
  }
};

// full protocol audit of one finished run:
//  - the leader's mirrored statistics equal each player's own ledger at every
//    epoch boundary (counts, exponents and quantized means, bit for bit)
//  - every collision during communication or signaling steps matches exactly
//    one recorded protocol event, and every recorded event produced one
//  - activation and batch exploration steps are collision free
//  - every quantized mean hand-off equals the quantization of the mean of
//    exactly the first 2^p retained samples, recomputed from the raw trace
AuditReport audit_run(const Trace& trace, const AuditLog& log);

// structural checks that need no protocol bookkeeping: step numbering, phase
// ordering, collision flags consistent with the joint pulls, zeroed collided
// outcomes, clean activation/exploration steps
AuditReport audit_trace(const Trace& trace);

std::string audit_report_json(const AuditReport& r);

}  // namespace mpmab
