#include "mpmab/trace.hpp"

#include <cstring>
#include <ostream>
#include <istream>
#include <stdexcept>

namespace mpmab {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::orthogonalization: return "orthogonalization";
    case Phase::activation: return "activation";
    case Phase::communication: return "communication";
    case Phase::exploration: return "exploration";
    case Phase::signaling: return "signaling";
  }
  return "?";
}

Phase phase_from_name(std::string_view s) {
  for (Phase p : {Phase::orthogonalization, Phase::activation,
                  Phase::communication, Phase::exploration, Phase::signaling})
    if (s == phase_name(p)) return p;
  throw std::invalid_argument("unknown phase name");
}

void Trace::on_step(const StepView& s) {
  if (M == 0) {
    M = static_cast<int>(s.arms.size());
    K = s.arm_count;
  }
  t.push_back(s.t);
  phase.push_back(s.phase);
  arms.insert(arms.end(), s.arms.begin(), s.arms.end());
  outcomes.insert(outcomes.end(), s.outcomes.begin(), s.outcomes.end());
  eta.insert(eta.end(), s.eta.begin(), s.eta.end());
  realized.push_back(s.realized_reward);
  expected.push_back(s.expected_reward);
}

int Trace::collisions_at(size_t i) const {
  int c = 0;
  for (int m = 0; m < M; ++m)
    if (eta[i * M + m] == 0) ++c;
  return c;
}

void write_csv(const Trace& tr, std::ostream& os) {
  os << "t,phase,arms,collisions,realized_reward,expected_reward\n";
  char buf[64];
  for (size_t i = 0; i < tr.steps(); ++i) {
    os << tr.t[i] << ',' << phase_name(tr.phase[i]) << ',';
    for (int m = 0; m < tr.M; ++m) {
      if (m) os << ';';
      os << tr.arms[i * tr.M + m] + 1;  // 1-indexed on the wire
    }
    os << ',' << tr.collisions_at(i) << ',';
    snprintf(buf, sizeof buf, "%.17g,%.17g", tr.realized[i], tr.expected[i]);
    os << buf << '\n';
  }
}

namespace {

constexpr char kMagic[4] = {'M', 'A', 'B', 'T'};
constexpr uint32_t kVersion = 1;

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <class T>
void get(std::istream& is, T& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  if (!is) throw std::runtime_error("truncated trace file");
}

}  // namespace

void write_binary(const Trace& tr, std::ostream& os) {
  os.write(kMagic, 4);
  put(os, kVersion);
  put(os, static_cast<uint32_t>(tr.K));
  put(os, static_cast<uint32_t>(tr.M));
  put(os, static_cast<uint64_t>(tr.steps()));
  for (size_t i = 0; i < tr.steps(); ++i) {
    put(os, tr.t[i]);
    put(os, static_cast<uint8_t>(tr.phase[i]));
    for (int m = 0; m < tr.M; ++m)
      put(os, static_cast<int16_t>(tr.arms[i * tr.M + m]));
    for (int m = 0; m < tr.M; ++m) put(os, tr.eta[i * tr.M + m]);
    for (int m = 0; m < tr.M; ++m) put(os, tr.outcomes[i * tr.M + m]);
    put(os, tr.realized[i]);
    put(os, tr.expected[i]);
  }
}

Trace read_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("not a trace file");
  uint32_t ver, k32, m32;
  uint64_t n;
  get(is, ver);
  if (ver != kVersion) throw std::runtime_error("unsupported trace version");
  get(is, k32);
  get(is, m32);
  get(is, n);
  Trace tr;
  tr.K = static_cast<int>(k32);
  tr.M = static_cast<int>(m32);
  for (uint64_t i = 0; i < n; ++i) {
    int64_t t;
    uint8_t ph;
    get(is, t);
    get(is, ph);
    if (ph > static_cast<uint8_t>(Phase::signaling))
      throw std::runtime_error("bad phase tag");
    tr.t.push_back(t);
    tr.phase.push_back(static_cast<Phase>(ph));
    for (int m = 0; m < tr.M; ++m) {
      int16_t a;
      get(is, a);
      tr.arms.push_back(a);
    }
    for (int m = 0; m < tr.M; ++m) {
      uint8_t e;
      get(is, e);
      tr.eta.push_back(e);
    }
    for (int m = 0; m < tr.M; ++m) {
      double o;
      get(is, o);
      tr.outcomes.push_back(o);
    }
    double r, e;
    get(is, r);
    get(is, e);
    tr.realized.push_back(r);
    tr.expected.push_back(e);
  }
  return tr;
}

}  // namespace mpmab
