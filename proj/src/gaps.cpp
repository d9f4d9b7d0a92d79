#include "mpmab/gaps.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mpmab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

GapStats gap_stats(const UtilityMatrix& mu, const Reward& reward,
                   std::span<const OutcomeDist> dists) {
  const int K = mu.K, M = mu.M;
  if (reward.players() != M)
    throw std::invalid_argument("reward player count mismatch");
  double perms = 1.0;
  for (int i = 0; i < M; ++i) perms *= static_cast<double>(K - i);
  if (perms > 1e7)
    throw std::invalid_argument("too many matchings to enumerate");

  std::vector<uint8_t> ones(static_cast<size_t>(M), 1);
  std::vector<double> mu_s(static_cast<size_t>(M));
  std::vector<OutcomeDist> dist_s(static_cast<size_t>(M), BernoulliDist{0.0});
  auto value_of = [&](const std::vector<int>& arms) {
    for (int m = 0; m < M; ++m) {
      mu_s[static_cast<size_t>(m)] = mu.at(arms[static_cast<size_t>(m)], m);
      dist_s[static_cast<size_t>(m)] =
          dists[static_cast<size_t>(m) * K + arms[static_cast<size_t>(m)]];
    }
    return expected_reward(reward, mu_s, ones, dist_s);
  };

  GapStats g;
  g.best_value = -kInf;
  g.pair_min.assign(static_cast<size_t>(K) * M, kInf);
  g.pair_max.assign(static_cast<size_t>(K) * M, -kInf);
  g.min_gap = kInf;
  g.max_gap = -kInf;

  std::vector<int> arms(static_cast<size_t>(M), -1);
  std::vector<char> used(static_cast<size_t>(K), 0);

  auto walk = [&](auto&& self, int m, auto&& leaf) -> void {
    if (m == M) {
      leaf();
      return;
    }
    for (int k = 0; k < K; ++k) {
      if (used[static_cast<size_t>(k)]) continue;
      used[static_cast<size_t>(k)] = 1;
      arms[static_cast<size_t>(m)] = k;
      self(self, m + 1, leaf);
      used[static_cast<size_t>(k)] = 0;
    }
  };

  walk(walk, 0, [&] {
    ++g.matchings;
    double v = value_of(arms);
    if (v > g.best_value) {
      g.best_value = v;
      g.best_arms = arms;
    }
  });

  walk(walk, 0, [&] {
    double v = value_of(arms);
    if (v >= g.best_value) return;  // skip co-optimal matchings
    ++g.suboptimal;
    double gap = g.best_value - v;
    g.min_gap = std::min(g.min_gap, gap);
    g.max_gap = std::max(g.max_gap, gap);
    for (int m = 0; m < M; ++m) {
      size_t i = static_cast<size_t>(m) * K + arms[static_cast<size_t>(m)];
      g.pair_min[i] = std::min(g.pair_min[i], gap);
      g.pair_max[i] = std::max(g.pair_max[i], gap);
    }
  });

  return g;
}

namespace {

void emit_gap(std::ostringstream& os, double v) {
  if (v == kInf) {
    os << "\"inf\"";
  } else if (v == -kInf) {
    os << "\"-inf\"";
  } else {
    char buf[32];
    snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  }
}

}  // namespace

std::string gap_stats_json(const GapStats& g, int K, int M) {
  std::ostringstream os;
  os << "{\n  \"best_value\": ";
  emit_gap(os, g.best_value);
  os << ",\n  \"best_arms\": [";
  for (int m = 0; m < M; ++m) {
    if (m) os << ", ";
    os << g.best_arms[static_cast<size_t>(m)] + 1;  // 1-indexed
  }
  os << "],\n  \"min_gap\": ";
  emit_gap(os, g.min_gap);
  os << ",\n  \"max_gap\": ";
  emit_gap(os, g.max_gap);
  os << ",\n  \"matchings\": " << g.matchings
     << ",\n  \"suboptimal\": " << g.suboptimal << ",\n  \"pairs\": [\n";
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      size_t i = static_cast<size_t>(m) * K + k;
      os << "    {\"arm\": " << k + 1 << ", \"player\": " << m + 1
         << ", \"gap_min\": ";
      emit_gap(os, g.pair_min[i]);
      os << ", \"gap_max\": ";
      emit_gap(os, g.pair_max[i]);
      os << "}";
      if (m + 1 < M || k + 1 < K) os << ",";
      os << "\n";
    }
  }
  os << "  ]\n}\n";
  return os.str();
}

}  // namespace mpmab
