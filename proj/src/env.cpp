#include "mpmab/env.hpp"

#include <cmath>
#include <stdexcept>

#include "mpmab/rng.hpp"

namespace mpmab {

double dist_mean(const OutcomeDist& d) {
  if (const auto* b = std::get_if<BernoulliDist>(&d)) return b->p;
  const auto& g = std::get<DiscreteDist>(d);
  double m = 0.0;
  for (size_t i = 0; i < g.xs.size(); ++i) m += g.xs[i] * g.ps[i];
  return m;
}

void validate_dist(const OutcomeDist& d) {
  if (const auto* b = std::get_if<BernoulliDist>(&d)) {
    if (!(b->p >= 0.0 && b->p <= 1.0))
      throw std::invalid_argument("bernoulli p outside [0, 1]");
    return;
  }
  const auto& g = std::get<DiscreteDist>(d);
  if (g.xs.empty() || g.xs.size() != g.ps.size())
    throw std::invalid_argument("discrete support/probability size mismatch");
  double tot = 0.0;
  for (size_t i = 0; i < g.xs.size(); ++i) {
    if (!(g.xs[i] >= 0.0 && g.xs[i] <= 1.0))
      throw std::invalid_argument("discrete support point outside [0, 1]");
    if (!(g.ps[i] >= 0.0))
      throw std::invalid_argument("negative probability");
    tot += g.ps[i];
  }
  if (std::abs(tot - 1.0) > 1e-9)
    throw std::invalid_argument("discrete probabilities do not sum to 1");
}

static std::vector<OutcomeDist> bernoulli_all(const UtilityMatrix& mu) {
  std::vector<OutcomeDist> out;
  out.reserve(mu.mu.size());
  for (double p : mu.mu) out.push_back(BernoulliDist{p});
  return out;
}

Env::Env(UtilityMatrix mu, uint64_t seed)
    : Env(std::move(mu), {}, seed) {}

Env::Env(UtilityMatrix mu, std::vector<OutcomeDist> dists, uint64_t seed)
    : mu_(std::move(mu)),
      dists_(dists.empty() ? bernoulli_all(mu_) : std::move(dists)),
      count_(static_cast<size_t>(mu_.K), 0) {
  if (mu_.K <= 0 || mu_.M <= 0 || mu_.M > mu_.K)
    throw std::invalid_argument("need 1 <= players <= arms");
  if (mu_.mu.size() != static_cast<size_t>(mu_.K) * mu_.M)
    throw std::invalid_argument("utility matrix size mismatch");
  if (dists_.size() != mu_.mu.size())
    throw std::invalid_argument("distribution table size mismatch");
  for (size_t i = 0; i < dists_.size(); ++i) {
    validate_dist(dists_[i]);
    if (std::abs(dist_mean(dists_[i]) - mu_.mu[i]) > 1e-12)
      throw std::invalid_argument("distribution mean disagrees with mu");
  }
  eng_.reserve(dists_.size());
  for (int m = 0; m < mu_.M; ++m)
    for (int k = 0; k < mu_.K; ++k)
      eng_.push_back(make_engine(seed, stream_arm, static_cast<uint64_t>(k),
                                 static_cast<uint64_t>(m)));
}

double Env::sample(int k, int m) {
  auto& eng = eng_[static_cast<size_t>(m) * mu_.K + k];
  const OutcomeDist& d = dists_[static_cast<size_t>(m) * mu_.K + k];
  double u = uniform01(eng);
  if (const auto* b = std::get_if<BernoulliDist>(&d))
    return u < b->p ? 1.0 : 0.0;
  const auto& g = std::get<DiscreteDist>(d);
  double acc = 0.0;
  for (size_t i = 0; i < g.xs.size(); ++i) {
    acc += g.ps[i];
    if (u < acc) return g.xs[i];
  }
  return g.xs.back();
}

void Env::step(std::span<const int> arms, std::span<double> outcome,
               std::span<uint8_t> eta) {
  const int M = mu_.M;
  if (static_cast<int>(arms.size()) != M)
    throw std::invalid_argument("arms span has wrong size");
  std::fill(count_.begin(), count_.end(), 0);
  for (int m = 0; m < M; ++m) {
    int k = arms[m];
    if (k < 0 || k >= mu_.K) throw std::invalid_argument("arm out of range");
    ++count_[static_cast<size_t>(k)];
  }
  for (int m = 0; m < M; ++m) {
    double x = sample(arms[m], m);
    bool clean = count_[static_cast<size_t>(arms[m])] == 1;
    eta[m] = clean ? 1 : 0;
    outcome[m] = clean ? x : 0.0;
  }
}

}  // namespace mpmab
