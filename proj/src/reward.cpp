#include "mpmab/reward.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mpmab/rng.hpp"

namespace mpmab {

std::string_view reward_name(RewardKind k) {
  switch (k) {
    case RewardKind::linear: return "linear";
    case RewardKind::proportional_fairness: return "proportional_fairness";
    case RewardKind::minimal: return "minimal";
    case RewardKind::threshold: return "threshold";
    case RewardKind::video_quality: return "video_quality";
    case RewardKind::top_l: return "top_l";
    case RewardKind::max_min: return "max_min";
  }
  return "?";
}

RewardKind reward_from_name(std::string_view s) {
  for (RewardKind k :
       {RewardKind::linear, RewardKind::proportional_fairness,
        RewardKind::minimal, RewardKind::threshold, RewardKind::video_quality,
        RewardKind::top_l, RewardKind::max_min})
    if (s == reward_name(k)) return k;
  throw std::invalid_argument("unknown reward kind: " + std::string(s));
}

void PiecewiseLinear::validate() const {
  if (x.size() < 2 || x.size() != y.size())
    throw std::invalid_argument("utility needs >= 2 breakpoints");
  if (x.front() != 0.0 || x.back() != 1.0)
    throw std::invalid_argument("utility breakpoints must span [0, 1]");
  double prev_slope = std::numeric_limits<double>::infinity();
  for (size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1]))
      throw std::invalid_argument("utility breakpoints must increase");
    double slope = (y[i] - y[i - 1]) / (x[i] - x[i - 1]);
    if (slope > prev_slope + 1e-12)
      throw std::invalid_argument("utility must be concave");
    prev_slope = slope;
  }
}

double PiecewiseLinear::operator()(double v) const {
  v = std::clamp(v, 0.0, 1.0);
  size_t i = 1;
  while (i + 1 < x.size() && v > x[i]) ++i;
  double w = (v - x[i - 1]) / (x[i] - x[i - 1]);
  return y[i - 1] + w * (y[i] - y[i - 1]);
}

Reward Reward::linear(int M) { return Reward(RewardKind::linear, M); }

Reward Reward::proportional_fairness(std::vector<double> weights,
                                     double epsilon) {
  if (weights.empty()) throw std::invalid_argument("weights empty");
  for (double w : weights)
    if (!(w > 0.0)) throw std::invalid_argument("weights must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  Reward r(RewardKind::proportional_fairness, static_cast<int>(weights.size()));
  r.weights_ = std::move(weights);
  r.epsilon_ = epsilon;
  return r;
}

Reward Reward::minimal(int M) { return Reward(RewardKind::minimal, M); }

Reward Reward::threshold(std::vector<double> phis) {
  if (phis.empty()) throw std::invalid_argument("thresholds empty");
  for (double p : phis)
    if (!(p > 0.0 && p <= 1.0))
      throw std::invalid_argument("thresholds must lie in (0, 1]");
  Reward r(RewardKind::threshold, static_cast<int>(phis.size()));
  r.phis_ = std::move(phis);
  return r;
}

Reward Reward::video_quality(std::vector<PiecewiseLinear> utils) {
  if (utils.empty()) throw std::invalid_argument("utilities empty");
  for (const auto& u : utils) u.validate();
  Reward r(RewardKind::video_quality, static_cast<int>(utils.size()));
  r.utils_ = std::move(utils);
  return r;
}

Reward Reward::top_l(int M, int L) {
  if (L < 1 || L > M) throw std::invalid_argument("need 1 <= L <= players");
  Reward r(RewardKind::top_l, M);
  r.L_ = L;
  return r;
}

Reward Reward::max_min(int M) { return Reward(RewardKind::max_min, M); }

double Reward::instantaneous(std::span<const double> o) const {
  switch (kind_) {
    case RewardKind::linear: {
      double s = 0.0;
      for (double v : o) s += v;
      return s;
    }
    case RewardKind::proportional_fairness: {
      double s = 0.0;
      for (int m = 0; m < M_; ++m)
        s += weights_[static_cast<size_t>(m)] * std::log(epsilon_ + o[m]);
      return s;
    }
    case RewardKind::minimal: {
      double s = o[0];
      for (double v : o) s = std::min(s, v);
      return s;
    }
    case RewardKind::threshold: {
      double s = 0.0;
      for (int m = 0; m < M_; ++m)
        if (o[m] >= phis_[static_cast<size_t>(m)]) s += 1.0;
      return s;
    }
    case RewardKind::video_quality: {
      double s = 0.0;
      for (int m = 0; m < M_; ++m) s += utils_[static_cast<size_t>(m)](o[m]);
      return s;
    }
    case RewardKind::top_l: {
      // sum of the L largest outcomes
      std::vector<double> v(o.begin(), o.end());
      std::nth_element(v.begin(), v.begin() + (L_ - 1), v.end(),
                       std::greater<double>());
      double s = 0.0;
      for (int i = 0; i < L_; ++i) s += v[static_cast<size_t>(i)];
      return s;
    }
    case RewardKind::max_min:
      throw std::logic_error(
          "max_min has no per-step sample form; use expected values");
  }
  return 0.0;
}

double Reward::bernoulli_value(std::span<const double> means) const {
  auto clip = [](double p) { return std::clamp(p, 0.0, 1.0); };
  switch (kind_) {
    case RewardKind::linear: {
      double s = 0.0;
      for (double p : means) s += clip(p);
      return s;
    }
    case RewardKind::proportional_fairness: {
      // E[w ln(eps + O)] = w (p ln(eps + 1) + (1 - p) ln(eps))
      double s = 0.0, hi = std::log(epsilon_ + 1.0), lo = std::log(epsilon_);
      for (int m = 0; m < M_; ++m) {
        double p = clip(means[m]);
        s += weights_[static_cast<size_t>(m)] * (p * hi + (1.0 - p) * lo);
      }
      return s;
    }
    case RewardKind::minimal: {
      // min over 0/1 outcomes is 1 iff all are 1
      double s = 1.0;
      for (double p : means) s *= clip(p);
      return s;
    }
    case RewardKind::threshold: {
      // phi in (0, 1]: only outcome 1 clears it
      double s = 0.0;
      for (double p : means) s += clip(p);
      return s;
    }
    case RewardKind::video_quality: {
      double s = 0.0;
      for (int m = 0; m < M_; ++m) {
        double p = clip(means[m]);
        const auto& u = utils_[static_cast<size_t>(m)];
        s += p * u.y.back() + (1.0 - p) * u.y.front();
      }
      return s;
    }
    case RewardKind::top_l: {
      // top-L sum of 0/1 outcomes = min(#ones, L); #ones is poisson binomial
      std::vector<double> pmf(static_cast<size_t>(M_) + 1, 0.0);
      pmf[0] = 1.0;
      for (int m = 0; m < M_; ++m) {
        double p = clip(means[m]);
        for (int j = m + 1; j >= 1; --j)
          pmf[static_cast<size_t>(j)] =
              pmf[static_cast<size_t>(j)] * (1.0 - p) +
              pmf[static_cast<size_t>(j - 1)] * p;
        pmf[0] *= (1.0 - p);
      }
      double s = 0.0;
      for (int j = 1; j <= M_; ++j)
        s += std::min(j, L_) * pmf[static_cast<size_t>(j)];
      return s;
    }
    case RewardKind::max_min: {
      double s = means[0];
      for (double p : means) s = std::min(s, p);
      return clip(s);
    }
  }
  return 0.0;
}

double Reward::score_value(std::span<const double> scores) const {
  switch (kind_) {
    case RewardKind::linear: {
      double s = 0.0;
      for (double v : scores) s += v;
      return s;
    }
    case RewardKind::max_min: {
      double s = scores[0];
      for (double v : scores) s = std::min(s, v);
      return s;
    }
    default:
      return bernoulli_value(scores);
  }
}

std::optional<double> Reward::lipschitz() const {
  switch (kind_) {
    case RewardKind::linear: return static_cast<double>(M_);
    case RewardKind::max_min: return 1.0;
    default: return std::nullopt;
  }
}

namespace {

// support of one player's outcome law under the collision mask
struct Support {
  std::vector<double> xs;
  std::vector<double> ps;
};

Support masked_support(const OutcomeDist& d, bool clean) {
  if (!clean) return {{0.0}, {1.0}};
  if (const auto* b = std::get_if<BernoulliDist>(&d)) {
    if (b->p <= 0.0) return {{0.0}, {1.0}};
    if (b->p >= 1.0) return {{1.0}, {1.0}};
    return {{0.0, 1.0}, {1.0 - b->p, b->p}};
  }
  const auto& g = std::get<DiscreteDist>(d);
  return {g.xs, g.ps};
}

}  // namespace

double expected_reward(const Reward& r, std::span<const double> mu_s,
                       std::span<const uint8_t> eta,
                       std::span<const OutcomeDist> dists) {
  const int M = r.players();
  if (static_cast<int>(mu_s.size()) != M ||
      static_cast<int>(eta.size()) != M ||
      static_cast<int>(dists.size()) != M)
    throw std::invalid_argument("expected_reward span size mismatch");

  // linear and max_min depend on the outcome laws through their means only
  if (r.kind() == RewardKind::linear || r.kind() == RewardKind::max_min) {
    std::vector<double> masked(static_cast<size_t>(M));
    for (int m = 0; m < M; ++m)
      masked[static_cast<size_t>(m)] = eta[m] ? mu_s[m] : 0.0;
    if (r.kind() == RewardKind::linear) {
      double s = 0.0;
      for (double v : masked) s += v;
      return s;
    }
    double s = masked[0];
    for (double v : masked) s = std::min(s, v);
    return s;
  }

  std::vector<Support> sup;
  sup.reserve(static_cast<size_t>(M));
  double combos = 1.0;
  for (int m = 0; m < M; ++m) {
    sup.push_back(masked_support(dists[m], eta[m] != 0));
    combos *= static_cast<double>(sup.back().xs.size());
  }
  if (combos > static_cast<double>(1 << 20))
    throw std::invalid_argument(
        "joint support too large to enumerate; use mc_expected_reward");

  std::vector<double> outcome(static_cast<size_t>(M), 0.0);
  double total = 0.0;
  // odometer walk over the joint support
  std::vector<size_t> idx(static_cast<size_t>(M), 0);
  for (;;) {
    double pr = 1.0;
    for (int m = 0; m < M; ++m) {
      const auto& s = sup[static_cast<size_t>(m)];
      outcome[static_cast<size_t>(m)] = s.xs[idx[static_cast<size_t>(m)]];
      pr *= s.ps[idx[static_cast<size_t>(m)]];
    }
    if (pr > 0.0) total += pr * r.instantaneous(outcome);
    int m = M - 1;
    while (m >= 0 && ++idx[static_cast<size_t>(m)] ==
                         sup[static_cast<size_t>(m)].xs.size()) {
      idx[static_cast<size_t>(m)] = 0;
      --m;
    }
    if (m < 0) break;
  }
  return total;
}

McEstimate mc_expected_reward(const Reward& r, std::span<const double> mu_s,
                              std::span<const uint8_t> eta,
                              std::span<const OutcomeDist> dists,
                              int64_t samples, uint64_t seed) {
  const int M = r.players();
  if (samples <= 1) throw std::invalid_argument("need >= 2 samples");
  auto eng = make_engine(seed, stream_mc);
  std::vector<double> outcome(static_cast<size_t>(M));
  // Welford keeps the running mean exact when every draw has the same value,
  // which happens for rewards evaluated straight from the means
  double mean = 0.0, m2 = 0.0;
  for (int64_t n = 0; n < samples; ++n) {
    for (int m = 0; m < M; ++m) {
      double x = 0.0;
      if (eta[m]) {
        double u = uniform01(eng);
        if (const auto* b = std::get_if<BernoulliDist>(&dists[m])) {
          x = u < b->p ? 1.0 : 0.0;
        } else {
          const auto& g = std::get<DiscreteDist>(dists[m]);
          double c = 0.0;
          x = g.xs.back();
          for (size_t i = 0; i < g.xs.size(); ++i) {
            c += g.ps[i];
            if (u < c) {
              x = g.xs[i];
              break;
            }
          }
        }
      }
      outcome[static_cast<size_t>(m)] = x;
    }
    // max_min draws carry no information, its value is a function of means
    double v = r.has_instantaneous()
                   ? r.instantaneous(outcome)
                   : expected_reward(r, mu_s, eta, dists);
    const double d = v - mean;
    mean += d / static_cast<double>(n + 1);
    m2 += d * (v - mean);
  }
  const double var = m2 / static_cast<double>(samples - 1);
  return {mean, std::sqrt(var / static_cast<double>(samples))};
}

bool check_monotone(const std::function<double(std::span<const double>)>& value,
                    int M, int trials, uint64_t seed, std::string* why) {
  auto eng = make_engine(seed, stream_mc, 0x9d);
  std::vector<double> lo(static_cast<size_t>(M)), hi(static_cast<size_t>(M));
  for (int t = 0; t < trials; ++t) {
    for (int m = 0; m < M; ++m) {
      double a = uniform01(eng);
      lo[static_cast<size_t>(m)] = a;
      hi[static_cast<size_t>(m)] = a + (1.0 - a) * uniform01(eng);
    }
    if (value(hi) < value(lo) - 1e-12) {
      if (why) {
        *why = "value decreased on an ordered pair (trial " +
               std::to_string(t) + ")";
      }
      return false;
    }
  }
  return true;
}

}  // namespace mpmab
