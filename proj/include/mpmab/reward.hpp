#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mpmab/env.hpp"

namespace mpmab {

enum class RewardKind {
  linear,
  proportional_fairness,
  minimal,
  threshold,
  video_quality,
  top_l,
  max_min,
};

std::string_view reward_name(RewardKind k);
RewardKind reward_from_name(std::string_view s);

// concave piecewise-linear utility on [0, 1], given as breakpoints
struct PiecewiseLinear {
  std::vector<double> x;
  std::vector<double> y;

  void validate() const;  // throws std::invalid_argument
  double operator()(double v) const;
};

// system reward function over the M per-player outcomes of one step
class Reward {
 public:
  static Reward linear(int M);
  static Reward proportional_fairness(std::vector<double> weights, double epsilon);
  static Reward minimal(int M);
  static Reward threshold(std::vector<double> phis);  // phi in (0, 1]
  static Reward video_quality(std::vector<PiecewiseLinear> utils);
  static Reward top_l(int M, int L);
  static Reward max_min(int M);

  RewardKind kind() const { return kind_; }
  int players() const { return M_; }

  // max_min is defined on expected utilities only; it has no per-step sample
  // form, so traces record its expected value in both reward columns
  bool has_instantaneous() const { return kind_ != RewardKind::max_min; }
  double instantaneous(std::span<const double> outcomes) const;

  // exact expected reward when outcomes are independent Bernoullis with the
  // given means; means are clamped into [0, 1] so optimistic estimates above
  // one saturate instead of leaving the probability simplex
  double bernoulli_value(std::span<const double> means) const;

  // score used to rank matchings given a matrix of per-pair estimates; linear
  // and max_min rank on the raw scores (keeps solver cross-checks exact), the
  // rest rank on bernoulli_value
  double score_value(std::span<const double> scores) const;

  // smoothness bound |v(a) - v(b)| <= B * max_m |a_m - b_m| where one is known
  std::optional<double> lipschitz() const;
  // threshold rewards jump at the thresholds, no such bound exists
  bool discontinuous_in_means() const { return kind_ == RewardKind::threshold; }

  double epsilon() const { return epsilon_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& phis() const { return phis_; }
  const std::vector<PiecewiseLinear>& utilities() const { return utils_; }
  int top() const { return L_; }

 private:
  Reward(RewardKind k, int M) : kind_(k), M_(M) {}

  RewardKind kind_;
  int M_;
  std::vector<double> weights_;
  double epsilon_ = 0.0;
  std::vector<double> phis_;
  std::vector<PiecewiseLinear> utils_;
  int L_ = 0;
};

// exact expected reward of a joint pull: collided players contribute a point
// mass at zero, everyone else their outcome law; linear and max_min reduce to
// closed forms, the rest enumerate the joint support (guarded, throws
// std::invalid_argument when the product of support sizes exceeds 2^20)
double expected_reward(const Reward& r, std::span<const double> mu_s,
                       std::span<const uint8_t> eta,
                       std::span<const OutcomeDist> dists);

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// plain monte carlo estimate of the same expectation, for cross-checks and for
// joint supports too large to enumerate
McEstimate mc_expected_reward(const Reward& r, std::span<const double> mu_s,
                              std::span<const uint8_t> eta,
                              std::span<const OutcomeDist> dists,
                              int64_t samples, uint64_t seed);

// samples coordinatewise ordered mean vectors and verifies the value never
// decreases; returns false with the witness pair reported through `why`
bool check_monotone(const std::function<double(std::span<const double>)>& value,
                    int M, int trials, uint64_t seed, std::string* why = nullptr);

}  // namespace mpmab
