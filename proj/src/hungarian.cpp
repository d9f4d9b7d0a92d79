#include "mpmab/hungarian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace mpmab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Kuhn-Munkres with potentials on the negated scores (minimization); assigns
// every row, M <= K; O(M^2 K); fills row_of[col] (-1 = free) and, when asked,
// the final potentials for tightness tests
double solve_min(int M, int K, std::span<const double> cost,
                 std::vector<int>& row_of, std::vector<double>* u_out,
                 std::vector<double>* v_out) {
  std::vector<double> u(static_cast<size_t>(M) + 1, 0.0);
  std::vector<double> v(static_cast<size_t>(K) + 1, 0.0);
  std::vector<int> p(static_cast<size_t>(K) + 1, 0);
  std::vector<int> way(static_cast<size_t>(K) + 1, 0);
  std::vector<double> minv(static_cast<size_t>(K) + 1);
  std::vector<char> used(static_cast<size_t>(K) + 1);

  for (int i = 1; i <= M; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[static_cast<size_t>(j0)] = 1;
      int i0 = p[static_cast<size_t>(j0)];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= K; ++j) {
        if (used[static_cast<size_t>(j)]) continue;
        double cur = cost[static_cast<size_t>(i0 - 1) * K + (j - 1)] -
                     u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
        if (cur < minv[static_cast<size_t>(j)]) {
          minv[static_cast<size_t>(j)] = cur;
          way[static_cast<size_t>(j)] = j0;
        }
        if (minv[static_cast<size_t>(j)] < delta) {
          delta = minv[static_cast<size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= K; ++j) {
        if (used[static_cast<size_t>(j)]) {
          u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
          v[static_cast<size_t>(j)] -= delta;
        } else {
          minv[static_cast<size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<size_t>(j0)] != 0);
    do {
      int j1 = way[static_cast<size_t>(j0)];
      p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
      j0 = j1;
    } while (j0);
  }

  row_of.assign(static_cast<size_t>(K), -1);
  double total = 0.0;
  for (int j = 1; j <= K; ++j) {
    int i = p[static_cast<size_t>(j)];
    if (i > 0) {
      row_of[static_cast<size_t>(j - 1)] = i - 1;
      total += cost[static_cast<size_t>(i - 1) * K + (j - 1)];
    }
  }
  if (u_out) *u_out = std::move(u);
  if (v_out) *v_out = std::move(v);
  return total;
}

void check_dims(int M, int K, std::span<const double> scores) {
  if (M < 1 || K < M) throw std::invalid_argument("need 1 <= players <= arms");
  if (scores.size() != static_cast<size_t>(M) * K)
    throw std::invalid_argument("score matrix size mismatch");
  for (double s : scores)
    if (!std::isfinite(s)) throw std::invalid_argument("non-finite score");
}

// optimal value over players `rows` (subset, in order) and arms not in `used`
double sub_value(int K, std::span<const double> neg,
                 const std::vector<int>& rows, const std::vector<char>& used) {
  int m = static_cast<int>(rows.size());
  std::vector<int> cols;
  cols.reserve(static_cast<size_t>(K));
  for (int k = 0; k < K; ++k)
    if (!used[static_cast<size_t>(k)]) cols.push_back(k);
  int kk = static_cast<int>(cols.size());
  std::vector<double> sub(static_cast<size_t>(m) * kk);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < kk; ++j)
      sub[static_cast<size_t>(i) * kk + j] =
          neg[static_cast<size_t>(rows[static_cast<size_t>(i)]) * K +
              cols[static_cast<size_t>(j)]];
  std::vector<int> row_of;
  return solve_min(m, kk, sub, row_of, nullptr, nullptr);
}

}  // namespace

double hungarian_value(int M, int K, std::span<const double> scores) {
  check_dims(M, K, scores);
  std::vector<double> neg(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) neg[i] = -scores[i];
  std::vector<int> row_of;
  return -solve_min(M, K, neg, row_of, nullptr, nullptr);
}

AssignmentResult hungarian_argmax(int M, int K, std::span<const double> scores) {
  check_dims(M, K, scores);
  std::vector<double> neg(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) neg[i] = -scores[i];

  std::vector<int> row_of;
  std::vector<double> u, v;
  double best_cost = solve_min(M, K, neg, row_of, &u, &v);

  AssignmentResult res;
  res.arms.assign(static_cast<size_t>(M), -1);
  for (int k = 0; k < K; ++k)
    if (row_of[static_cast<size_t>(k)] >= 0)
      res.arms[static_cast<size_t>(row_of[static_cast<size_t>(k)])] = k;
  res.value = -best_cost;

  // a player with a single tight edge has no alternative in any optimum; when
  // that holds for everyone the optimum is unique and already lexicographic
  const double tol = 1e-9 * std::max(1.0, std::abs(res.value));
  bool unique = true;
  for (int i = 1; i <= M && unique; ++i) {
    int tight = 0;
    for (int j = 1; j <= K; ++j) {
      double rc = neg[static_cast<size_t>(i - 1) * K + (j - 1)] -
                  u[static_cast<size_t>(i)] - v[static_cast<size_t>(j)];
      if (rc <= tol) ++tight;
    }
    if (tight != 1) unique = false;
  }
  if (unique) return res;

  // ties: rebuild the assignment player by player, committing the smallest
  // arm whose optimal completion still reaches the optimum
  std::vector<char> used(static_cast<size_t>(K), 0);
  std::vector<int> rest;
  for (int m = 1; m < M; ++m) rest.push_back(m);
  double prefix = 0.0;
  for (int m = 0; m < M; ++m) {
    bool done = false;
    for (int k = 0; k < K && !done; ++k) {
      if (used[static_cast<size_t>(k)]) continue;
      double take = scores[static_cast<size_t>(m) * K + k];
      used[static_cast<size_t>(k)] = 1;
      double rem = rest.empty() ? 0.0 : -sub_value(K, neg, rest, used);
      if (prefix + take + rem >= res.value - tol) {
        res.arms[static_cast<size_t>(m)] = k;
        prefix += take;
        done = true;
      } else {
        used[static_cast<size_t>(k)] = 0;
      }
    }
    if (!done) throw std::logic_error("tie resolution lost the optimum");
    if (!rest.empty()) rest.erase(rest.begin());
  }
  return res;
}

}  // namespace mpmab
