#include "msb/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "msb/laplace.hpp"

namespace msb {

TruncatedGenerator db_generator(double rate, const std::vector<double>& offspring, std::size_t n) {
  if (!(rate > 0.0)) throw ValidationError("db_generator: rate must be > 0");
  if (n < 2) throw ValidationError("db_generator: N must be >= 2");
  validate_offspring(offspring);
  TruncatedGenerator g;
  g.n = n;
  g.q.assign(n * n, 0.0);
  g.leak.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    const double base = static_cast<double>(i) * rate;
    double out = 0.0;
    for (std::size_t j = 0; j < offspring.size(); ++j) {
      if (j == 1 || offspring[j] == 0.0) continue;
      const double r = base * offspring[j];
      const std::size_t target = i - 1 + j;
      if (target < n) {
        g.q[i * n + target] += r;
      } else {
        g.leak[i] += r;
      }
      out += r;
    }
    g.q[i * n + i] = -out;
  }
  return g;
}

TransitionRow ctmc_transition_row(const TruncatedGenerator& gen, std::size_t i, double t) {
  if (i >= gen.n) throw ValidationError("ctmc_transition_row: state out of range");
  if (!(t >= 0.0)) throw DomainError("ctmc_transition_row: t must be >= 0");
  const std::size_t n = gen.n;
  TransitionRow row;
  row.prob.assign(n, 0.0);
  double big = 0.0;
  for (std::size_t s = 0; s < n; ++s) big = std::max(big, -gen.at(s, s));
  if (t == 0.0 || big == 0.0) {
    row.prob[i] = 1.0;
    return row;
  }
  const double mu = big * t;
  // Uniformized kernel K = I + Q / big, kept sparse per row.
  std::vector<std::vector<std::pair<std::size_t, double>>> kernel(n);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      double v = gen.at(s, j) / big + (s == j ? 1.0 : 0.0);
      if (v != 0.0) kernel[s].emplace_back(j, v);
    }
  }
  std::vector<double> cur(n, 0.0), next(n);
  cur[i] = 1.0;
  double cum = 0.0;
  const double tol = 1e-12;
  const std::size_t cap = static_cast<std::size_t>(mu + 40.0 * std::sqrt(mu) + 100.0);
  for (std::size_t k = 0; k <= cap; ++k) {
    const double w = std::exp(-mu + static_cast<double>(k) * std::log(mu) -
                              std::lgamma(static_cast<double>(k) + 1.0));
    for (std::size_t s = 0; s < n; ++s) row.prob[s] += w * cur[s];
    cum += w;
    row.terms = k + 1;
    if (static_cast<double>(k) > mu && 1.0 - cum < tol) break;
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t s = 0; s < n; ++s) {
      if (cur[s] == 0.0) continue;
      for (const auto& [j, v] : kernel[s]) next[j] += cur[s] * v;
    }
    cur.swap(next);
  }
  const double total = std::accumulate(row.prob.begin(), row.prob.end(), 0.0);
  row.leak_bound = std::max(0.0, 1.0 - total) + tol;
  return row;
}

double row_generating_function(const TransitionRow& row, double z) {
  double acc = 0.0;
  for (auto it = row.prob.rbegin(); it != row.prob.rend(); ++it) acc = acc * z + *it;
  return acc;
}

double riccati_blowup_time(double a11, double alpha, double lambda1) {
  if (alpha == 0.0 || lambda1 == 0.0) return std::numeric_limits<double>::infinity();
  if (a11 == 0.0) {
    if (alpha * lambda1 < 0.0) return -1.0 / (alpha * lambda1);
    return std::numeric_limits<double>::infinity();
  }
  // Denominator a11 + alpha l (1 - e^{-a11 t}) vanishes when e^{-a11 t} = 1 + a11 / (alpha l).
  const double target = 1.0 + a11 / (alpha * lambda1);
  if (!(target > 0.0)) return std::numeric_limits<double>::infinity();
  const double t = -std::log(target) / a11;
  return t > 0.0 ? t : std::numeric_limits<double>::infinity();
}

double riccati_closed_form(double a11, double alpha, double lambda1, double t) {
  if (!(t >= 0.0)) throw DomainError("riccati_closed_form: t must be >= 0");
  if (t >= riccati_blowup_time(a11, alpha, lambda1)) {
    throw NumericError("riccati_closed_form: blow-up at t = " +
                       std::to_string(riccati_blowup_time(a11, alpha, lambda1)));
  }
  if (a11 == 0.0) return lambda1 / (1.0 + alpha * lambda1 * t);
  const double e = std::exp(-a11 * t);
  return a11 * lambda1 * e / (a11 - alpha * lambda1 * std::expm1(-a11 * t));
}

double w1_bruteforce(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.size() != b.size()) throw ValidationError("w1_bruteforce: sample sizes differ");
  if (a.empty()) throw ValidationError("w1_bruteforce: empty samples");
  if (a.size() > 7) throw ValidationError("w1_bruteforce: n > 7");
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += norm(a[i] - b[perm[i]]);
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

}  // namespace msb
