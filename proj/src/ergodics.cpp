#include "msb/ergodics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "json.hpp"
#include "msb/laplace.hpp"
#include "msb/rng.hpp"

namespace msb {

double ground_distance(Vec2 a, Vec2 b, GroundMetric metric) {
  const Vec2 d = a - b;
  return metric == GroundMetric::kEuclidean ? norm(d) : std::fabs(d.x1) + std::fabs(d.x2);
}

std::vector<Vec2> to_points(const std::vector<MixedState>& rows) {
  std::vector<Vec2> out(rows.size());
  std::transform(rows.begin(), rows.end(), out.begin(), [](const MixedState& s) { return s.as_vec(); });
  return out;
}

std::vector<std::size_t> hungarian(const std::vector<double>& cost, std::size_t n) {
  if (cost.size() != n * n) throw ValidationError("hungarian: cost matrix is not n x n");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials u (rows), v (columns); way[j] = previous column on the augmenting path.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      const double* row = &cost[(i0 - 1) * n];
      const double ui0 = u[i0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - ui0 - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> match(n);
  for (std::size_t j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

double wasserstein1_exact(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                          GroundMetric metric) {
  if (a.size() != b.size()) throw ValidationError("wasserstein1_exact: sample sizes differ");
  if (a.empty()) throw ValidationError("wasserstein1_exact: empty samples");
  if (a.size() > kMaxAssignmentSize) {
    throw ValidationError("wasserstein1_exact: n = " + std::to_string(a.size()) + " exceeds " +
                          std::to_string(kMaxAssignmentSize));
  }
  const std::size_t n = a.size();
  std::vector<double> cost(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = ground_distance(a[i], b[j], metric);
  }
  const auto match = hungarian(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + match[i]];
  return total / static_cast<double>(n);
}

CoupledSample coupled_sample(const BranchingMechanism& mech, MixedState x, MixedState y, double t,
                             const EnsembleOptions& opt, SchemeStats* stats) {
  if (!x.valid() || !y.valid()) throw ValidationError("coupled_sample: invalid state");
  if (opt.replicas < 1) throw ValidationError("replicas must be >= 1");
  const MixedState plus{std::max(x.y1 - y.y1, 0.0), std::max<std::int64_t>(x.y2 - y.y2, 0)};
  const MixedState minus{std::max(y.y1 - x.y1, 0.0), std::max<std::int64_t>(y.y2 - x.y2, 0)};
  const MixedState meet{x.y1 - plus.y1, x.y2 - plus.y2};
  CoupledSample out;
  out.first.resize(opt.replicas);
  out.second.resize(opt.replicas);
  std::vector<SchemeStats> per(opt.replicas);
  parallel_for(opt.replicas, opt.threads, [&](std::size_t i) {
    Philox r0 = stream(opt.seed, 3 * i), r1 = stream(opt.seed, 3 * i + 1),
           r2 = stream(opt.seed, 3 * i + 2);
    const MixedState g0 = terminal_state(mech, nullptr, meet, t, opt.dt, r0, &per[i]);
    const MixedState g1 = terminal_state(mech, nullptr, plus, t, opt.dt, r1, &per[i]);
    const MixedState g2 = terminal_state(mech, nullptr, minus, t, opt.dt, r2, &per[i]);
    out.first[i] = g0 + g1;
    out.second[i] = g0 + g2;
  });
  if (stats) {
    for (const auto& st : per) *stats += st;
  }
  return out;
}

double coupled_cost(const CoupledSample& s, GroundMetric metric) {
  if (s.first.size() != s.second.size() || s.first.empty()) {
    throw ValidationError("coupled_cost: malformed sample");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < s.first.size(); ++i) {
    total += ground_distance(s.first[i].as_vec(), s.second[i].as_vec(), metric);
  }
  return total / static_cast<double>(s.first.size());
}

W1Bounds w1_bounds(const BranchingMechanism& mech, MixedState x, MixedState y, double t) {
  const Vec2 pi = moment_flow(mech, {1.0, 1.0}, t).closed_form;
  const Vec2 d = x.as_vec() - y.as_vec();
  return {std::fabs(dot(d, pi)), std::fabs(d.x1) * pi.x1 + std::fabs(d.x2) * pi.x2};
}

Vec2 ErgodicRate::pi(double t) const {
  const double e1 = std::exp(lambda1 * t), e2 = std::exp(lambda2 * t);
  return {theta11 * e1 + theta12 * e2, theta21 * e1 + theta22 * e2};
}

ErgodicRate ergodic_rate(const Mat2& h) {
  if (!(h.det() > 0.0 && h.trace() < 0.0)) {
    throw PreconditionError("ergodic_rate: requires det H > 0 and tr H < 0");
  }
  ErgodicRate r;
  if (h.m12 == 0.0 && h.m21 == 0.0) {
    r.lambda1 = std::max(h.m11, h.m22);
    r.lambda2 = std::min(h.m11, h.m22);
    if (h.m11 >= h.m22) {
      r.theta11 = 1.0;
      r.theta22 = 1.0;
    } else {
      r.theta12 = 1.0;
      r.theta21 = 1.0;
    }
  } else {
    if (h.m12 == 0.0) throw UnsupportedError("ergodic_rate: H12 = 0 < H21 is not covered");
    const double disc = h.discriminant();
    if (!(disc > 0.0)) throw UnsupportedError("ergodic_rate: repeated eigenvalue");
    const double sd = std::sqrt(disc);
    r.lambda1 = 0.5 * (h.trace() + sd);
    r.lambda2 = r.lambda1 - sd;
    const double a = h.m11 + h.m12 - r.lambda2;
    const double b = r.lambda1 - h.m11 - h.m12;
    r.theta11 = a / sd;
    r.theta12 = b / sd;
    r.theta21 = a * (r.lambda1 - h.m11) / (sd * h.m12);
    r.theta22 = b * (r.lambda2 - h.m11) / (sd * h.m12);
  }
  r.vartheta = r.theta11 + r.theta21 + std::fabs(r.theta12) + std::fabs(r.theta22);
  r.rate = -r.lambda1;
  return r;
}

StationarityCheck stationarity_check(const BranchingMechanism& mech,
                                     const ImmigrationMechanism& imm) {
  StationarityCheck c;
  c.eigen_ok = stability_report(mech).negative_real_parts;
  for (const auto& a : imm.m.atoms) {
    const double len = norm(a.size());
    if (len >= 1.0) c.log_moment += a.weight * std::log(len);
  }
  c.stationary_exists = c.eigen_ok && std::isfinite(c.log_moment);
  return c;
}

double default_burn_in(const BranchingMechanism& mech, double target) {
  const ErgodicRate r = ergodic_rate(mech);
  return std::max(0.0, std::log(r.vartheta / target) / r.rate);
}

EnsembleSample stationary_sample(const BranchingMechanism& mech, const ImmigrationMechanism& imm,
                                 double burn_in, const EnsembleOptions& opt) {
  if (!stationarity_check(mech, imm).stationary_exists) {
    throw PreconditionError("stationary_sample: no stationary law");
  }
  const double t = burn_in > 0.0 ? burn_in : default_burn_in(mech);
  return ensemble(mech, &imm, {0.0, 0}, t, opt);
}

namespace {

std::vector<Vec2> resample(const std::vector<Vec2>& v, Philox& rng) {
  std::vector<Vec2> out(v.size());
  const auto n = static_cast<std::uint32_t>(v.size());
  for (auto& p : out) p = v[std::uniform_int_distribution<std::uint32_t>(0, n - 1)(rng)];
  return out;
}

double sample_sd(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

BootstrapW1 bootstrap_w1(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                         std::size_t resamples, std::uint64_t seed, GroundMetric metric) {
  BootstrapW1 out;
  out.value = wasserstein1_exact(a, b, metric);
  out.replicates.resize(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    Philox rng = stream(seed, r);
    const auto ra = resample(a, rng);
    const auto rb = resample(b, rng);
    out.replicates[r] = wasserstein1_exact(ra, rb, metric);
  }
  out.std_error = sample_sd(out.replicates);
  return out;
}

Estimate w1_noise_floor(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                        std::size_t resamples, std::uint64_t seed, GroundMetric metric) {
  if (a.size() != b.size() || a.empty()) throw ValidationError("w1_noise_floor: malformed samples");
  std::vector<Vec2> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t n = a.size();
  std::vector<double> values(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    Philox rng = stream(seed, r);
    std::vector<Vec2> p = pooled;
    std::shuffle(p.begin(), p.end(), rng);
    const std::vector<Vec2> lo(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n));
    const std::vector<Vec2> hi(p.begin() + static_cast<std::ptrdiff_t>(n), p.end());
    values[r] = wasserstein1_exact(lo, hi, metric);
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(resamples);
  return {mean, sample_sd(values) / std::sqrt(static_cast<double>(resamples))};
}

std::string ErgodicReport::to_json() const {
  const nlohmann::json j = {{"lower", lower},          {"upper", upper},
                            {"empirical_w1", empirical_w1}, {"bootstrap_se", bootstrap_se},
                            {"rate", rate},            {"vartheta", vartheta}};
  return j.dump(2) + "\n";
}

}  // namespace msb
