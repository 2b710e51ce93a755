#include "msb/laplace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "msb/ode.hpp"

namespace msb {

std::string FlowGrid::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "t,v1,v2\n";
  for (std::size_t i = 0; i < times.size(); ++i) {
    os << times[i] << ',' << values[i].x1 << ',' << values[i].x2 << '\n';
  }
  return os.str();
}

double ScalarFlowGrid::at(double t) const {
  if (times.size() == 1) return values.front();
  const double h = times[1] - times[0];
  const double pos = t / h;
  auto i = static_cast<std::size_t>(std::floor(pos));
  if (i >= times.size() - 1) return values.back();
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * values[i] + w * values[i + 1];
}

namespace {

/// RK4 over [0, horizon] for a flow that must stay in the nonnegative quadrant.
template <class Field>
FlowGrid integrate_nonneg_flow(const Field& field, Vec2 y0, double horizon, double step,
                               const char* name) {
  const UniformGrid grid = UniformGrid::cover(horizon, step);
  FlowGrid out;
  out.step = step;
  out.times.reserve(grid.intervals + 1);
  out.values.reserve(grid.intervals + 1);
  out.times.push_back(0.0);
  out.values.push_back(y0);
  Vec2 y = y0;
  for (std::size_t i = 1; i <= grid.intervals; ++i) {
    y = rk4_step(field, y, grid.h);
    const double t = grid.time(i);
    if (!std::isfinite(y.x1) || !std::isfinite(y.x2)) {
      std::ostringstream os;
      os << name << ": nonfinite value at t = " << t;
      throw NumericError(os.str());
    }
    for (double* c : {&y.x1, &y.x2}) {
      if (*c < -kUndershootTolerance) {
        std::ostringstream os;
        os << name << ": negative undershoot " << *c << " at t = " << t;
        throw NumericError(os.str());
      }
      if (*c < 0.0) *c = 0.0;
    }
    out.times.push_back(t);
    out.values.push_back(y);
  }
  return out;
}

/// The RHS is only evaluated at nonnegative arguments; RK4 stages can dip by
/// round-off, which is projected back.
inline Vec2 clamp_nonneg(Vec2 v) { return {std::max(v.x1, 0.0), std::max(v.x2, 0.0)}; }

}  // namespace

FlowGrid solve_v(const BranchingMechanism& mech, Vec2 lambda, double horizon, double step) {
  require_nonneg(lambda, "solve_v");
  auto field = [&mech](Vec2 v) { return phi(mech, clamp_nonneg(v)); };
  return integrate_nonneg_flow(field, lambda, horizon, step, "solve_v");
}

double transition_laplace(const BranchingMechanism& mech, MixedState x, Vec2 lambda, double t,
                          double step) {
  if (!(t >= 0.0)) throw DomainError("transition_laplace: t must be >= 0");
  if (x.y1 == 0.0 && x.y2 == 0) return 1.0;
  const Vec2 v = solve_v(mech, lambda, t, step).final_value();
  return std::exp(-dot(x.as_vec(), v));
}

double transition_laplace_imm(const BranchingMechanism& mech, const ImmigrationMechanism& imm,
                              MixedState x, Vec2 lambda, double t, double step) {
  if (!(t >= 0.0)) throw DomainError("transition_laplace_imm: t must be >= 0");
  const FlowGrid grid = solve_v(mech, lambda, t, step);
  std::vector<double> integrand(grid.values.size());
  std::transform(grid.values.begin(), grid.values.end(), integrand.begin(),
                 [&imm](Vec2 v) { return psi(imm, v); });
  const double h = grid.times.size() > 1 ? grid.times[1] - grid.times[0] : 0.0;
  return std::exp(-dot(x.as_vec(), grid.final_value()) - simpson(integrand, h));
}

MomentFlow moment_flow(const BranchingMechanism& mech, Vec2 lambda, double t, double step) {
  require_nonneg(lambda, "moment_flow");
  if (!(t >= 0.0)) throw DomainError("moment_flow: t must be >= 0");
  const Mat2 h = moment_matrix(mech);
  const UniformGrid grid = UniformGrid::cover(t, step);
  auto field = [&h](Vec2 p) { return h * p; };
  Vec2 p = lambda;
  for (std::size_t i = 0; i < grid.intervals; ++i) p = rk4_step(field, p, grid.h);
  MomentFlow out{p, matrix_exponential(h, t) * lambda};
  const double scale = std::max(1.0, max_abs(out.closed_form));
  if (max_abs(out.rk4 - out.closed_form) > 1e-6 * scale) {
    throw NumericError("moment_flow: RK4 and exp(tH) routes disagree beyond 1e-6");
  }
  return out;
}

Vec2 mean_state(const BranchingMechanism& mech, MixedState x, double t) {
  if (!(t >= 0.0)) throw DomainError("mean_state: t must be >= 0");
  return matrix_exponential(moment_matrix(mech).transpose(), t) * x.as_vec();
}

Vec2 mean_state_imm(const BranchingMechanism& mech, const ImmigrationMechanism& imm,
                    MixedState x, double t) {
  const Mat2 ht = moment_matrix(mech).transpose();
  const Vec2 inflow{imm.b + imm.m.moment_z1(), imm.m.moment_z2()};
  return matrix_exponential(ht, t) * x.as_vec() + integrated_exponential(ht, t) * inflow;
}

ScalarFlowGrid survival_tau(const TruncatedMechanism& trunc, Vec2 masses, MixedState y,
                            double horizon, double step) {
  require_nonneg(masses, "survival_tau");
  auto field = [&trunc, masses](Vec2 v) {
    const Vec2 c = clamp_nonneg(v);
    return Vec2{trunc.phi1(c) + masses.x1, trunc.phi2(c) + masses.x2};
  };
  const FlowGrid flow = integrate_nonneg_flow(field, {0.0, 0.0}, horizon, step, "survival_tau");
  ScalarFlowGrid out;
  out.step = step;
  out.times = flow.times;
  out.values.reserve(flow.values.size());
  for (const Vec2& v : flow.values) out.values.push_back(std::exp(-dot(y.as_vec(), v)));
  return out;
}

ScalarFlowGrid survival_tau(const BranchingMechanism& mech, MixedState y, Vec2 r, double horizon,
                            double step) {
  const TruncatedMechanism trunc = truncate_mechanism(mech, r);
  return survival_tau(trunc, trunc.excess, y, horizon, step);
}

double tau_asymptotic(const Mat2& h, MixedState y, Vec2 masses, double t) {
  if (!(t >= 0.0)) throw DomainError("tau_asymptotic: t must be >= 0");
  return dot(y.as_vec(), integrated_exponential(h, t) * masses);
}

double tau_asymptotic(const BranchingMechanism& mech, MixedState y, Vec2 r, double t) {
  const TruncatedMechanism trunc = truncate_mechanism(mech, r);
  return tau_asymptotic(moment_matrix(mech), y, trunc.excess, t);
}

double integrated_functional(const BranchingMechanism& mech, MixedState y, Vec2 lambda, double t,
                             double step) {
  require_nonneg(lambda, "integrated_functional");
  auto field = [&mech, lambda](Vec2 v) { return phi(mech, clamp_nonneg(v)) + lambda; };
  const FlowGrid flow =
      integrate_nonneg_flow(field, {0.0, 0.0}, t, step, "integrated_functional");
  return std::exp(-dot(y.as_vec(), flow.final_value()));
}

namespace {

/// Condition number of a complex 2x2 matrix with columns u, v.
double condition_number(const std::array<std::complex<double>, 2>& u,
                        const std::array<std::complex<double>, 2>& v) {
  const double fro2 = std::norm(u[0]) + std::norm(u[1]) + std::norm(v[0]) + std::norm(v[1]);
  const double d = std::abs(u[0] * v[1] - u[1] * v[0]);
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * d * d);
  const double smax2 = 0.5 * (fro2 + std::sqrt(disc));
  const double smin2 = d * d / smax2;
  return std::sqrt(smax2 / smin2);
}

std::array<std::complex<double>, 2> eigenvector(const Mat2& h, std::complex<double> mu) {
  const std::array<std::complex<double>, 2> a{h.m12, mu - h.m11};
  const std::array<std::complex<double>, 2> b{mu - h.m22, h.m21};
  const double na = std::norm(a[0]) + std::norm(a[1]);
  const double nb = std::norm(b[0]) + std::norm(b[1]);
  return na >= nb ? a : b;
}

}  // namespace

DecayEnvelope decay_envelope(const BranchingMechanism& mech, Vec2 lambda) {
  require_nonneg(lambda, "decay_envelope");
  const Mat2 h = moment_matrix(mech);
  const StabilityReport rep = stability_report(h);
  // Phi2 = 0 and lambda2 = 0 keep V2 at 0; only the first coordinate has to decay.
  const bool decoupled = mech.a21 == 0.0 && mech.n2.atoms.empty() && lambda.x2 == 0.0;
  if (decoupled ? !(h.m11 < 0.0) : !rep.negative_real_parts) {
    throw PreconditionError("decay_envelope: H has an eigenvalue with nonnegative real part");
  }
  DecayEnvelope env;
  env.c2 = -(decoupled ? h.m11 : rep.eigen1.real()) * (1.0 - 1e-6);

  if (decoupled) {
    env.c = 1.0;
  } else if (std::fabs(rep.discriminant) > 1e-10) {
    env.c = condition_number(eigenvector(h, rep.eigen1), eigenvector(h, rep.eigen2));
  } else {
    // Near-defective: sup of |e^{tH}| e^{c2 t} on a log-spaced grid reaching
    // far past the polynomial-times-exponential peak.
    const double eps = std::max(-rep.eigen1.real() - env.c2, 1e-300);
    const double t_max = 50.0 / eps;
    const int points = 20000;
    double sup = 1.0;
    for (int i = 0; i <= points; ++i) {
      const double t = 1e-6 * std::pow(t_max / 1e-6, static_cast<double>(i) / points);
      sup = std::max(sup, operator_norm(matrix_exponential(h, t)) * std::exp(env.c2 * t));
    }
    env.c = 1.01 * sup;
  }
  env.c1 = norm(lambda) * env.c;

  for (const auto& a : mech.n1.atoms) env.kappa += a.weight * std::min(a.z1, a.z1 * a.z1);
  for (const auto& a : mech.n2.atoms) {
    if (a.z2 == -1) env.theta += a.weight;
  }
  env.A = std::fabs(h.m11 - env.kappa - (mech.alpha + 0.5 * env.kappa) * env.c1);
  env.B = 2.0 * env.theta * std::exp(env.c1);
  return env;
}

StationaryLaplace stationary_laplace(const BranchingMechanism& mech,
                                     const ImmigrationMechanism& imm, Vec2 lambda, double step) {
  require_nonneg(lambda, "stationary_laplace");
  const StabilityReport rep = stability_report(mech);
  if (!rep.negative_real_parts) {
    throw PreconditionError("stationary_laplace: no stationary law, H is not stable");
  }
  StationaryLaplace out;
  const Vec2 grad{imm.b + imm.m.moment_z1(), imm.m.moment_z2()};
  const double lipschitz = norm(grad);
  if (lipschitz == 0.0 || (lambda.x1 == 0.0 && lambda.x2 == 0.0)) return out;

  const DecayEnvelope env = decay_envelope(mech, lambda);
  // int_T^inf L c1 e^{-c2 s} ds <= 1e-10
  const double target = 1e-10;
  out.horizon = std::max(1.0, std::log(lipschitz * env.c1 / (env.c2 * target)) / env.c2);
  out.tail_bound = lipschitz * env.c1 * std::exp(-env.c2 * out.horizon) / env.c2;

  const FlowGrid flow = solve_v(mech, lambda, out.horizon, step);
  std::vector<double> integrand(flow.values.size());
  std::transform(flow.values.begin(), flow.values.end(), integrand.begin(),
                 [&imm](Vec2 v) { return psi(imm, v); });
  out.quadrature = simpson(integrand, flow.times[1] - flow.times[0]);
  // Near 0, V(T + s) ~ e^{sH} V(T) and Psi(v) ~ <grad, v>.
  const Mat2 h = moment_matrix(mech);
  out.tail_estimate = dot(grad, (-1.0 * inverse(h)) * flow.final_value());
  out.value = std::exp(-(out.quadrature + out.tail_estimate));
  return out;
}

void validate_offspring(const std::vector<double>& p) {
  if (p.empty()) throw ValidationError("offspring law is empty");
  double s = 0.0;
  for (double q : p) {
    if (!(q >= 0.0) || !std::isfinite(q)) throw ValidationError("offspring law has negative entry");
    s += q;
  }
  if (std::fabs(s - 1.0) > 1e-12) throw ValidationError("offspring law does not sum to 1");
}

double pgf(const std::vector<double>& p, double z) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
  return acc;
}

ScalarFlowGrid db_flow(double rate, const std::vector<double>& offspring, double z,
                       double horizon, double step) {
  if (!(rate > 0.0)) throw ValidationError("db_flow: rate must be > 0");
  validate_offspring(offspring);
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("db_flow: z must lie in [0, 1]");
  const UniformGrid grid = UniformGrid::cover(horizon, step);
  auto u = [rate, &offspring](double f) {
    const double c = std::clamp(f, 0.0, 1.0);
    return rate * (pgf(offspring, c) - c);
  };
  ScalarFlowGrid out;
  out.step = step;
  out.times.reserve(grid.intervals + 1);
  out.values.reserve(grid.intervals + 1);
  out.times.push_back(0.0);
  out.values.push_back(z);
  double f = z;
  for (std::size_t i = 1; i <= grid.intervals; ++i) {
    f = std::clamp(rk4_step_scalar(u, f, grid.h), 0.0, 1.0);
    out.times.push_back(grid.time(i));
    out.values.push_back(f);
  }
  return out;
}

}  // namespace msb
