#pragma once

#include <string>
#include <vector>

#include "msb/common.hpp"
#include "msb/linalg.hpp"
#include "msb/mechanism.hpp"

namespace msb {

inline constexpr double kDefaultStep = 1e-3;
/// Componentwise undershoot below zero tolerated (and clamped) in V-type flows.
inline constexpr double kUndershootTolerance = 1e-12;

/// Time grid with pair values from an RK4 integration. Immutable after construction.
struct FlowGrid {
  std::vector<double> times;
  std::vector<Vec2> values;
  double step = 0.0;

  Vec2 final_value() const { return values.back(); }
  double final_time() const { return times.back(); }
  /// CSV with header `t,v1,v2`.
  std::string to_csv() const;
};

/// Time grid with scalar values (DB flow, survival curve).
struct ScalarFlowGrid {
  std::vector<double> times;
  std::vector<double> values;
  double step = 0.0;

  double final_value() const { return values.back(); }
  /// Linear interpolation on the grid; t must lie within [0, final time].
  double at(double t) const;
};

/// dV/dt = (Phi1(V), Phi2(V)), V(0) = lambda, on [0, horizon].
FlowGrid solve_v(const BranchingMechanism& mech, Vec2 lambda, double horizon,
                 double step = kDefaultStep);

/// exp{-<x, V(t, lambda)>}.
double transition_laplace(const BranchingMechanism& mech, MixedState x, Vec2 lambda, double t,
                          double step = kDefaultStep);

/// exp{-<x, V(t, lambda)> - int_0^t Psi(V(s, lambda)) ds}, Simpson on the RK4 grid.
double transition_laplace_imm(const BranchingMechanism& mech, const ImmigrationMechanism& imm,
                              MixedState x, Vec2 lambda, double t, double step = kDefaultStep);

struct MomentFlow {
  Vec2 rk4;          ///< RK4 solution of d pi / dt = H pi
  Vec2 closed_form;  ///< exp(tH) lambda
};

/// Both routes to pi(t, lambda); throws NumericError if they differ by more than 1e-6.
MomentFlow moment_flow(const BranchingMechanism& mech, Vec2 lambda, double t,
                       double step = kDefaultStep);

/// (E Y1(t), E Y2(t)) = exp(t H^T) x.
Vec2 mean_state(const BranchingMechanism& mech, MixedState x, double t);

/// Mean with immigration: exp(t H^T) x + int_0^t exp(s H^T) ds (b + int z1 m, int z2 m).
Vec2 mean_state_imm(const BranchingMechanism& mech, const ImmigrationMechanism& imm,
                    MixedState x, double t);

/// t -> P_y(tau_r > t), tau_r the first jump whose size lies in A_r.
ScalarFlowGrid survival_tau(const BranchingMechanism& mech, MixedState y, Vec2 r, double horizon,
                            double step = kDefaultStep);

/// Same flow with the source term (excess masses) given explicitly.
ScalarFlowGrid survival_tau(const TruncatedMechanism& trunc, Vec2 masses, MixedState y,
                            double horizon, double step = kDefaultStep);

/// First-order approximation of P_y(tau_r <= t): y^T int_0^t e^{sH} ds n(A_r).
double tau_asymptotic(const BranchingMechanism& mech, MixedState y, Vec2 r, double t);
double tau_asymptotic(const Mat2& h, MixedState y, Vec2 masses, double t);

/// E_y exp{-int_0^t <lambda, Y(s)> ds} through the flow with source lambda.
double integrated_functional(const BranchingMechanism& mech, MixedState y, Vec2 lambda, double t,
                             double step = kDefaultStep);

struct StationaryLaplace {
  double value = 1.0;          ///< exp{-int_0^inf Psi(V(s, lambda)) ds}
  double horizon = 0.0;        ///< quadrature cut T*
  double quadrature = 0.0;     ///< Simpson part on [0, T*]
  double tail_estimate = 0.0;  ///< linearised tail added to the quadrature
  double tail_bound = 0.0;     ///< envelope bound on the tail, <= 1e-10 by choice of T*
};

StationaryLaplace stationary_laplace(const BranchingMechanism& mech,
                                     const ImmigrationMechanism& imm, Vec2 lambda,
                                     double step = kDefaultStep);

/// Constants of |V(t)| <= c1 e^{-c2 t}, V1 >= l1 e^{-A t}, V2 >= l2 e^{-B t}.
struct DecayEnvelope {
  double c = 0.0;  ///< sup_t |e^{tH}| e^{c2 t} bound
  double c1 = 0.0;
  double c2 = 0.0;
  double A = 0.0;
  double B = 0.0;
  double kappa = 0.0;  ///< int z1 ^ z1^2 n1
  double theta = 0.0;  ///< n2(R+ x {-1})
};

DecayEnvelope decay_envelope(const BranchingMechanism& mech, Vec2 lambda);

/// Throws ValidationError unless p is a probability vector (sum 1 within 1e-12).
void validate_offspring(const std::vector<double>& p);

/// Generating function sum p_j z^j.
double pgf(const std::vector<double>& p, double z);

/// Compound semigroup of the DB-process: dF/dt = a (g(F) - F), F(0) = z.
ScalarFlowGrid db_flow(double rate, const std::vector<double>& offspring, double z,
                       double horizon, double step = kDefaultStep);

}  // namespace msb
