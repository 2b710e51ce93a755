#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msb/common.hpp"
#include "msb/mechanism.hpp"
#include "msb/rng.hpp"

namespace msb {

enum class JumpSource { kN1, kN2, kImmigration };

const char* to_string(JumpSource s);

struct JumpEvent {
  double time = 0.0;
  JumpSource source = JumpSource::kN1;
  std::size_t atom = 0;  ///< index into the driving measure
  double dy1 = 0.0;
  std::int64_t dy2 = 0;
};

/// Trajectory on the step grid plus every applied jump. Row i of `kinds`
/// says whether states[i] closes a step or follows a jump.
struct PathRecord {
  std::vector<double> times;
  std::vector<MixedState> states;
  std::vector<std::optional<JumpSource>> kinds;  ///< nullopt = step boundary
  std::vector<JumpEvent> jumps;
  std::size_t rejected_jumps = 0;

  MixedState final_state() const { return states.back(); }
  /// CSV `t,y1,y2,event` with event in {step, jump:n1, jump:n2, jump:imm}.
  std::string to_csv() const;
};

/// Tau-leaping / Euler-Maruyama scheme counters.
struct SchemeStats {
  std::size_t steps = 0;
  std::size_t jumps = 0;
  std::size_t rejected_jumps = 0;  ///< would have driven y2 below 0
  std::size_t clamped_steps = 0;   ///< y1 projected back to 0 after the diffusion update
  std::size_t positivity_violations = 0;

  SchemeStats& operator+=(const SchemeStats& o) {
    steps += o.steps;
    jumps += o.jumps;
    rejected_jumps += o.rejected_jumps;
    clamped_steps += o.clamped_steps;
    positivity_violations += o.positivity_violations;
    return *this;
  }
};

/// Left-endpoint jump rate times dt above which a step is refused.
inline constexpr double kMaxLeapMass = 0.5;

/// MSB path on [0, horizon]. `imm` null means no immigration.
PathRecord simulate_msb(const BranchingMechanism& mech, MixedState x0, double horizon, double dt,
                        Philox& rng);
PathRecord simulate_msbi(const BranchingMechanism& mech, const ImmigrationMechanism& imm,
                         MixedState x0, double horizon, double dt, Philox& rng);

/// Terminal state only; consumes the same random numbers as simulate_msb(i).
MixedState terminal_state(const BranchingMechanism& mech, const ImmigrationMechanism* imm,
                          MixedState x0, double horizon, double dt, Philox& rng,
                          SchemeStats* stats = nullptr);

struct EnsembleSample {
  std::vector<MixedState> rows;
  std::uint64_t seed = 0;
  double t = 0.0;
  double dt = 0.0;
  std::string config_digest;
  SchemeStats stats;

  std::size_t size() const { return rows.size(); }
  /// CSV `replica,y1,y2`.
  std::string to_csv() const;
  /// JSON sidecar: seed, t, dt, digest and scheme counters.
  std::string sidecar_json() const;
};

struct EnsembleOptions {
  double dt = 1e-3;
  std::size_t replicas = 10000;
  std::uint64_t seed = 42;
  unsigned threads = 0;  ///< 0: MSB_THREADS or hardware concurrency
};

/// Replica i runs on stream(seed, i).
EnsembleSample ensemble(const BranchingMechanism& mech, const ImmigrationMechanism* imm,
                        MixedState x0, double t, const EnsembleOptions& opt);

/// Mean and standard error of exp{-<lambda, row>}.
Estimate empirical_laplace(const EnsembleSample& sample, Vec2 lambda);
Estimate empirical_laplace(const std::vector<MixedState>& rows, Vec2 lambda);

/// Mean and standard error of each coordinate.
std::pair<Estimate, Estimate> empirical_mean(const std::vector<MixedState>& rows);

/// Which jumps count as "large".
enum class JumpCriterion {
  kProduct,  ///< dy1 > r1 and dy2 > r2 (the set A_r of the survival formula)
  kEither,   ///< dy1 > r1 or dy2 > r2
};

inline bool is_large_jump(double dy1, std::int64_t dy2, Vec2 r, JumpCriterion c) {
  const bool a = dy1 > r.x1, b = static_cast<double>(dy2) > r.x2;
  return c == JumpCriterion::kProduct ? (a && b) : (a || b);
}

/// Earliest recorded jump with the given criterion, none if absent.
std::optional<double> first_large_jump(const PathRecord& path, Vec2 r,
                                       JumpCriterion criterion = JumpCriterion::kProduct);

/// First large-jump time per replica (+inf when none before horizon).
std::vector<double> first_jump_times(const BranchingMechanism& mech, MixedState y, Vec2 r,
                                     double horizon, const EnsembleOptions& opt,
                                     JumpCriterion criterion = JumpCriterion::kProduct,
                                     SchemeStats* stats = nullptr);

/// Fraction of times > t with its binomial standard error.
Estimate empirical_survival(const std::vector<double>& times, double t);

/// Monte Carlo for E_y exp{-int_0^t <lambda, Y(s)> ds}, trapezoid on the step grid.
Estimate integrated_functional_mc(const BranchingMechanism& mech, MixedState y, Vec2 lambda,
                                  double t, const EnsembleOptions& opt);

}  // namespace msb
