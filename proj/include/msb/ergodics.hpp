#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msb/common.hpp"
#include "msb/mechanism.hpp"
#include "msb/simulate.hpp"

namespace msb {

enum class GroundMetric {
  kEuclidean,  ///< |x - y|_2
  kManhattan,  ///< |x1 - y1| + |x2 - y2|
};

inline constexpr std::size_t kMaxAssignmentSize = 2048;

double ground_distance(Vec2 a, Vec2 b, GroundMetric metric);

std::vector<Vec2> to_points(const std::vector<MixedState>& rows);

/// Optimal assignment for a dense n x n cost matrix (row-major); returns the
/// column matched to each row. Kuhn-Munkres with potentials, O(n^3).
std::vector<std::size_t> hungarian(const std::vector<double>& cost, std::size_t n);

/// W1 between two uniform empirical measures of equal size.
double wasserstein1_exact(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                          GroundMetric metric = GroundMetric::kEuclidean);

/// Paired marginals (gamma0 + gamma1, gamma0 + gamma2) from x^y, (x-y)+, (x-y)-.
struct CoupledSample {
  std::vector<MixedState> first;   ///< law P_t(x, .)
  std::vector<MixedState> second;  ///< law P_t(y, .)
};

/// Replica i draws gamma0, gamma1, gamma2 from streams (seed, 3i), (seed, 3i+1), (seed, 3i+2).
CoupledSample coupled_sample(const BranchingMechanism& mech, MixedState x, MixedState y, double t,
                             const EnsembleOptions& opt, SchemeStats* stats = nullptr);

/// Mean cost of the coupling itself, row i against row i.
double coupled_cost(const CoupledSample& s, GroundMetric metric = GroundMetric::kEuclidean);

struct W1Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// |<x-y, pi(t,1)>| and sum |x_i - y_i| pi_i(t,1).
W1Bounds w1_bounds(const BranchingMechanism& mech, MixedState x, MixedState y, double t);

struct ErgodicRate {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double theta11 = 0.0;
  double theta12 = 0.0;
  double theta21 = 0.0;
  double theta22 = 0.0;
  double vartheta = 0.0;
  double rate = 0.0;

  /// theta_i1 e^{lambda1 t} + theta_i2 e^{lambda2 t}.
  Vec2 pi(double t) const;
};

/// Throws PreconditionError unless det H > 0 and tr H < 0; UnsupportedError
/// for H12 = 0 < H21 and for a repeated root.
ErgodicRate ergodic_rate(const Mat2& h);
inline ErgodicRate ergodic_rate(const BranchingMechanism& mech) {
  return ergodic_rate(moment_matrix(mech));
}

struct StationarityCheck {
  bool eigen_ok = false;
  double log_moment = 0.0;  ///< sum over |z| >= 1 of w log|z|
  bool stationary_exists = false;
};

StationarityCheck stationarity_check(const BranchingMechanism& mech,
                                     const ImmigrationMechanism& imm);

/// Time after which vartheta e^{-rate t} <= target.
double default_burn_in(const BranchingMechanism& mech, double target = 1e-3);

/// Terminal states at t = burn_in from (0, 0). burn_in <= 0 selects default_burn_in.
EnsembleSample stationary_sample(const BranchingMechanism& mech, const ImmigrationMechanism& imm,
                                 double burn_in, const EnsembleOptions& opt);

/// W1 of two samples with the standard deviation of `resamples` bootstrap
/// replicates (both samples resampled independently with replacement).
struct BootstrapW1 {
  double value = 0.0;
  double std_error = 0.0;
  std::vector<double> replicates;
};

BootstrapW1 bootstrap_w1(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                         std::size_t resamples, std::uint64_t seed,
                         GroundMetric metric = GroundMetric::kEuclidean);

/// Mean W1 between disjoint bootstrap resamples of the pooled sample: the
/// distance two samples of size n from one law show by chance alone.
Estimate w1_noise_floor(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                        std::size_t resamples, std::uint64_t seed,
                        GroundMetric metric = GroundMetric::kEuclidean);

struct ErgodicReport {
  double lower = 0.0;
  double upper = 0.0;
  double empirical_w1 = 0.0;
  double bootstrap_se = 0.0;
  double rate = 0.0;
  double vartheta = 0.0;

  /// {"lower","upper","empirical_w1","bootstrap_se","rate","vartheta"}
  std::string to_json() const;
};

}  // namespace msb
