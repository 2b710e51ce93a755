#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "msb/common.hpp"
#include "msb/mechanism.hpp"
#include "msb/rng.hpp"

namespace msb {

/// Rescaled one-type GW sequence: gamma_k = a k and the k-th offspring law.
struct GW1Model {
  double gamma_k = 0.0;
  std::size_t k = 0;
  std::vector<double> offspring;
};

GW1Model build_gw1(double rate, const std::vector<double>& offspring, std::size_t k);

/// U_k(z) = gamma_k (g_k(z) - z).
double gw1_generator(const GW1Model& model, double z);

/// F_k(z, t) = g_k composed floor(gamma_k t) times, evaluated at z.
double gw1_flow(const GW1Model& model, double z, double t);

/// One offspring outcome: d1 type-1 and d2 type-2 children.
struct Outcome {
  std::int64_t d1 = 0;
  std::int64_t d2 = 0;
  double prob = 0.0;
};

/// A component law of the mixture, with its weight already divided by gamma_k.
struct MixtureComponent {
  std::string label;
  double weight = 0.0;
  std::vector<Outcome> outcomes;
};

struct OffspringMixture {
  std::vector<MixtureComponent> components;

  double weight_sum() const;
  /// Outcomes with mixture probabilities, equal (d1, d2) merged, sorted.
  std::vector<Outcome> flatten() const;
  double pgf(double x1, double x2) const;
};

struct GW2Model {
  std::size_t k = 0;
  double gamma_k = 0.0;
  OffspringMixture g1;  ///< law of the children of a type-1 individual
  OffspringMixture g2;
  std::vector<Outcome> flat1;
  std::vector<Outcome> flat2;
};

/// Two-type sequence converging to the mechanism. Jump atoms with
/// z1 <= 1/sqrt(k) that the truncated sets miss go into extra components.
GW2Model build_gw2(const BranchingMechanism& mech, std::size_t k);

using GWState = std::array<std::int64_t, 2>;

inline constexpr std::int64_t kPopulationCap = 1000000000;

struct GWPath {
  std::vector<GWState> states;
  bool truncated = false;  ///< population cap reached; path stops there
};

GWPath simulate_gw2(const GW2Model& model, GWState x0, std::size_t steps, Philox& rng);

/// One generation step in place; returns false if the cap was hit.
bool gw2_generation(const GW2Model& model, GWState& state, Philox& rng);

/// Generation count floor(gamma_k t).
std::size_t gw_generations(double gamma_k, double t);

struct GWRunOptions {
  std::size_t replicas = 10000;
  std::uint64_t seed = 42;
  unsigned threads = 0;
};

/// E exp{-l1 Y1(n)/k - l2 Y2(n)}, n = floor(gamma_k t), from (floor(k x1), x2).
Estimate rescaled_laplace_gw(const GW2Model& model, MixedState x, Vec2 lambda, double t,
                             const GWRunOptions& opt);

/// Mean of (Y1(n)/k, Y2(n)).
std::pair<Estimate, Estimate> rescaled_mean_gw(const GW2Model& model, MixedState x, double t,
                                               const GWRunOptions& opt);

struct ConvergenceRow {
  std::size_t k = 0;
  double estimate = 0.0;
  double continuum = 0.0;
  double abs_error = 0.0;
  double std_error = 0.0;
};

/// Rows for each k; replicas for k_list[j] run on seed + j.
std::vector<ConvergenceRow> convergence_report(const BranchingMechanism& mech, MixedState x,
                                               Vec2 lambda, double t,
                                               const std::vector<std::size_t>& k_list,
                                               const GWRunOptions& opt);

/// CSV `k,estimate,continuum,abs_error,stderr`.
std::string to_csv(const std::vector<ConvergenceRow>& rows);

/// Deterministic one-type check: |F_k(z, t) - F(z, t)| per k (std_error 0).
std::vector<ConvergenceRow> gw1_convergence(double rate, const std::vector<double>& offspring,
                                            double z, double t,
                                            const std::vector<std::size_t>& k_list);

}  // namespace msb
