#pragma once

#include <cstddef>
#include <vector>

#include "msb/common.hpp"

namespace msb {

/// Rate matrix of a DB-process truncated to {0, .., N-1}. Transitions that
/// would land at N or above are dropped and booked in `leak`.
struct TruncatedGenerator {
  std::size_t n = 0;
  std::vector<double> q;  ///< row-major n x n
  std::vector<double> leak;

  double at(std::size_t i, std::size_t j) const { return q[i * n + j]; }
};

/// State i jumps to i - 1 + j at rate i a p_j (j != 1).
TruncatedGenerator db_generator(double rate, const std::vector<double>& offspring,
                                std::size_t n = 400);

struct TransitionRow {
  std::vector<double> prob;
  double leak_bound = 0.0;  ///< 1 - sum(prob) plus the Poisson tail cut
  std::size_t terms = 0;
};

/// Row i of exp(tQ) by uniformization, series cut once the Poisson tail is below 1e-12.
TransitionRow ctmc_transition_row(const TruncatedGenerator& gen, std::size_t i, double t);

/// sum_j row[j] z^j
double row_generating_function(const TransitionRow& row, double z);

/// V1 of dV/dt = -a11 V - alpha V^2, V(0) = lambda1. Throws NumericError past the blow-up time.
double riccati_closed_form(double a11, double alpha, double lambda1, double t);

/// Blow-up time of the Riccati flow, +inf if it exists globally.
double riccati_blowup_time(double a11, double alpha, double lambda1);

/// Minimum over all n! pairings of the mean Euclidean cost, n <= 7.
double w1_bruteforce(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

}  // namespace msb
