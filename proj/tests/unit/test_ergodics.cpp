#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "msb/ergodics.hpp"
#include "msb/laplace.hpp"
#include "msb/oracle.hpp"

using namespace msb;
using fixtures::imm0;
using fixtures::mech0;
using fixtures::zscore;

namespace {

std::vector<Vec2> random_points(std::size_t n, std::uint64_t seed, bool flat = false) {
  Philox rng = stream(seed, 0);
  std::vector<Vec2> v(n);
  for (auto& p : v) p = {3.0 * rng.uniform(), flat ? 0.0 : std::floor(4.0 * rng.uniform())};
  return v;
}

EnsembleOptions small(std::size_t replicas, std::uint64_t seed = 42) {
  EnsembleOptions o;
  o.replicas = replicas;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("wasserstein1_exact basics") {
  const auto a = random_points(40, 1);
  CHECK(wasserstein1_exact(a, a) == 0.0);
  CHECK(wasserstein1_exact({{0, 0}}, {{3, 4}}) == doctest::Approx(5.0));
  CHECK(wasserstein1_exact({{0, 0}}, {{3, 4}}, GroundMetric::kManhattan) == doctest::Approx(7.0));
  auto shuffled = a;
  std::reverse(shuffled.begin(), shuffled.end());
  CHECK(wasserstein1_exact(a, shuffled) == doctest::Approx(0.0));
  CHECK_THROWS_AS(wasserstein1_exact(a, random_points(39, 2)), ValidationError);
  CHECK_THROWS_AS(wasserstein1_exact(std::vector<Vec2>(2049), std::vector<Vec2>(2049)),
                  ValidationError);
}

TEST_CASE("one-dimensional samples match the sorted coupling") {
  auto a = random_points(200, 3, true), b = random_points(200, 4, true);
  const double w = wasserstein1_exact(a, b);
  auto by_x = [](Vec2 p, Vec2 q) { return p.x1 < q.x1; };
  std::sort(a.begin(), a.end(), by_x);
  std::sort(b.begin(), b.end(), by_x);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i].x1 - b[i].x1);
  CHECK(w == doctest::Approx(s / 200.0).epsilon(1e-12));
}

TEST_CASE("metric properties") {
  const auto a = random_points(30, 5), b = random_points(30, 6), c = random_points(30, 7);
  CHECK(wasserstein1_exact(a, b) == doctest::Approx(wasserstein1_exact(b, a)).epsilon(1e-14));
  CHECK(wasserstein1_exact(a, c) <= wasserstein1_exact(a, b) + wasserstein1_exact(b, c) + 1e-9);
  CHECK(wasserstein1_exact(a, b) > 0.0);
}

TEST_CASE("Hungarian equals brute force for n <= 7") {
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const auto a = random_points(6, seed), b = random_points(6, seed + 100);
    CHECK(wasserstein1_exact(a, b) == doctest::Approx(w1_bruteforce(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("coupled_sample") {
  const auto m = mech0();
  const CoupledSample same = coupled_sample(m, {1.0, 2}, {1.0, 2}, 1.0, small(100));
  CHECK(same.first == same.second);
  CHECK(coupled_cost(same) == 0.0);

  const CoupledSample zero = coupled_sample(m, {1.0, 2}, {0.0, 0}, 1.0, small(100));
  for (const auto& s : zero.second) CHECK(s == MixedState{0.0, 0});

  const CoupledSample s = coupled_sample(m, {2.0, 3}, {1.0, 1}, 1.0, small(256, 3));
  const auto a = to_points(s.first), b = to_points(s.second);
  CHECK(coupled_cost(s) >= wasserstein1_exact(a, b) - 1e-12);
  CHECK(coupled_cost(s, GroundMetric::kManhattan) >=
        wasserstein1_exact(a, b, GroundMetric::kManhattan) - 1e-12);
}

TEST_CASE("coupled marginals have the right Laplace functional") {
  const auto m = mech0();
  const CoupledSample s = coupled_sample(m, {2.0, 3}, {1.0, 1}, 1.0, small(10000, 5));
  const Estimate a = empirical_laplace(s.first, {0.5, 0.5});
  const Estimate b = empirical_laplace(s.second, {0.5, 0.5});
  CHECK(zscore(a.mean, a.std_error, transition_laplace(m, {2.0, 3}, {0.5, 0.5}, 1.0)) <= 3.0);
  CHECK(zscore(b.mean, b.std_error, transition_laplace(m, {1.0, 1}, {0.5, 0.5}, 1.0)) <= 3.0);
}

TEST_CASE("w1_bounds") {
  const auto m = mech0();
  const W1Bounds same = w1_bounds(m, {1.0, 1}, {1.0, 1}, 1.0);
  CHECK(same.lower == 0.0);
  CHECK(same.upper == 0.0);
  const W1Bounds at0 = w1_bounds(m, {3.0, 1}, {1.0, 4}, 0.0);
  CHECK(at0.lower == doctest::Approx(1.0));
  CHECK(at0.upper == doctest::Approx(5.0));
  const W1Bounds b = w1_bounds(m, {2.0, 3}, {1.0, 1}, 1.0);
  CHECK(b.lower == doctest::Approx(3.0 * std::exp(-0.1)).epsilon(1e-12));
  CHECK(b.upper == doctest::Approx(3.0 * std::exp(-0.1)).epsilon(1e-12));
  CHECK(b.lower == doctest::Approx(2.714512).epsilon(1e-6));
}

TEST_CASE("ergodic_rate") {
  const ErgodicRate d = ergodic_rate(Mat2::diag(-1, -2));
  CHECK(d.lambda1 == -1.0);
  CHECK(d.lambda2 == -2.0);
  CHECK(d.rate == 1.0);

  const ErgodicRate r = ergodic_rate(mech0());
  CHECK(std::fabs(r.lambda1 + 0.1) <= 1e-12);
  CHECK(std::fabs(r.lambda2 + 1.2) <= 1e-12);
  CHECK(std::fabs(r.theta11 - 1.0) <= 1e-12);
  CHECK(std::fabs(r.theta12) <= 1e-12);
  CHECK(std::fabs(r.theta21 - 1.0) <= 1e-12);
  CHECK(std::fabs(r.theta22) <= 1e-12);
  CHECK(std::fabs(r.vartheta - 2.0) <= 1e-12);
  CHECK(std::fabs(r.rate - 0.1) <= 1e-12);

  CHECK_THROWS_AS(ergodic_rate(Mat2::diag(1, -2)), PreconditionError);
  CHECK_THROWS_AS(ergodic_rate(Mat2{-1.0, 0.0, 0.5, -2.0}), UnsupportedError);
  CHECK_THROWS_AS(ergodic_rate(Mat2{-1.0, 1.0, 0.0, -1.0}), UnsupportedError);
}

TEST_CASE("pi(t) from the rate matches the moment flow") {
  const auto m = mech0();
  const ErgodicRate r = ergodic_rate(m);
  for (double t : {0.1, 1.0, 5.0}) {
    const Vec2 pi = moment_flow(m, {1, 1}, t).closed_form;
    CHECK(std::fabs(r.pi(t).x1 - pi.x1) <= 1e-10);
    CHECK(std::fabs(r.pi(t).x2 - pi.x2) <= 1e-10);
  }
  // a non-eigenvector case
  const Mat2 h{-1.0, 0.3, 0.2, -0.5};
  const ErgodicRate q = ergodic_rate(h);
  for (double t : {0.1, 1.0, 5.0}) {
    const Vec2 pi = matrix_exponential(h, t) * Vec2{1, 1};
    CHECK(std::fabs(q.pi(t).x1 - pi.x1) <= 1e-10);
    CHECK(std::fabs(q.pi(t).x2 - pi.x2) <= 1e-10);
  }
}

TEST_CASE("stationarity_check") {
  const auto m = mech0();
  StationarityCheck c = stationarity_check(m, ImmigrationMechanism{});
  CHECK(c.log_moment == 0.0);
  CHECK(c.stationary_exists == c.eigen_ok);
  ImmigrationMechanism e;
  e.m.atoms = {{std::exp(1.0), 0, 2.0}};
  CHECK(stationarity_check(m, e).log_moment == doctest::Approx(2.0));
  CHECK(stationarity_check(m, imm0()).stationary_exists);
}

TEST_CASE("stationary_sample") {
  const auto m = mech0();
  const EnsembleSample zeros = stationary_sample(m, ImmigrationMechanism{}, 5.0, small(50));
  for (const auto& s : zeros.rows) CHECK(s == MixedState{0.0, 0});
  CHECK(default_burn_in(m) == doctest::Approx(std::log(2.0 / 1e-3) / 0.1).epsilon(1e-10));
  BranchingMechanism unstable;
  unstable.a11 = -1.0;
  CHECK_THROWS_AS(stationary_sample(unstable, imm0(), 1.0, small(10)), PreconditionError);
}

TEST_CASE("bootstrap and noise floor") {
  const auto a = random_points(64, 30), b = random_points(64, 31);
  const BootstrapW1 w = bootstrap_w1(a, b, 20, 7);
  CHECK(w.value == doctest::Approx(wasserstein1_exact(a, b)));
  CHECK(w.replicates.size() == 20);
  CHECK(w.std_error > 0.0);
  const BootstrapW1 again = bootstrap_w1(a, b, 20, 7);
  CHECK(again.replicates == w.replicates);
  const Estimate f = w1_noise_floor(a, b, 20, 7);
  CHECK(f.mean > 0.0);
}

TEST_CASE("ErgodicReport JSON keys") {
  const std::string j = ErgodicReport{1, 2, 1.5, 0.1, 0.1, 2}.to_json();
  for (const char* k : {"lower", "upper", "empirical_w1", "bootstrap_se", "rate", "vartheta"}) {
    CHECK(j.find(std::string("\"") + k + "\"") != std::string::npos);
  }
}
