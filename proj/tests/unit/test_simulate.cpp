#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "msb/laplace.hpp"
#include "msb/simulate.hpp"

using namespace msb;
using fixtures::imm0;
using fixtures::mech0;
using fixtures::zscore;

namespace {

EnsembleOptions small(std::size_t replicas, std::uint64_t seed = 42) {
  EnsembleOptions o;
  o.replicas = replicas;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("origin is absorbing") {
  Philox rng = stream(1, 0);
  const PathRecord p = simulate_msb(mech0(), {0.0, 0}, 1.0, 1e-2, rng);
  for (const auto& s : p.states) CHECK(s == MixedState{0.0, 0});
  CHECK(p.jumps.empty());
}

TEST_CASE("deterministic linear case") {
  BranchingMechanism m;
  m.a11 = 0.7;
  Philox rng = stream(1, 0);
  const PathRecord p = simulate_msb(m, {2.0, 3}, 1.0, 1e-4, rng);
  CHECK(p.final_state().y1 == doctest::Approx(2.0 * std::exp(-0.7)).epsilon(1e-4));
  CHECK(p.final_state().y2 == 3);
}

TEST_CASE("pure drift immigration") {
  ImmigrationMechanism drift;
  drift.b = 1.0;
  Philox rng = stream(1, 0);
  const PathRecord p = simulate_msbi(BranchingMechanism{}, drift, {0.5, 2}, 1.5, 1e-3, rng);
  CHECK(p.final_state().y1 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(p.final_state().y2 == 2);
}

TEST_CASE("zero immigration reproduces the MSB path") {
  Philox a = stream(9, 3), b = stream(9, 3);
  const PathRecord p = simulate_msb(mech0(), {1.0, 1}, 1.0, 1e-3, a);
  const PathRecord q = simulate_msbi(mech0(), ImmigrationMechanism{}, {1.0, 1}, 1.0, 1e-3, b);
  CHECK(p.states == q.states);
  CHECK(p.times == q.times);
}

TEST_CASE("path invariants") {
  const auto m = mech0();
  std::set<std::pair<double, std::int64_t>> sizes;
  for (const auto& a : m.n1.atoms) sizes.insert({a.z1, a.z2});
  for (const auto& a : m.n2.atoms) sizes.insert({a.z1, a.z2});
  for (std::uint64_t i = 0; i < 20; ++i) {
    Philox rng = stream(5, i);
    const PathRecord p = simulate_msb(m, {1.0, 1}, 2.0, 1e-3, rng);
    CHECK(std::is_sorted(p.times.begin(), p.times.end()));
    for (const auto& s : p.states) {
      REQUIRE(s.y1 >= 0.0);
      REQUIRE(s.y2 >= 0);
    }
    for (const auto& j : p.jumps) CHECK(sizes.count({j.dy1, j.dy2}) == 1);
    // y2 moves only at jumps
    std::int64_t y2 = 1;
    for (std::size_t k = 0; k < p.states.size(); ++k) {
      if (!p.kinds[k]) CHECK(p.states[k].y2 == y2);
      y2 = p.states[k].y2;
    }
  }
}

TEST_CASE("path CSV") {
  Philox rng = stream(5, 0);
  const PathRecord p = simulate_msbi(mech0(), imm0(), {1.0, 1}, 0.5, 1e-2, rng);
  const std::string csv = p.to_csv();
  CHECK(csv.rfind("t,y1,y2,event\n", 0) == 0);
  CHECK(csv.find(",step\n") != std::string::npos);
}

TEST_CASE("step-size guard") {
  Philox rng = stream(5, 0);
  CHECK_THROWS_AS(simulate_msb(mech0(), {1000.0, 1000}, 1.0, 1e-2, rng), NumericError);
  CHECK_THROWS_AS(simulate_msb(mech0(), {1.0, 1}, 1.0, 0.0, rng), ValidationError);
}

TEST_CASE("ensemble determinism and stream contract") {
  const auto m = mech0();
  const EnsembleSample a = ensemble(m, nullptr, {1.0, 1}, 0.5, small(200));
  EnsembleOptions two = small(200);
  two.threads = 3;
  const EnsembleSample b = ensemble(m, nullptr, {1.0, 1}, 0.5, two);
  CHECK(a.rows == b.rows);
  CHECK(a.to_csv() == b.to_csv());
  CHECK(a.to_csv().rfind("replica,y1,y2\n", 0) == 0);
  CHECK(a.config_digest == b.config_digest);

  const EnsembleSample one = ensemble(m, nullptr, {1.0, 1}, 0.5, small(1));
  Philox rng = stream(42, 0);
  CHECK(one.rows[0] == simulate_msb(m, {1.0, 1}, 0.5, 1e-3, rng).final_state());

  const EnsembleSample c = ensemble(m, nullptr, {1.0, 1}, 0.6, small(200));
  CHECK(c.config_digest != a.config_digest);
  CHECK(a.sidecar_json().find("\"seed\": 42") != std::string::npos);
}

TEST_CASE("ensemble Laplace functional and mean") {
  const auto m = mech0();
  const EnsembleSample s = ensemble(m, nullptr, {1.0, 1}, 1.0, small(20000, 11));
  CHECK(s.stats.positivity_violations == 0);
  const Estimate lap = empirical_laplace(s, {1, 1});
  CHECK(zscore(lap.mean, lap.std_error, transition_laplace(m, {1.0, 1}, {1, 1}, 1.0)) <= 3.0);
  const auto [m1, m2] = empirical_mean(s.rows);
  const Vec2 mean = mean_state(m, {1.0, 1}, 1.0);
  CHECK(zscore(m1.mean, m1.std_error, mean.x1) <= 3.0);
  CHECK(zscore(m2.mean, m2.std_error, mean.x2) <= 3.0);
}

TEST_CASE("immigration ensemble mean") {
  const auto m = mech0();
  const ImmigrationMechanism imm = imm0();
  const EnsembleSample s = ensemble(m, &imm, {0.0, 0}, 1.0, small(20000, 12));
  const auto [m1, m2] = empirical_mean(s.rows);
  const Vec2 mean = mean_state_imm(m, imm, {0.0, 0}, 1.0);
  CHECK(zscore(m1.mean, m1.std_error, mean.x1) <= 3.0);
  CHECK(zscore(m2.mean, m2.std_error, mean.x2) <= 3.0);
}

TEST_CASE("empirical_laplace edge cases") {
  const std::vector<MixedState> zeros(10, MixedState{0.0, 0});
  const Estimate a = empirical_laplace(zeros, {1, 1});
  CHECK(a.mean == 1.0);
  CHECK(a.std_error == 0.0);
  const std::vector<MixedState> rows{{1.0, 2}, {3.0, 0}};
  const Estimate b = empirical_laplace(rows, {0, 0});
  CHECK(b.mean == 1.0);
  CHECK(b.std_error == 0.0);
}

TEST_CASE("first_large_jump") {
  PathRecord p;
  p.times = {0.0, 0.1, 0.2};
  p.states = {{1.0, 1}, {1.5, 0}, {2.5, 1}};
  p.kinds = {std::nullopt, JumpSource::kN2, JumpSource::kN1};
  p.jumps = {{0.1, JumpSource::kN2, 0, 0.5, -1}, {0.2, JumpSource::kN1, 0, 1.0, 1}};
  CHECK_FALSE(first_large_jump(p, {5.0, 5.0}));
  CHECK(*first_large_jump(p, {0.6, 0.0}) == doctest::Approx(0.2));
  CHECK(*first_large_jump(p, {0.0, 0.0}, JumpCriterion::kEither) == doctest::Approx(0.1));
  CHECK(*first_large_jump(p, {0.0, -2.0}) == doctest::Approx(0.1));
}

TEST_CASE("first jump times and survival") {
  const auto m = mech0();
  const auto far = first_jump_times(m, {1.0, 1}, {10, 10}, 1.0, small(100));
  for (double t : far) CHECK(std::isinf(t));
  const auto times = first_jump_times(m, {1.0, 1}, {0.6, 0.0}, 1.0, small(20000, 13));
  const double analytic = survival_tau(m, {1.0, 1}, {0.6, 0.0}, 1.0).at(1.0);
  const Estimate e = empirical_survival(times, 1.0);
  CHECK(zscore(e.mean, e.std_error, analytic) <= 3.0);
  CHECK(empirical_survival(times, 0.0).mean == 1.0);
}

TEST_CASE("integrated functional Monte Carlo") {
  const auto m = mech0();
  const Estimate e = integrated_functional_mc(m, {1.0, 1}, {1, 1}, 1.0, small(10000, 14));
  CHECK(zscore(e.mean, e.std_error, integrated_functional(m, {1.0, 1}, {1, 1}, 1.0)) <= 3.0);
  const Estimate z = integrated_functional_mc(m, {1.0, 1}, {0, 0}, 1.0, small(10));
  CHECK(z.mean == 1.0);
}

TEST_CASE("branching property at the ensemble level") {
  const auto m = mech0();
  const Vec2 l{0.8, 0.5};
  const Estimate whole = empirical_laplace(ensemble(m, nullptr, {1.5, 2}, 0.5, small(20000, 15)), l);
  const Estimate a = empirical_laplace(ensemble(m, nullptr, {1.0, 1}, 0.5, small(20000, 16)), l);
  const Estimate b = empirical_laplace(ensemble(m, nullptr, {0.5, 1}, 0.5, small(20000, 17)), l);
  const double prod = a.mean * b.mean;
  const double se = std::hypot(whole.std_error, std::hypot(a.std_error * b.mean, b.std_error * a.mean));
  CHECK(std::fabs(whole.mean - prod) <= 3.0 * se);
}
