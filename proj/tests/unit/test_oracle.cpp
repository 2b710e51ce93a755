#include <cmath>
#include <numeric>

#include "doctest.h"
#include "msb/laplace.hpp"
#include "msb/oracle.hpp"

using namespace msb;

namespace {

const std::vector<double> kBinary{0.5, 0.0, 0.5};

}  // namespace

TEST_CASE("db_generator") {
  const auto two = db_generator(1.5, {0.3, 0.2, 0.5}, 2);
  CHECK(two.at(0, 0) == 0.0);
  CHECK(two.at(0, 1) == 0.0);
  CHECK(-two.at(1, 1) == doctest::Approx(1.5 * 0.8));

  const auto death = db_generator(1.0, {1.0}, 10);
  for (std::size_t i = 1; i < 10; ++i) {
    CHECK(death.at(i, i - 1) == doctest::Approx(static_cast<double>(i)));
    if (i + 1 < 10) CHECK(death.at(i, i + 1) == 0.0);
  }

  const auto bin = db_generator(2.0, kBinary, 200);
  for (std::size_t i = 0; i <= 100; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < 200; ++j) {
      if (j != i) {
        CHECK(bin.at(i, j) >= 0.0);
        off += bin.at(i, j);
      }
    }
    CHECK(off == doctest::Approx(2.0 * static_cast<double>(i)));
  }
  for (std::size_t i = 0; i < 200; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < 200; ++j) row += bin.at(i, j);
    CHECK(row <= 1e-12);
  }
}

TEST_CASE("ctmc_transition_row") {
  const auto gen = db_generator(2.0, kBinary, 400);
  const TransitionRow r0 = ctmc_transition_row(gen, 5, 0.0);
  CHECK(r0.prob[5] == 1.0);
  CHECK(std::accumulate(r0.prob.begin(), r0.prob.end(), 0.0) == 1.0);
  const TransitionRow abs = ctmc_transition_row(gen, 0, 3.0);
  CHECK(abs.prob[0] == doctest::Approx(1.0).epsilon(1e-12));

  const TransitionRow r = ctmc_transition_row(gen, 1, 1.0);
  const double sum = std::accumulate(r.prob.begin(), r.prob.end(), 0.0);
  CHECK(sum <= 1.0 + 1e-12);
  CHECK(sum >= 1.0 - r.leak_bound);
  for (double z : {0.0, 0.3, 0.7}) {
    const double f = db_flow(2.0, kBinary, z, 1.0, 1e-4).final_value();
    CHECK(std::fabs(row_generating_function(r, z) - f) <= 1e-6 + r.leak_bound);
  }
}

TEST_CASE("branching property of the truncated chain") {
  const auto gen = db_generator(2.0, kBinary, 400);
  const TransitionRow r1 = ctmc_transition_row(gen, 1, 1.0);
  for (std::size_t i = 2; i <= 3; ++i) {
    const TransitionRow ri = ctmc_transition_row(gen, i, 1.0);
    for (double z : {0.1, 0.5, 0.9}) {
      CHECK(std::fabs(row_generating_function(ri, z) -
                      std::pow(row_generating_function(r1, z), static_cast<double>(i))) <=
            1e-5 + ri.leak_bound + r1.leak_bound);
    }
  }
}

TEST_CASE("riccati_closed_form") {
  CHECK(riccati_closed_form(0.5, 0.3, 1.7, 0.0) == 1.7);
  CHECK(riccati_closed_form(0.5, 0.0, 1.7, 2.0) == doctest::Approx(1.7 * std::exp(-1.0)));
  CHECK(riccati_closed_form(0.0, 0.3, 2.0, 1.5) == doctest::Approx(2.0 / (1.0 + 0.9)));
  CHECK(riccati_closed_form(0.5, 0.3, 1.0, 1.0) == doctest::Approx(0.490688).epsilon(1e-6));
  // ODE residual by central differences
  const double h = 1e-5;
  for (double t = 0.1; t < 5.0; t += 0.1) {
    const double v = riccati_closed_form(0.5, 0.3, 1.0, t);
    const double dv = (riccati_closed_form(0.5, 0.3, 1.0, t + h) -
                       riccati_closed_form(0.5, 0.3, 1.0, t - h)) / (2 * h);
    CHECK(std::fabs(dv + 0.5 * v + 0.3 * v * v) <= 1e-9);
  }
}

TEST_CASE("riccati blow-up") {
  CHECK(std::isinf(riccati_blowup_time(0.5, 0.3, 1.0)));
  // dV/dt = V + V^2 from 1 blows up at log 2
  CHECK(riccati_blowup_time(-1.0, -1.0, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(riccati_closed_form(-1.0, -1.0, 1.0, 1.0), NumericError);
}

TEST_CASE("w1_bruteforce") {
  const std::vector<Vec2> a{{0, 0}, {1, 0}};
  CHECK(w1_bruteforce(a, a) == 0.0);
  CHECK(w1_bruteforce(a, {{1, 0}, {0, 0}}) == 0.0);
  CHECK(w1_bruteforce({{0, 0}}, {{3, 4}}) == doctest::Approx(5.0));
  CHECK_THROWS(w1_bruteforce(std::vector<Vec2>(8), std::vector<Vec2>(8)));
}
