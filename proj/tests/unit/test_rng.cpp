#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "doctest.h"
#include "msb/rng.hpp"

using namespace msb;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  // Random123 kat_vectors
  CHECK(Philox::round10({0, 0, 0, 0}, {0, 0}) ==
        Philox::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox::round10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                        {0xffffffffu, 0xffffffffu}) ==
        Philox::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox::round10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                        {0xa4093822u, 0x299f31d0u}) ==
        Philox::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
  Philox a = stream(42, 7), b = stream(42, 7), c = stream(42, 8), d = stream(43, 7);
  std::vector<std::uint32_t> va, vb, vc, vd;
  for (int i = 0; i < 64; ++i) {
    va.push_back(a());
    vb.push_back(b());
    vc.push_back(c());
    vd.push_back(d());
  }
  CHECK(va == vb);
  CHECK(va != vc);
  CHECK(va != vd);
}

TEST_CASE("uniform lies in (0, 1) with the right mean") {
  Philox r = stream(1, 0);
  double s = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    s += u;
  }
  CHECK(std::fabs(s / n - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST_CASE("normal moments") {
  Philox r = stream(2, 0);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::fabs(s / n) < 5.0 / std::sqrt(n));
  CHECK(std::fabs(s2 / n - 1.0) < 5.0 * std::sqrt(2.0 / n));
}

TEST_CASE("poisson mean on both branches") {
  for (double mean : {0.3, 4.0, 25.0}) {
    Philox r = stream(3, static_cast<std::uint64_t>(mean * 10));
    const int n = 100000;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += static_cast<double>(r.poisson(mean));
    CHECK(std::fabs(s / n - mean) < 5.0 * std::sqrt(mean / n));
  }
  Philox r = stream(3, 99);
  CHECK(r.poisson(0.0) == 0);
}

TEST_CASE("binomial edge cases and mean") {
  Philox r = stream(4, 0);
  CHECK(r.binomial(0, 0.5) == 0);
  CHECK(r.binomial(10, 0.0) == 0);
  CHECK(r.binomial(10, 1.0) == 10);
  const int n = 20000;
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += static_cast<double>(r.binomial(50, 0.3));
  CHECK(std::fabs(s / n - 15.0) < 5.0 * std::sqrt(50 * 0.3 * 0.7 / n));
}

TEST_CASE("parallel_for covers every index once, for any worker count") {
  for (unsigned threads : {1u, 2u, 5u}) {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), threads, [&](std::size_t i) { hits[i] += 1; });
    CHECK(std::accumulate(hits.begin(), hits.end(), 0) == 1000);
    CHECK(*std::min_element(hits.begin(), hits.end()) == 1);
  }
  CHECK_THROWS_AS(parallel_for(10, 2, [](std::size_t i) {
                    if (i == 7) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
}

TEST_CASE("resolve_threads") {
  CHECK(resolve_threads(3) == 3);
  CHECK(resolve_threads(0) >= 1);
}
