// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "polymer/green.hpp"

using namespace polymer;

TEST_CASE("first return probabilities are 1/(2d+1)") {
  // One lazy step returns only by staying; two steps return by staying twice
  // or by a move and its reverse: (1 + 2d) / (2d+1)^2.
  for (int d : {3, 4}) {
    const double p = 1.0 / (2 * d + 1);
    for (auto m : {ReturnMethod::quadrature, ReturnMethod::convolution, ReturnMethod::series}) {
      const ReturnSeries s = return_probabilities(d, 4, m);
      CHECK(s.at(1) == doctest::Approx(p).epsilon(1e-12));
      CHECK(s.at(2) == doctest::Approx(p).epsilon(1e-12));
    }
  }
}

TEST_CASE("three return methods agree term by term") {
  for (int d : {3, 4}) {
    const auto q = return_probabilities(d, 100, ReturnMethod::quadrature);
    const auto c = return_probabilities(d, 100, ReturnMethod::convolution);
    const auto s = return_probabilities(d, 100, ReturnMethod::series);
    for (std::int64_t m = 1; m <= 100; ++m) {
      CHECK(std::abs(q.at(m) - c.at(m)) / q.at(m) < 1e-9);
      CHECK(std::abs(q.at(m) - s.at(m)) / q.at(m) < 1e-9);
    }
  }
}

TEST_CASE("green constants match the known simple-walk values") {
  // The lazy walk visits the origin (2d+1)/(2d) times as often as the simple
  // walk, so c = G_srw (2d+1)/(2d) - 1 with G_srw(3) = 1.516386059,
  // G_srw(4) = 1.239467122.
  const GreenConstant c3 = c_d(3, 1e-5);
  CHECK(std::abs(c3.value - (1.516386059 * 7.0 / 6.0 - 1.0)) < 1e-5);
  CHECK(c3.tail_bound <= 1e-5);
  const GreenConstant c4 = c_d(4, 1e-5);
  CHECK(std::abs(c4.value - (1.239467122 * 9.0 / 8.0 - 1.0)) < 1e-5);
  const EscapeProbability e = escape_probability(3, 1e-5);
  CHECK(e.gamma0 == doctest::Approx(1.0 / (1.0 + c3.value)));
  CHECK_THROWS_AS(c_d(3, 1e-12, 4096), ToleranceUnreachable);
}

TEST_CASE("escape within a finite horizon") {
  CHECK(escape_within(3, 1) == doctest::Approx(6.0 / 7.0));
  // No return at step 1 and none at step 2: 1 - 1/7 - (6/7)(1/7).
  CHECK(escape_within(3, 2) == doctest::Approx(36.0 / 49.0));
  const double g0 = escape_probability(3, 1e-5).gamma0;
  CHECK(escape_within(3, 1000) > g0);
  CHECK(escape_within(3, 1000) - g0 < 0.01);
}

TEST_CASE("monte carlo return statistics agree with exact values") {
  Rng rng(17);
  const double exact = return_probabilities(3, 200, ReturnMethod::series).partial_sum();
  const ReturnCountMC mc = mc_return_count(3, 200, 100000, rng);
  CHECK(std::abs(mc.mean - exact) < 4.0 * mc.std_error);
  const TailEstimate nr = mc_never_return(3, 200, 100000, rng);
  CHECK(std::abs(nr.p_hat - escape_within(3, 200)) < 4.0 * nr.std_error);
}

TEST_CASE("green table round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "polymer_green_table.txt").string();
  const std::vector<GreenTableEntry> in = {{3, 0.769117, 0.565256, 16384, 3e-6}, {4, 0.3944, 0.717155, 8192, 1e-6}};
  write_green_table(path, in);
  const auto out = read_green_table(path);
  REQUIRE(out.size() == 2);
  CHECK(out[1].d == 4);
  CHECK(out[0].c_d == doctest::Approx(0.769117));
  CHECK(out[1].terms == 8192);
  std::remove(path.c_str());
}
