// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "polymer/confinement.hpp"

using namespace polymer;

TEST_CASE("ball volumes") {
  CHECK(Ball(3, 1.0).volume() == 7);
  CHECK(Ball(3, std::sqrt(2.0)).volume() == 19);
  CHECK(Ball(3, std::sqrt(3.0)).volume() == 27);
  CHECK(Ball(4, 1.0).volume() == 9);
  CHECK(Ball::with_volume(3, 20.0).volume() == 19);
  const Ball b(3, 1.0);
  CHECK(b.site(b.origin()) == Site{0, 0, 0});
  CHECK(b.neighbor(b.origin(), 1) >= 0);
  CHECK(b.neighbor(b.neighbor(b.origin(), 1), 1) == -1);
}

TEST_CASE("survival in the unit ball for two steps is 19/49") {
  // From the origin every move stays inside; from a neighbour only the
  // stay move and the return to the origin do: 1/7 + (6/7)(2/7).
  const double exact = 19.0 / 49.0;
  Rng rng(1);
  const TailEstimate rej = survival_probability(2, 1.0, 3, SurvivalMethod::rejection, 200000, rng);
  CHECK(std::abs(rej.p_hat - exact) < 4.0 * rej.std_error);
  const TailEstimate spl = survival_probability(2, 1.0, 3, SurvivalMethod::splitting, 20000, rng, 8);
  CHECK(std::abs(spl.p_hat - exact) < 4.0 * spl.std_error + 1e-3);
}

TEST_CASE("splitting agrees with rejection on a moderate event") {
  Rng rng(2);
  const TailEstimate rej = survival_probability(40, 2.0, 3, SurvivalMethod::rejection, 200000, rng);
  const TailEstimate spl = survival_probability(40, 2.0, 3, SurvivalMethod::splitting, 5000, rng, 8);
  REQUIRE(rej.p_hat > 0.0);
  const double se = std::hypot(rej.std_error, spl.std_error);
  CHECK(std::abs(rej.p_hat - spl.p_hat) < 4.0 * se);
}

TEST_CASE("confined walks stay inside the ball") {
  Rng rng(4);
  int survived = 0;
  for (int i = 0; i < 2000 && survived < 20; ++i) {
    const ConfinementResult r = sample_confined_walk(10, 2.0, 3, rng);
    if (!r.survived) continue;
    ++survived;
    REQUIRE(r.trajectory.has_value());
    for (std::int64_t k = 0; k < r.trajectory->size(); ++k) CHECK(r.trajectory->position(k).norm2() <= 4);
  }
  CHECK(survived > 0);
}

TEST_CASE("splitting log-survival decays linearly in T") {
  Rng rng(6);
  const Ball ball(3, 2.0);
  SplittingOptions opts;
  opts.particles = 2000;
  opts.replicates = 4;
  const double l1 = run_splitting(ball, 200, opts, rng).log_survival;
  const double l2 = run_splitting(ball, 400, opts, rng).log_survival;
  CHECK(l2 / l1 == doctest::Approx(2.0).epsilon(0.08));
}
