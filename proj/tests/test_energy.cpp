// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <bit>
#include <cmath>
#include <stdexcept>

#include "polymer/energy.hpp"

using namespace polymer;

namespace {

double brute_force_h(const Trajectory& t, const ChargeSequence& q) {
  double h = 0.0;
  for (std::int64_t i = 0; i < t.size(); ++i)
    for (std::int64_t j = 0; j < t.size(); ++j)
      if (i != j && t.position(i) == t.position(j))
        h += q.values[static_cast<std::size_t>(i)] * q.values[static_cast<std::size_t>(j)];
  return h;
}

}  // namespace

TEST_CASE("energy methods agree with the ordered-pair double sum") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + trial % 4;
    const std::int64_t n = 1 + rng.below(60);
    const auto kind = trial % 2 ? ChargeKind::gaussian : ChargeKind::rademacher;
    const Trajectory t = sample_walk(n, d, rng);
    const ChargeSequence q = sample_charges(n, ChargeDistribution(kind), rng);
    const double ref = brute_force_h(t, q);
    CHECK(hamiltonian(t, q, EnergyMethod::direct) == doctest::Approx(ref).epsilon(1e-12));
    CHECK(hamiltonian(t, q, EnergyMethod::per_site) == doctest::Approx(ref).epsilon(1e-12));
    const EnergyBreakdown b = decompose(t, q);
    CHECK(b.H == doctest::Approx(b.X_check + b.Y).epsilon(1e-12));
    CHECK(x_check(t, q) == doctest::Approx(b.X_check).epsilon(1e-12));
    if (kind == ChargeKind::rademacher) {
      CHECK(b.Y == 0.0);
      CHECK(b.H >= -static_cast<double>(n));
    }
  }
}

TEST_CASE("a walk that never moves carries all charge at one site") {
  const Trajectory t(3, {0, 0, 0});
  ChargeSequence q;
  q.values = {1.0, 1.0, -1.0, 1.0};
  // q(0) = 2, l = 4: H = q^2 - sum eta^2 = 0.
  CHECK(hamiltonian(t, q) == 0.0);
  q.values = {1.0, 1.0, 1.0, 1.0};
  CHECK(hamiltonian(t, q) == 12.0);
  q.values = {1.0, 1.0};
  CHECK_THROWS_AS(hamiltonian(t, q), std::invalid_argument);
}

TEST_CASE("site variance formula against exhaustive enumeration") {
  const ChargeDistribution rad(ChargeKind::rademacher);
  for (std::int64_t l = 1; l <= 14; ++l) {
    double sum = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << l); ++mask) {
      const double s = 2.0 * std::popcount(mask) - static_cast<double>(l);
      sum += (s * s - l) * (s * s - l);
    }
    const double exact = sum / static_cast<double>(1u << l);
    const SiteVariance v = site_variance_formula(l, rad);
    CHECK(v.exact == doctest::Approx(exact).epsilon(1e-14));
    CHECK(v.lower <= exact + 1e-12);
    CHECK(exact <= v.upper + 1e-12);
  }
  CHECK_THROWS_AS(site_variance_formula(0, rad), std::invalid_argument);
}

TEST_CASE("site variance formula for gaussian charges by Monte Carlo") {
  Rng rng(77);
  const ChargeDistribution g(ChargeKind::gaussian);
  const std::int64_t l = 5;
  double s1 = 0.0, s2 = 0.0;
  const int draws = 200000;
  for (int i = 0; i < draws; ++i) {
    const ChargeSequence q = sample_charges(l, g, rng);
    double s = 0.0;
    for (double v : q.values) s += v;
    const double y = (s * s - l) * (s * s - l);
    s1 += y;
    s2 += y * y;
  }
  const double mean = s1 / draws;
  const double se = std::sqrt((s2 / draws - mean * mean) / draws);
  // For gaussian charges q is N(0, l), so E(q^2 - l)^2 = 2 l^2.
  CHECK(site_variance_formula(l, g).exact == doctest::Approx(2.0 * l * l));
  CHECK(std::abs(mean - 2.0 * l * l) < 5.0 * se);
}
