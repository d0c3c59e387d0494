// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "polymer/charges.hpp"
#include "polymer/stats.hpp"

using namespace polymer;

TEST_CASE("charge laws have exact moments") {
  CHECK(ChargeDistribution(ChargeKind::rademacher).moments().fourth == 1.0);
  CHECK(ChargeDistribution(ChargeKind::gaussian).moments().fourth == 3.0);
  CHECK(ChargeDistribution(ChargeKind::uniform).moments().fourth == doctest::Approx(1.8));
  CHECK(ChargeDistribution(ChargeKind::gaussian).moments().chi1 == 4.0);
  CHECK(ChargeDistribution::from_name("gaussian").kind() == ChargeKind::gaussian);
  CHECK_THROWS_AS(ChargeDistribution::from_name("cauchy"), std::invalid_argument);
}

TEST_CASE("sampled charges match their moments") {
  Rng rng(12);
  for (auto kind : {ChargeKind::rademacher, ChargeKind::gaussian, ChargeKind::uniform}) {
    const ChargeDistribution dist(kind);
    const ChargeSequence q = sample_charges(200000, dist, rng);
    RunningStats m1, m2, m4;
    for (double v : q.values) {
      m1.add(v);
      m2.add(v * v);
      m4.add(v * v * v * v);
    }
    CHECK(std::abs(m1.mean()) < 5.0 * m1.std_error());
    CHECK(std::abs(m2.mean() - 1.0) < 5.0 * m2.std_error() + 1e-12);
    CHECK(std::abs(m4.mean() - dist.moments().fourth) < 5.0 * m4.std_error() + 1e-12);
  }
}

TEST_CASE("rademacher weight for two charges") {
  // S_2 is +-2 with probability 1/2 and 0 otherwise.
  for (double beta : {0.0, 0.1, 1.0, 5.0}) {
    const WeightPoint w = rademacher_weight(2, beta);
    CHECK(std::exp(w.log_w) == doctest::Approx((1.0 + std::exp(-4.0 * beta)) / 2.0));
    CHECK(w.mean_sq == doctest::Approx(4.0 * std::exp(-4.0 * beta) / (1.0 + std::exp(-4.0 * beta))));
  }
}

TEST_CASE("rademacher weight matches enumeration") {
  const double beta = 0.3;
  for (std::int64_t l = 1; l <= 12; ++l) {
    double w = 0.0, m = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << l); ++mask) {
      const double s = 2.0 * __builtin_popcount(mask) - static_cast<double>(l);
      w += std::exp(-beta * s * s);
      m += s * s * std::exp(-beta * s * s);
    }
    m /= w;
    w /= static_cast<double>(1u << l);
    const WeightPoint p = rademacher_weight(l, beta);
    CHECK(p.log_w == doctest::Approx(std::log(w)).epsilon(1e-12));
    CHECK(p.mean_sq == doctest::Approx(m).epsilon(1e-12));
  }
  CHECK(rademacher_weight(7, 0.0).log_w == doctest::Approx(0.0));
  CHECK(rademacher_weight(7, 0.0).mean_sq == doctest::Approx(7.0));
}

TEST_CASE("weight table range") {
  const WeightTable t(10, 0.5);
  CHECK(t.log_weight(0) == 0.0);
  CHECK(t.log_weight(2) == doctest::Approx(rademacher_weight(2, 0.5).log_w));
  CHECK_THROWS_AS(t.log_weight(11), std::out_of_range);
  CHECK_THROWS_AS(WeightTable(10, -1.0), std::invalid_argument);
}

TEST_CASE("local charges and zeta") {
  const Trajectory t(1, {0, 1, 2});  // 0, 0, 1, 0
  ChargeSequence q;
  q.values = {1.0, 1.0, -1.0, 1.0};
  const LocalCharges lc = local_charges(t, q);
  CHECK(lc.at(Site{0}) == 3.0);
  CHECK(lc.at(Site{1}) == -1.0);
  const auto z = zeta_field(local_times(t), group_charges(t, q));
  CHECK(z.at(Site{0}) == doctest::Approx(3.0));
  CHECK(z.at(Site{1}) == doctest::Approx(1.0));
  q.values.pop_back();
  CHECK_THROWS_AS(local_charges(t, q), std::invalid_argument);
}
