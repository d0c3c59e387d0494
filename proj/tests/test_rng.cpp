// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <array>
#include <cmath>
#include <set>
#include <vector>

#include "polymer/rng.hpp"
#include "polymer/stats.hpp"

using namespace polymer;

TEST_CASE("philox4x32-10 known-answer vectors") {
  using A4 = std::array<std::uint32_t, 4>;
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
  CHECK(Rng(42)() != c());
  Rng s1 = Rng(7).split(1), s1b = Rng(7).split(1), s2 = Rng(7).split(2);
  CHECK(s1.next_u64() == s1b.next_u64());
  CHECK(Rng(7).split(1).next_u64() != s2.next_u64());
  CHECK(Rng::for_task(5, 0).next_u64() != Rng::for_task(5, 1).next_u64());
  CHECK(Rng::for_task(5, 3).next_u64() == Rng::for_task(5, 3).next_u64());
}

TEST_CASE("below is uniform") {
  Rng r(11);
  std::vector<double> counts(7, 0.0);
  const int draws = 70000;
  for (int i = 0; i < draws; ++i) {
    const auto k = r.below(7);
    REQUIRE(k < 7);
    counts[k] += 1.0;
  }
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - draws / 7.0) * (c - draws / 7.0) / (draws / 7.0);
  CHECK(chi2 < 22.46);  // 0.999 quantile, 6 dof
}

TEST_CASE("uniform lies in [0,1) with mean 1/2") {
  Rng r(3);
  RunningStats st;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    st.add(u);
  }
  CHECK(std::abs(st.mean() - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / 100000.0));
}

TEST_CASE("split streams are uncorrelated") {
  Rng a = Rng(9).split(0), b = Rng(9).split(1);
  const int n = 50000;
  double sab = 0.0;
  for (int i = 0; i < n; ++i) sab += (a.uniform() - 0.5) * (b.uniform() - 0.5);
  const double corr = sab / n * 12.0;
  CHECK(std::abs(corr) < 4.0 / std::sqrt(n));
}

TEST_CASE("clopper-pearson bounds") {
  const auto [lo, hi] = clopper_pearson(0, 100);
  CHECK(lo == 0.0);
  CHECK(hi == doctest::Approx(1.0 - std::pow(0.025, 0.01)).epsilon(1e-9));
  const auto [lo2, hi2] = clopper_pearson(100, 100);
  CHECK(hi2 == 1.0);
  CHECK(lo2 == doctest::Approx(std::pow(0.025, 0.01)).epsilon(1e-9));
  const TailEstimate t = TailEstimate::from_hits(0, 1000, "x");
  CHECK(t.status == EstimateStatus::zero_hits);
  CHECK(t.upper_95 > 0.0);
  CHECK(t.upper_95 < 0.01);
}

TEST_CASE("student t quantiles") {
  CHECK(student_t975(1) == doctest::Approx(12.7062).epsilon(1e-4));
  CHECK(student_t975(3) == doctest::Approx(3.182446).epsilon(1e-6));
  CHECK(student_t975(30) == doctest::Approx(2.04227).epsilon(1e-4));
}

TEST_CASE("log-space helpers") {
  const std::vector<double> xs = {std::log(1.0), std::log(2.0), std::log(3.0)};
  CHECK(log_sum_exp(xs) == doctest::Approx(std::log(6.0)));
  CHECK(log_mean_exp(xs).first == doctest::Approx(std::log(2.0)));
  CHECK(std::exp(log_binomial_pmf(4, 2, 0.5)) == doctest::Approx(6.0 / 16.0));
  CHECK(std::exp(log_binomial_upper_tail(4, 3, 0.5)) == doctest::Approx(5.0 / 16.0));
  CHECK(std::exp(log_binomial_lower_tail(4, 1, 0.5)) == doctest::Approx(5.0 / 16.0));
  const std::vector<double> p = {0.5, 0.5, 0.0}, q = {0.25, 0.25, 0.5};
  CHECK(total_variation(p, q) == doctest::Approx(0.5));
}
