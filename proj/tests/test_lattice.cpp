// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "polymer/lattice.hpp"

using namespace polymer;

TEST_CASE("trajectory positions follow the move encoding") {
  const Trajectory t(3, {1, 1, 4, 0, 6, 2});
  REQUIRE(t.size() == 7);
  CHECK(t.position(0) == Site{0, 0, 0});
  CHECK(t.position(2) == Site{2, 0, 0});
  CHECK(t.position(3) == Site{2, -1, 0});
  CHECK(t.position(4) == Site{2, -1, 0});
  CHECK(t.position(5) == Site{2, -1, -1});
  CHECK(t.position(6) == Site{1, -1, -1});
  CHECK(t.max_abs_coord() == 2);
  CHECK_THROWS_AS(Trajectory(3, {7}), std::invalid_argument);
}

TEST_CASE("local times and their functionals") {
  const Trajectory t(2, {0, 1, 2, 0, 1});  // 0,0,e1,0,0,e1
  const LocalTimeField f = local_times(t);
  CHECK(f.total() == 6);
  CHECK(f.count(Site{0, 0}) == 4);
  CHECK(f.count(Site{1, 0}) == 2);
  CHECK(range_size(f) == 2);
  CHECK(f.max_count() == 4);
  CHECK(q_norm(f, 2.0) == doctest::Approx(20.0));
  CHECK_THROWS_AS(q_norm(f, 1.0), std::invalid_argument);
  const auto h = level_histogram(f);
  REQUIRE(h.size() == 5);
  CHECK(h[2] == 1);
  CHECK(h[4] == 1);
  const LevelCount lc = level_counts(f, 1.0, 3.0);
  CHECK(lc.sites == 1);
  CHECK(lc.mass == 2);
}

TEST_CASE("local time field bookkeeping") {
  LocalTimeField f(3, 10);
  CHECK(f.add(Site{1, 2, 3}) == 1);
  CHECK(f.add(Site{1, 2, 3}, 2) == 3);
  CHECK(f.add(Site{1, 2, 3}, -3) == 0);
  CHECK(f.size() == 0);
  CHECK(f.add(Site{0, 0, 0}, 0) == 0);
  CHECK(f.size() == 0);
  CHECK_THROWS(f.add(Site{0, 0, 1}, -1));
  CHECK_THROWS(f.add(Site{11, 0, 0}));
}

TEST_CASE("site codec round trip") {
  const SiteCodec c(4, 1000);
  REQUIRE(c.packable());
  const Site s{-1000, 17, 0, 999};
  CHECK(c.unpack(c.pack(s)) == s);
  CHECK_FALSE(SiteCodec(8, 1 << 20).packable());
}

TEST_CASE("walk steps are uniform over the 2d+1 moves") {
  Rng rng(5);
  const Trajectory t = sample_walk(70001, 3, rng);
  std::vector<double> counts(7, 0.0);
  for (auto m : t.moves()) counts[m] += 1.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi2 < 22.46);
  CHECK(local_times(t).total() == 70001);
}

TEST_CASE("large walks switch to generic keys transparently") {
  Rng rng(8);
  const Trajectory t = sample_walk(5000, 8, rng);
  const LocalTimeField f = local_times(t);
  CHECK(f.total() == 5000);
  std::int64_t sum = 0;
  f.for_each([&](const Site&, std::int64_t c) { sum += c; });
  CHECK(sum == 5000);
}

TEST_CASE("mean squared displacement of the lazy walk") {
  Rng rng(21);
  const int walks = 4000, n = 101;
  double msd = 0.0;
  for (int w = 0; w < walks; ++w) msd += static_cast<double>(sample_walk(n, 3, rng).position(n - 1).norm2());
  msd /= walks;
  // E|S_m|^2 = m * 6/7 with m = n - 1 steps.
  CHECK(msd == doctest::Approx(100.0 * 6.0 / 7.0).epsilon(0.05));
}
