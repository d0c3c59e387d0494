// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "polymer/gibbs.hpp"
#include "polymer/stats.hpp"

using namespace polymer;

TEST_CASE("exact gibbs law for two monomers") {
  // Only the stay move puts both monomers together; its weight is
  // E exp(-2 beta eta_1 eta_2) = cosh(2 beta).
  const double b = 0.7;
  const ExactGibbsLaw law = exact_gibbs_law(2, 3, b);
  REQUIRE(law.probs.size() == 7);
  const double z = std::cosh(2.0 * b) + 6.0;
  CHECK(law.probs[0] == doctest::Approx(std::cosh(2.0 * b) / z));
  CHECK(law.probs[3] == doctest::Approx(1.0 / z));
  CHECK(law.log_z == doctest::Approx(std::log(z / 7.0)));
  CHECK(law.mean_energy == doctest::Approx(-2.0 * std::sinh(2.0 * b) / z));
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((GibbsConfig{2, 3, -1.0, 0.4}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GibbsConfig{1, 3, 1.0, 0.4}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((GibbsConfig{4, 9, 1.0, 0.4}.validate()), std::invalid_argument);
  CHECK(GibbsConfig{32, 3, 2.0, 0.4}.beta_eff() == doctest::Approx(2.0 * std::pow(32.0, -0.4)));
}

TEST_CASE("log weight needs a covering table") {
  LocalTimeField f(3, 4);
  f.add(Site{0, 0, 0}, 5);
  CHECK_THROWS_AS(log_weight(f, WeightTable(4, 0.1)), std::out_of_range);
  CHECK(log_weight(f, WeightTable(5, 0.1)) == doctest::Approx(rademacher_weight(5, 0.1).log_w));
}

TEST_CASE("chain samples the exact law for three monomers") {
  const double beta_eff = 0.5;
  const ExactGibbsLaw law = exact_gibbs_law(3, 3, beta_eff);
  GibbsChain chain(3, 3, beta_eff, Rng(99));
  std::vector<double> freq(law.probs.size(), 0.0);
  const std::int64_t steps = 300000;
  for (std::int64_t t = 0; t < steps; ++t) {
    chain.step();
    freq[chain.state_code()] += 1.0;
  }
  for (auto& f : freq) f /= static_cast<double>(steps);
  CHECK(total_variation(freq, law.probs) < 0.02);
  CHECK(chain.audits() >= 30);
  CHECK(chain.acceptance_rate() > 0.0);
  CHECK_NOTHROW(chain.audit());
}

TEST_CASE("cached weight stays consistent on long walks") {
  GibbsChain chain(200, 3, 0.3, Rng(5));
  chain.run(30000);
  CHECK_NOTHROW(chain.audit());
  CHECK(chain.field().total() == 200);
  CHECK(chain.max_local_time() >= 1);
}

TEST_CASE("log partition by integration matches enumeration") {
  const GibbsConfig cfg{3, 3, 1.0, 0.4};
  ChainBudget budget;
  budget.steps = 40000;
  budget.thin = 1;
  Rng rng(12);
  const LogPartitionProfile p = log_partition(cfg, {0.0, 0.5, 1.0}, budget, rng);
  REQUIRE(p.points.size() == 3);
  CHECK(p.points[0].log_z == 0.0);
  const double exact = exact_gibbs_law(3, 3, cfg.beta_eff()).log_z;
  CHECK(std::abs(p.points[2].log_z - exact) < 0.02 + 3.0 * p.points[2].error);
  CHECK(p.points[2].log_z >= 0.0);
  CHECK_THROWS(log_partition(cfg, {0.5, 1.0}, budget, rng));
}

TEST_CASE("mean energy at zero temperature parameter is zero") {
  ChainBudget budget;
  budget.steps = 20000;
  Rng rng(13);
  const EnergyEstimate e = mean_energy(GibbsConfig{50, 3, 0.0, 0.4}, budget, rng);
  CHECK(std::abs(e.mean) < 4.0 * e.std_error + 1e-9);
}

TEST_CASE("mid-level counting and phase cell validation") {
  LocalTimeField f(3, 10);
  f.add(Site{0, 0, 0}, 6);
  f.add(Site{1, 0, 0}, 1);
  // n = 1024: n^{2/5} = 16, so a = 4 covers levels [4, 64].
  CHECK(mid_level_count(f, 1024, 4.0) == 1);
  CHECK(mid_level_count(f, 1024, 2.0) == 0);
  Rng rng(1);
  CHECK_THROWS(phase_cell(64, 1.0, 0.4, {1.0}, {2.0}, ChainBudget{}, 3, rng));
  CHECK_THROWS(phase_cell(64, 1.0, 0.4, {2.0}, {0.0}, ChainBudget{}, 3, rng));
}

TEST_CASE("phase scan records failed cells and continues") {
  ChainBudget budget;
  budget.steps = 2000;
  budget.thin = 10;
  Rng rng(2);
  const auto cells = phase_scan({64}, {-1.0, 1.0}, {2.0}, {2.0}, budget, rng);
  REQUIRE(cells.size() == 2);
  CHECK_FALSE(cells[0].error.empty());
  CHECK(cells[1].error.empty());
  CHECK(cells[1].samples > 0);
}
