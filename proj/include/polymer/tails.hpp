// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "polymer/charges.hpp"
#include "polymer/lattice.hpp"
#include "polymer/rng.hpp"
#include "polymer/stats.hpp"

namespace polymer {

// ---------------------------------------------------------------------------
// Exact oracle

/// Exact law of H_n for Rademacher charges by enumerating all
/// (2d+1)^(n-1) trajectories and 2^n sign patterns. Masses are
/// counts / denominator.
struct ExactHDistribution {
  std::int64_t n = 0;
  int d = 3;
  std::map<std::int64_t, std::uint64_t> counts;
  std::uint64_t denominator = 1;

  double pmf(std::int64_t h) const;
  double mean() const;
  double variance() const;
  /// P(H <= -x).
  double lower_tail(double x) const;
};

ExactHDistribution exact_h_distribution(std::int64_t n, int d = 3);

// ---------------------------------------------------------------------------
// Naive Monte Carlo

/// Fraction of (walk, charges) samples with X_check <= -x.
TailEstimate naive_tail(std::int64_t n, int d, const ChargeDistribution& dist, double x,
                        std::int64_t samples, Rng& rng);

/// Empirical law of H_n over `samples` draws, keyed by H (Rademacher only).
std::map<std::int64_t, std::int64_t> sample_h_histogram(std::int64_t n, int d,
                                                        std::int64_t samples, Rng& rng);

// ---------------------------------------------------------------------------
// Charge factor: Q(sum_i q_i^2 <= M) for independent sites with local times l_i

struct ChargeFactor {
  double log_p = 0.0;
  double rel_stderr = 0.0;
  double theta = 0.0;  // exponential tilt used
  bool exact_zero = false;
};

ChargeFactor square_sum_below(const std::vector<std::int64_t>& local_times, double bound,
                              const ChargeDistribution& dist, std::int64_t samples, Rng& rng);

// ---------------------------------------------------------------------------
// Folding strategy lower bound

struct StrategyConfig {
  std::int64_t T = 0;          // 0: derive from (n, d, x)
  double target_volume = 0.0;  // 0: derive from (n, d, x)
  double delta0 = 0.5;
  double eps0 = 0.25;
  double delta = 0.1;
  double eps_prime = 0.05;  // B_n = {|l_n|_2 <= x n^{-eps'}}, monitored only
};

struct StrategyBudget {
  std::int64_t particles = 400;
  int replicates = 4;
  std::int64_t profiles = 24;  // survivors evaluated per replicate
  std::int64_t charge_samples = 1000;
  std::int64_t interval = 0;   // splitting checkpoint spacing, 0: automatic
};

/// Geometry: T = n and |B| = (T^3/x^2)^{d/(d+2)} for d = 3;
/// T = (4/eps0) x and |B| = x^{d/(d+2)} for d >= 4.
StrategyConfig derive_strategy(std::int64_t n, int d, double x, StrategyConfig base = {});

struct StrategyEstimate {
  TailEstimate estimate;
  std::int64_t T = 0;
  double radius = 0.0;
  double target_volume = 0.0;
  std::int64_t volume = 0;
  double log_walk_factor = 0.0;      // log P(tau > T)
  double walk_rel_stderr = 0.0;
  double occupation_fraction = 0.0;  // among evaluated survivors
  double mean_log_charge_factor = 0.0;
  double bn_failure_fraction = 0.0;  // among evaluated survivors
  std::int64_t profiles_evaluated = 0;
};

/// Validates cfg; throws std::invalid_argument when delta0 T/|B| < 2,
/// eps0 outside (0,1) or delta <= 0.
StrategyEstimate strategy_lower_bound(std::int64_t n, int d, double x, const StrategyConfig& cfg,
                                      const StrategyBudget& budget, const ChargeDistribution& dist,
                                      Rng& rng);

// ---------------------------------------------------------------------------
// Moderate-deviation strategy over doubly visited sites

struct D2Estimate {
  TailEstimate estimate;
  double gamma1 = 0.0;
  double qualifying_fraction = 0.0;   // P(|D_n(2)| / n >= gamma1)
  double mean_d2_fraction = 0.0;      // E |D_n(2)| / n
  double envelope_rate = 0.0;         // 1 / (2 gamma1_hat chi1)
};

D2Estimate d2_moderate_strategy(std::int64_t n, int d, double xi, double gamma0, double delta,
                                std::int64_t walks, const ChargeDistribution& dist,
                                std::int64_t charge_samples, Rng& rng);

// ---------------------------------------------------------------------------
// Tilting upper bound

struct UpperBound {
  double log_bound = 0.0;  // may exceed 0, in which case the bound is trivial
  double rel_stderr = 0.0;
  std::int64_t samples = 0;
  double bound() const;
  double std_error() const { return bound() * rel_stderr; }
};

/// Gamma_hat(x) = x for x >= 1, chi1 x^2 for x < 1.
double gamma_envelope(double x, double chi1);

/// exp(-lambda x / y) * E0[exp(sum_z Gamma_hat(lambda l(z) / y))] by Monte Carlo.
UpperBound tilted_upper_bound(std::int64_t n, int d, double x, double lambda, double y,
                              std::int64_t walk_samples, const ChargeDistribution& dist, Rng& rng);

// ---------------------------------------------------------------------------
// Regression and diagnostics

enum class FitScale { linear, log_linear, log_log };

struct ExponentFit {
  std::vector<double> abscissas;
  std::vector<double> ordinates;
  double slope = 0.0;
  double intercept = 0.0;
  double half_width = 0.0;  // 95% jackknife confidence half-width
  double residual_ss = 0.0;
};

/// OLS slope of transformed (scale, value) pairs; log_log fits log value vs log scale.
ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& points,
                         FitScale scale = FitScale::log_log);

/// C_Y (n tail(t/2) + exp(-t^2 / (20 n))).
double nagaev_envelope(std::int64_t n, double t, double c_y,
                       const std::function<double(double)>& tail_fn);

/// P0(|{z : l_n(z) >= y}| >= y^{d/2}) for each y on common walk samples.
std::vector<TailEstimate> conjecture_probe(std::int64_t n, int d, const std::vector<double>& ys,
                                           std::int64_t samples, Rng& rng);

}  // namespace polymer
