// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "polymer/charges.hpp"
#include "polymer/lattice.hpp"
#include "polymer/rng.hpp"

namespace polymer {

/// Annealed Gibbs measure for +-1 charges at effective inverse temperature
/// beta_eff = beta * n^{-s}.
struct GibbsConfig {
  std::int64_t n = 2;
  int d = 3;
  double beta = 0.0;
  double s = 0.4;

  double beta_eff() const;
  /// Throws std::invalid_argument unless beta >= 0, n >= 2 and 1 <= d <= kMaxDim.
  void validate() const;
};

/// Sum over visited sites of log W(l(z), beta); throws std::out_of_range when
/// the table does not cover the largest local time.
double log_weight(const LocalTimeField& field, const WeightTable& table);

struct CacheAuditError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Metropolis chain on trajectories with weight exp(L), L = sum_z log W(l(z), beta_eff).
/// Charges are integrated out exactly.
class GibbsChain {
 public:
  static constexpr std::int64_t kAuditInterval = 10000;

  GibbsChain(std::int64_t n, int d, double beta_eff, Rng rng);

  /// One proposal: suffix regrowth with probability 0.8, else a single increment.
  void step();
  void run(std::int64_t steps);

  /// Recomputes field, L and the conditional energy from scratch; throws
  /// CacheAuditError on a mismatch, then resynchronizes the caches.
  void audit();

  std::int64_t n() const { return n_; }
  int dim() const { return d_; }
  double beta_eff() const { return beta_eff_; }
  std::int64_t steps() const { return steps_; }
  std::int64_t accepted() const { return accepted_; }
  std::int64_t audits() const { return audits_; }
  double acceptance_rate() const;
  const std::vector<std::uint8_t>& moves() const { return moves_; }
  const LocalTimeField& field() const { return field_; }
  /// Cached L; log Z = beta_eff n + log E_walk[exp(L)].
  double log_weight() const { return log_w_; }
  /// E[H_n | walk] = sum_z (-d/dbeta log W)(l(z)) - n.
  double conditional_energy() const { return energy_sum_ - static_cast<double>(n_); }
  std::int64_t max_local_time() const { return field_.max_count(); }
  /// Base (2d+1) code of the move sequence; for small n only.
  std::uint64_t state_code() const;

 private:
  bool propose_from(std::int64_t first_move, const std::vector<std::uint8_t>& new_moves);
  void site_delta(const std::int32_t* pos, std::int64_t delta);

  std::int64_t n_;
  int d_;
  double beta_eff_;
  Rng rng_;
  WeightTable table_;
  std::vector<std::uint8_t> moves_;
  std::vector<std::int32_t> coords_;  // n x d positions
  LocalTimeField field_;
  double log_w_ = 0.0;
  double energy_sum_ = 0.0;
  std::int64_t steps_ = 0;
  std::int64_t accepted_ = 0;
  std::int64_t audits_ = 0;
  double delta_log_w_ = 0.0;
  double delta_energy_ = 0.0;
  std::vector<std::int32_t> scratch_;
};

struct ChainBudget {
  std::int64_t steps = 100000;  // per chain, burn-in included
  int chains = 1;
  std::int64_t thin = 10;
  int batches = 20;
};

struct EnergyEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double acceptance = 0.0;
  bool equilibrated = true;  // split-halves agreement within 3 stderr
  std::int64_t samples = 0;
};

/// Chain average of the conditional mean energy after 20% burn-in.
EnergyEstimate mean_energy(const GibbsConfig& cfg, const ChainBudget& budget, Rng& rng);

struct LogPartitionPoint {
  double beta = 0.0;      // raw beta
  double beta_eff = 0.0;
  double log_z = 0.0;
  double error = 0.0;     // quadrature + Monte Carlo
  double mean_energy = 0.0;
  double energy_stderr = 0.0;
  bool equilibrated = true;
};

struct LogPartitionProfile {
  std::vector<LogPartitionPoint> points;
  std::int64_t evaluations = 0;
  std::int64_t unresolved_panels = 0;  // panels still above tolerance at max depth
};

/// log Z(beta_eff) = -int_0^beta_eff E[H] db by adaptive Simpson over the
/// raw beta grid, which must start at 0 and increase.
LogPartitionProfile log_partition(const GibbsConfig& cfg, const std::vector<double>& beta_grid,
                                  const ChainBudget& budget, Rng& rng, double tolerance = 0.05,
                                  int max_depth = 3);

struct PhaseObservables {
  std::int64_t n = 0;
  double beta = 0.0;
  double beta_eff = 0.0;
  std::vector<double> a_values;
  std::vector<double> b_values;
  std::vector<double> mid_level_frequency;  // per a: count >= n^{3/5} / a^4
  std::vector<double> max_local_frequency;  // per b: max l >= b n^{1/5}
  double mean_energy = 0.0;
  double mean_max_local_time = 0.0;
  double acceptance = 0.0;
  std::int64_t samples = 0;
  std::vector<std::vector<std::int64_t>> mid_level_counts;  // per sample, per a
  std::vector<std::int64_t> max_local_times;                // per sample
  std::string error;                                        // non-empty when the cell failed
};

/// |{z : n^{2/5}/a <= l(z) <= a n^{2/5}}|.
std::int64_t mid_level_count(const LocalTimeField& field, std::int64_t n, double a);

PhaseObservables phase_cell(std::int64_t n, double beta, double s, const std::vector<double>& a,
                            const std::vector<double>& b, const ChainBudget& budget, int d,
                            Rng& rng);

/// Runs every (n, beta) cell; failures are recorded in the cell and the scan continues.
std::vector<PhaseObservables> phase_scan(const std::vector<std::int64_t>& ns,
                                         const std::vector<double>& betas,
                                         const std::vector<double>& a,
                                         const std::vector<double>& b, const ChainBudget& budget,
                                         Rng& rng, int d = 3, double s = 0.4);

/// Gibbs law over move sequences of a short walk by enumerating every
/// (trajectory, sign pattern) pair.
struct ExactGibbsLaw {
  std::int64_t n = 0;
  int d = 3;
  double beta_eff = 0.0;
  std::vector<double> probs;  // indexed by base (2d+1) move code
  double log_z = 0.0;         // log E[exp(-beta_eff H)]
  double mean_energy = 0.0;
};

ExactGibbsLaw exact_gibbs_law(std::int64_t n, int d, double beta_eff);

}  // namespace polymer
