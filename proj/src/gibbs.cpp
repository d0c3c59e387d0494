// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "polymer/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "polymer/stats.hpp"

namespace polymer {

double GibbsConfig::beta_eff() const {
  return beta * std::pow(static_cast<double>(n), -s);
}

void GibbsConfig::validate() const {
  if (n < 2) throw std::invalid_argument("GibbsConfig: n must be >= 2");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("GibbsConfig: bad dimension");
  if (!(beta >= 0.0)) throw std::invalid_argument("GibbsConfig: beta must be >= 0");
  if (!std::isfinite(s)) throw std::invalid_argument("GibbsConfig: scaling exponent must be finite");
}

double log_weight(const LocalTimeField& field, const WeightTable& table) {
  double total = 0.0;
  field.for_each_count([&](std::int64_t c) { total += table.log_weight(c); });
  if (!std::isfinite(total)) throw std::range_error("log_weight: weight table underflow");
  return total;
}

// ---------------------------------------------------------------------------

GibbsChain::GibbsChain(std::int64_t n, int d, double beta_eff, Rng rng)
    : n_(n), d_(d), beta_eff_(beta_eff), rng_(rng), table_(n, beta_eff), field_(d, n) {
  if (n < 2) throw std::invalid_argument("GibbsChain: n must be >= 2");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("GibbsChain: bad dimension");
  const Trajectory start = sample_walk(n, d, rng_);
  moves_ = start.moves();
  coords_.assign(static_cast<std::size_t>(n * d), 0);
  for (std::int64_t k = 0; k < n; ++k)
    std::copy_n(start.coords(k), d, coords_.begin() + k * d);
  for (std::int64_t k = 0; k < n; ++k) field_.add(coords_.data() + k * d);
  log_w_ = polymer::log_weight(field_, table_);
  field_.for_each_count([&](std::int64_t c) { energy_sum_ += table_.energy_derivative(c); });
}

double GibbsChain::acceptance_rate() const {
  return steps_ > 0 ? static_cast<double>(accepted_) / static_cast<double>(steps_) : 0.0;
}

std::uint64_t GibbsChain::state_code() const {
  const auto K = static_cast<std::uint64_t>(move_count(d_));
  std::uint64_t code = 0, scale = 1;
  for (std::uint8_t m : moves_) {
    code += m * scale;
    scale *= K;
  }
  return code;
}

void GibbsChain::site_delta(const std::int32_t* pos, std::int64_t delta) {
  const std::int64_t after = field_.add(pos, delta);
  const std::int64_t before = after - delta;
  delta_log_w_ += table_.log_weight(after) - table_.log_weight(before);
  delta_energy_ += table_.energy_derivative(after) - table_.energy_derivative(before);
}

bool GibbsChain::propose_from(std::int64_t first_move, const std::vector<std::uint8_t>& new_moves) {
  // Positions first_move + 1 .. n - 1 change.
  const std::int64_t first_pos = first_move + 1;
  const std::int64_t count = n_ - first_pos;
  scratch_.resize(static_cast<std::size_t>(count * d_));
  std::array<std::int32_t, kMaxDim> pos{};
  std::copy_n(coords_.data() + first_move * d_, d_, pos.begin());
  for (std::int64_t k = first_pos; k < n_; ++k) {
    const std::int64_t mi = k - 1;
    const std::int64_t local = mi - first_move;
    const int m = local < static_cast<std::int64_t>(new_moves.size())
                      ? new_moves[static_cast<std::size_t>(local)]
                      : moves_[static_cast<std::size_t>(mi)];
    apply_move(pos.data(), m);
    std::copy_n(pos.begin(), d_, scratch_.begin() + (k - first_pos) * d_);
  }
  delta_log_w_ = 0.0;
  delta_energy_ = 0.0;
  for (std::int64_t k = first_pos; k < n_; ++k) site_delta(coords_.data() + k * d_, -1);
  for (std::int64_t k = 0; k < count; ++k) site_delta(scratch_.data() + k * d_, +1);
  const bool accept = delta_log_w_ >= 0.0 || rng_.uniform() < std::exp(delta_log_w_);
  if (accept) {
    std::copy(new_moves.begin(), new_moves.end(), moves_.begin() + first_move);
    std::copy(scratch_.begin(), scratch_.end(), coords_.begin() + first_pos * d_);
    log_w_ += delta_log_w_;
    energy_sum_ += delta_energy_;
  } else {
    for (std::int64_t k = 0; k < count; ++k) field_.add(scratch_.data() + k * d_, -1);
    for (std::int64_t k = first_pos; k < n_; ++k) field_.add(coords_.data() + k * d_, +1);
  }
  return accept;
}

void GibbsChain::step() {
  const auto K = static_cast<std::uint32_t>(move_count(d_));
  const std::int64_t moves = n_ - 1;
  std::vector<std::uint8_t> fresh;
  std::int64_t first = 0;
  if (rng_.uniform() < 0.8) {
    const double mean = std::max(1.0, static_cast<double>(n_) / 8.0);
    std::int64_t len = 1;
    if (mean > 1.0) {
      const double u = 1.0 - rng_.uniform();
      len += static_cast<std::int64_t>(std::floor(std::log(u) / std::log1p(-1.0 / mean)));
    }
    len = std::min(len, moves);
    first = moves - len;
    fresh.resize(static_cast<std::size_t>(len));
    for (auto& m : fresh) m = static_cast<std::uint8_t>(rng_.below(K));
  } else {
    first = static_cast<std::int64_t>(rng_.below(static_cast<std::uint32_t>(moves)));
    fresh.push_back(static_cast<std::uint8_t>(rng_.below(K)));
  }
  accepted_ += propose_from(first, fresh);
  ++steps_;
  if (steps_ % kAuditInterval == 0) audit();
}

void GibbsChain::run(std::int64_t steps) {
  for (std::int64_t s = 0; s < steps; ++s) step();
}

void GibbsChain::audit() {
  ++audits_;
  LocalTimeField fresh(d_, n_);
  std::array<std::int32_t, kMaxDim> pos{};
  for (std::int64_t k = 0; k < n_; ++k) {
    if (k > 0) apply_move(pos.data(), moves_[static_cast<std::size_t>(k - 1)]);
    if (!std::equal(pos.begin(), pos.begin() + d_, coords_.begin() + k * d_))
      throw CacheAuditError("GibbsChain audit: cached position " + std::to_string(k) +
                            " disagrees with the move sequence at step " + std::to_string(steps_));
    fresh.add(pos.data());
  }
  if (!(fresh == field_))
    throw CacheAuditError("GibbsChain audit: local-time field mismatch at step " +
                          std::to_string(steps_));
  const double l = polymer::log_weight(fresh, table_);
  double e = 0.0;
  fresh.for_each_count([&](std::int64_t c) { e += table_.energy_derivative(c); });
  if (std::abs(l - log_w_) > 1e-9 * std::max(1.0, std::abs(l)))
    throw CacheAuditError("GibbsChain audit: cached L = " + std::to_string(log_w_) +
                          ", recomputed " + std::to_string(l) + " at step " +
                          std::to_string(steps_));
  if (std::abs(e - energy_sum_) > 1e-9 * std::max(1.0, std::abs(e)))
    throw CacheAuditError("GibbsChain audit: cached energy mismatch at step " +
                          std::to_string(steps_));
  log_w_ = l;
  energy_sum_ = e;
}

// ---------------------------------------------------------------------------

namespace {

void validate_budget(const ChainBudget& b) {
  if (b.steps < 10 || b.chains < 1 || b.thin < 1 || b.batches < 2)
    throw std::invalid_argument("ChainBudget: steps >= 10, chains >= 1, thin >= 1, batches >= 2");
}

}  // namespace

EnergyEstimate mean_energy(const GibbsConfig& cfg, const ChainBudget& budget, Rng& rng) {
  cfg.validate();
  validate_budget(budget);
  const double be = cfg.beta_eff();
  const std::int64_t burn = budget.steps / 5;
  std::vector<double> series, first_half, second_half;
  double acceptance = 0.0;
  for (int c = 0; c < budget.chains; ++c) {
    GibbsChain chain(cfg.n, cfg.d, be, rng.split(static_cast<std::uint64_t>(c)));
    chain.run(burn);
    std::vector<double> own;
    for (std::int64_t t = burn; t < budget.steps; ++t) {
      chain.step();
      if ((t - burn) % budget.thin == 0) own.push_back(chain.conditional_energy());
    }
    acceptance += chain.acceptance_rate();
    const std::size_t half = own.size() / 2;
    first_half.insert(first_half.end(), own.begin(), own.begin() + static_cast<std::ptrdiff_t>(half));
    second_half.insert(second_half.end(), own.begin() + static_cast<std::ptrdiff_t>(half), own.end());
    series.insert(series.end(), own.begin(), own.end());
  }
  EnergyEstimate est;
  const int batches = std::min<int>(budget.batches, static_cast<int>(series.size()));
  const auto [mean, se] = batch_means(series, std::max(batches, 2));
  est.mean = mean;
  est.std_error = se;
  est.samples = static_cast<std::int64_t>(series.size());
  est.acceptance = acceptance / budget.chains;
  const int hb = std::max(2, std::min<int>(budget.batches / 2, static_cast<int>(first_half.size())));
  const auto [m1, s1] = batch_means(first_half, hb);
  const auto [m2, s2] = batch_means(second_half, hb);
  est.equilibrated = std::abs(m1 - m2) <= 3.0 * std::sqrt(s1 * s1 + s2 * s2) + 1e-12 * std::abs(mean);
  return est;
}

LogPartitionProfile log_partition(const GibbsConfig& cfg, const std::vector<double>& beta_grid,
                                  const ChainBudget& budget, Rng& rng, double tolerance,
                                  int max_depth) {
  cfg.validate();
  if (beta_grid.empty() || beta_grid.front() != 0.0)
    throw std::invalid_argument("log_partition: beta grid must start at 0");
  for (std::size_t i = 1; i < beta_grid.size(); ++i)
    if (!(beta_grid[i] > beta_grid[i - 1]))
      throw std::invalid_argument("log_partition: beta grid must increase");
  const double scale = std::pow(static_cast<double>(cfg.n), -cfg.s);
  LogPartitionProfile profile;
  std::map<double, EnergyEstimate> cache;
  auto energy_at = [&](double beta) -> const EnergyEstimate& {
    auto it = cache.find(beta);
    if (it != cache.end()) return it->second;
    GibbsConfig c = cfg;
    c.beta = beta;
    Rng sub = rng.split(static_cast<std::uint64_t>(profile.evaluations++));
    return cache.emplace(beta, mean_energy(c, budget, sub)).first->second;
  };
  // Returns (integral of -E over beta_eff, quadrature error, MC variance).
  std::function<std::array<double, 3>(double, double, int)> panel =
      [&](double a, double b, int depth) -> std::array<double, 3> {
    const double m = 0.5 * (a + b);
    const EnergyEstimate& ea = energy_at(a);
    const EnergyEstimate& em = energy_at(m);
    const EnergyEstimate& eb = energy_at(b);
    const double h = (b - a) * scale;
    const double simpson = -h / 6.0 * (ea.mean + 4.0 * em.mean + eb.mean);
    const double trapezoid = -h / 2.0 * (ea.mean + eb.mean);
    const double var = h * h / 36.0 *
                       (ea.std_error * ea.std_error + 16.0 * em.std_error * em.std_error +
                        eb.std_error * eb.std_error);
    const double gap = std::abs(simpson - trapezoid);
    if (gap > tolerance * std::abs(simpson) + 2.0 * std::sqrt(var)) {
      if (depth < max_depth) {
        const auto left = panel(a, m, depth + 1);
        const auto right = panel(m, b, depth + 1);
        return {left[0] + right[0], left[1] + right[1], left[2] + right[2]};
      }
      ++profile.unresolved_panels;
    }
    return {simpson, gap, var};
  };
  double log_z = 0.0, quad_err = 0.0, mc_var = 0.0;
  for (std::size_t i = 0; i < beta_grid.size(); ++i) {
    if (i > 0) {
      const auto r = panel(beta_grid[i - 1], beta_grid[i], 0);
      log_z += r[0];
      quad_err += r[1];
      mc_var += r[2];
    }
    const EnergyEstimate& e = energy_at(beta_grid[i]);
    LogPartitionPoint p;
    p.beta = beta_grid[i];
    p.beta_eff = beta_grid[i] * scale;
    p.log_z = log_z;
    p.error = quad_err + std::sqrt(mc_var);
    p.mean_energy = e.mean;
    p.energy_stderr = e.std_error;
    p.equilibrated = e.equilibrated;
    profile.points.push_back(p);
  }
  return profile;
}

// ---------------------------------------------------------------------------

std::int64_t mid_level_count(const LocalTimeField& field, std::int64_t n, double a) {
  const double centre = std::pow(static_cast<double>(n), 0.4);
  const double lo = centre / a, hi = centre * a;
  std::int64_t count = 0;
  field.for_each_count([&](std::int64_t c) {
    const auto cd = static_cast<double>(c);
    count += cd >= lo && cd <= hi;
  });
  return count;
}

PhaseObservables phase_cell(std::int64_t n, double beta, double s, const std::vector<double>& a,
                            const std::vector<double>& b, const ChainBudget& budget, int d,
                            Rng& rng) {
  GibbsConfig cfg{n, d, beta, s};
  cfg.validate();
  validate_budget(budget);
  for (double av : a)
    if (!(av > 1.0)) throw std::invalid_argument("phase_scan: a must exceed 1");
  for (double bv : b)
    if (!(bv > 0.0)) throw std::invalid_argument("phase_scan: b must be positive");
  PhaseObservables obs;
  obs.n = n;
  obs.beta = beta;
  obs.beta_eff = cfg.beta_eff();
  obs.a_values = a;
  obs.b_values = b;
  obs.mid_level_frequency.assign(a.size(), 0.0);
  obs.max_local_frequency.assign(b.size(), 0.0);
  const double nd = static_cast<double>(n);
  const std::int64_t burn = budget.steps / 5;
  RunningStats energy, max_lt;
  double acceptance = 0.0;
  for (int c = 0; c < budget.chains; ++c) {
    GibbsChain chain(n, d, obs.beta_eff, rng.split(static_cast<std::uint64_t>(c)));
    chain.run(burn);
    for (std::int64_t t = burn; t < budget.steps; ++t) {
      chain.step();
      if ((t - burn) % budget.thin != 0) continue;
      std::vector<std::int64_t> mids;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const std::int64_t m = mid_level_count(chain.field(), n, a[i]);
        mids.push_back(m);
        obs.mid_level_frequency[i] += static_cast<double>(m) >= std::pow(nd, 0.6) / std::pow(a[i], 4.0);
      }
      const std::int64_t lmax = chain.max_local_time();
      for (std::size_t i = 0; i < b.size(); ++i)
        obs.max_local_frequency[i] += static_cast<double>(lmax) >= b[i] * std::pow(nd, 0.2);
      obs.mid_level_counts.push_back(std::move(mids));
      obs.max_local_times.push_back(lmax);
      energy.add(chain.conditional_energy());
      max_lt.add(static_cast<double>(lmax));
    }
    acceptance += chain.acceptance_rate();
  }
  obs.samples = energy.count();
  for (auto& f : obs.mid_level_frequency) f /= static_cast<double>(obs.samples);
  for (auto& f : obs.max_local_frequency) f /= static_cast<double>(obs.samples);
  obs.mean_energy = energy.mean();
  obs.mean_max_local_time = max_lt.mean();
  obs.acceptance = acceptance / budget.chains;
  return obs;
}

std::vector<PhaseObservables> phase_scan(const std::vector<std::int64_t>& ns,
                                         const std::vector<double>& betas,
                                         const std::vector<double>& a,
                                         const std::vector<double>& b, const ChainBudget& budget,
                                         Rng& rng, int d, double s) {
  std::vector<PhaseObservables> out;
  std::uint64_t cell = 0;
  for (std::int64_t n : ns)
    for (double beta : betas) {
      Rng sub = rng.split(cell++);
      try {
        out.push_back(phase_cell(n, beta, s, a, b, budget, d, sub));
      } catch (const std::exception& e) {
        PhaseObservables failed;
        failed.n = n;
        failed.beta = beta;
        failed.error = e.what();
        out.push_back(std::move(failed));
      }
    }
  return out;
}

// ---------------------------------------------------------------------------

ExactGibbsLaw exact_gibbs_law(std::int64_t n, int d, double beta_eff) {
  if (n < 2) throw std::invalid_argument("exact_gibbs_law: n must be >= 2");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("exact_gibbs_law: bad dimension");
  if (!(beta_eff >= 0.0)) throw std::invalid_argument("exact_gibbs_law: beta must be >= 0");
  const int K = move_count(d);
  double states = std::pow(2.0, static_cast<double>(n));
  for (std::int64_t i = 1; i < n; ++i) states *= K;
  if (states > 2.0e7) throw std::invalid_argument("exact_gibbs_law: state space too large");
  std::uint64_t walks = 1;
  for (std::int64_t i = 1; i < n; ++i) walks *= static_cast<std::uint64_t>(K);

  ExactGibbsLaw law;
  law.n = n;
  law.d = d;
  law.beta_eff = beta_eff;
  law.probs.assign(walks, 0.0);
  const double signs = std::ldexp(1.0, static_cast<int>(n));
  std::vector<std::array<std::int32_t, kMaxDim>> pos(static_cast<std::size_t>(n));
  long double z = 0.0L, energy = 0.0L;
  for (std::uint64_t w = 0; w < walks; ++w) {
    std::uint64_t code = w;
    pos[0].fill(0);
    for (std::int64_t k = 1; k < n; ++k) {
      pos[static_cast<std::size_t>(k)] = pos[static_cast<std::size_t>(k - 1)];
      apply_move(pos[static_cast<std::size_t>(k)].data(), static_cast<int>(code % K));
      code /= K;
    }
    long double zw = 0.0L, ew = 0.0L;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      std::int64_t h = 0;
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < n; ++j) {
          if (i == j || pos[static_cast<std::size_t>(i)] != pos[static_cast<std::size_t>(j)]) continue;
          const int si = ((mask >> i) & 1u) ? 1 : -1;
          const int sj = ((mask >> j) & 1u) ? 1 : -1;
          h += si * sj;
        }
      const long double wgt = std::exp(-static_cast<long double>(beta_eff) * h);
      zw += wgt;
      ew += wgt * h;
    }
    law.probs[w] = static_cast<double>(zw);
    z += zw;
    energy += ew;
  }
  for (auto& p : law.probs) p = static_cast<double>(p / z);
  law.log_z = static_cast<double>(std::log(z / (signs * static_cast<long double>(walks))));
  law.mean_energy = static_cast<double>(energy / z);
  return law;
}

}  // namespace polymer
