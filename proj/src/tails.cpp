// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "polymer/tails.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_map>

#include "polymer/confinement.hpp"

namespace polymer {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// Samples one walk and one charge sequence and returns X_check; reuses buffers.
class XCheckSampler {
 public:
  XCheckSampler(std::int64_t n, int d, const ChargeDistribution& dist)
      : n_(n), d_(d), dist_(dist), codec_(d, n), moves_(static_cast<std::uint32_t>(move_count(d))) {
    if (n < 1) throw std::invalid_argument("naive_tail: n must be >= 1");
    if (!codec_.packable()) throw std::invalid_argument("naive_tail: n too large to pack sites");
    entries_.resize(static_cast<std::size_t>(n));
  }

  double operator()(Rng& rng) {
    std::array<std::int32_t, kMaxDim> pos{};
    for (std::int64_t k = 0; k < n_; ++k) {
      if (k > 0) apply_move(pos.data(), static_cast<int>(rng.below(moves_)));
      entries_[static_cast<std::size_t>(k)].first = codec_.pack(pos.data());
    }
    draw_charges(rng);
    std::sort(entries_.begin(), entries_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    double x = 0.0;
    double q = 0.0;
    std::int64_t l = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (i > 0 && entries_[i].first != entries_[i - 1].first) {
        x += q * q - static_cast<double>(l);
        q = 0.0;
        l = 0;
      }
      q += entries_[i].second;
      ++l;
    }
    x += q * q - static_cast<double>(l);
    return x;
  }

 private:
  void draw_charges(Rng& rng) {
    switch (dist_.kind()) {
      case ChargeKind::rademacher:
        for (auto& e : entries_) e.second = (rng() & 1u) ? 1.0 : -1.0;
        break;
      case ChargeKind::gaussian: {
        std::normal_distribution<double> normal;
        for (auto& e : entries_) e.second = normal(rng);
        break;
      }
      case ChargeKind::uniform: {
        const double s = std::sqrt(3.0);
        for (auto& e : entries_) e.second = s * (2.0 * rng.uniform() - 1.0);
        break;
      }
    }
  }

  std::int64_t n_;
  int d_;
  ChargeDistribution dist_;
  SiteCodec codec_;
  std::uint32_t moves_;
  std::vector<std::pair<std::uint64_t, double>> entries_;
};

/// Tilted law of |S_l|^2 for l Rademacher signs: pmf proportional to
/// C(l,k) exp(-theta (2k-l)^2), truncated at 1e-18 of the peak.
struct TiltedSquareTable {
  std::vector<double> values;
  std::vector<double> cdf;

  TiltedSquareTable(std::int64_t l, double theta) {
    const std::int64_t c = l / 2;
    std::vector<std::pair<double, double>> terms;  // (log weight, value)
    double lb_c = log_choose(l, c);
    double lb = lb_c;
    for (std::int64_t k = c; k <= l; ++k) {
      if (k > c) lb += std::log(static_cast<double>(l - k + 1) / static_cast<double>(k));
      const auto s = static_cast<double>(2 * k - l);
      const double t = lb - theta * s * s;
      if (!terms.empty() && t < terms.front().first - 41.5) break;
      terms.emplace_back(t, s * s);
    }
    lb = lb_c;
    for (std::int64_t k = c - 1; k >= 0; --k) {
      lb += std::log(static_cast<double>(k + 1) / static_cast<double>(l - k));
      const auto s = static_cast<double>(2 * k - l);
      const double t = lb - theta * s * s;
      if (t < terms.front().first - 41.5) break;
      terms.emplace_back(t, s * s);
    }
    const double peak = terms.front().first;
    double total = 0.0;
    for (const auto& [t, v] : terms) {
      total += std::exp(t - peak);
      values.push_back(v);
      cdf.push_back(total);
    }
    for (auto& c2 : cdf) c2 /= total;
    cdf.back() = 1.0;
  }

  double sample(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return values[static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cdf.begin(), static_cast<std::ptrdiff_t>(values.size()) - 1))];
  }
};

double tilted_mean(ChargeKind kind, std::int64_t l, double theta) {
  const auto ld = static_cast<double>(l);
  if (kind == ChargeKind::gaussian) return ld / (1.0 + 2.0 * theta * ld);
  return rademacher_weight(l, theta).mean_sq;
}

double tilted_log_mgf(ChargeKind kind, std::int64_t l, double theta) {
  const auto ld = static_cast<double>(l);
  if (kind == ChargeKind::gaussian) return -0.5 * std::log1p(2.0 * theta * ld);
  return rademacher_weight(l, theta).log_w;
}

}  // namespace

// ---------------------------------------------------------------------------

double ExactHDistribution::pmf(std::int64_t h) const {
  const auto it = counts.find(h);
  return it == counts.end() ? 0.0
                            : static_cast<double>(it->second) / static_cast<double>(denominator);
}

double ExactHDistribution::mean() const {
  long double s = 0.0L;
  for (const auto& [h, c] : counts) s += static_cast<long double>(h) * c;
  return static_cast<double>(s / denominator);
}

double ExactHDistribution::variance() const {
  const long double m = mean();
  long double s = 0.0L;
  for (const auto& [h, c] : counts) s += (h - m) * (h - m) * c;
  return static_cast<double>(s / denominator);
}

double ExactHDistribution::lower_tail(double x) const {
  std::uint64_t c = 0;
  for (const auto& [h, k] : counts)
    if (static_cast<double>(h) <= -x) c += k;
  return static_cast<double>(c) / static_cast<double>(denominator);
}

ExactHDistribution exact_h_distribution(std::int64_t n, int d) {
  if (n < 1) throw std::invalid_argument("exact_h_distribution: n must be >= 1");
  if (d < 1 || d > kMaxDim) throw std::invalid_argument("exact_h_distribution: bad dimension");
  const std::int64_t K = move_count(d);
  double states = std::pow(2.0, static_cast<double>(n));
  for (std::int64_t i = 1; i < n; ++i) states *= static_cast<double>(K);
  if (states > 2.0e7) throw std::invalid_argument("exact_h_distribution: state space too large");

  ExactHDistribution out;
  out.n = n;
  out.d = d;
  std::uint64_t walks = 1;
  for (std::int64_t i = 1; i < n; ++i) walks *= static_cast<std::uint64_t>(K);
  out.denominator = walks << n;

  std::vector<int> digits(static_cast<std::size_t>(std::max<std::int64_t>(n - 1, 0)), 0);
  std::vector<std::array<std::int32_t, kMaxDim>> pos(static_cast<std::size_t>(n));
  std::vector<int> group(static_cast<std::size_t>(n));
  for (std::uint64_t w = 0; w < walks; ++w) {
    pos[0].fill(0);
    for (std::int64_t k = 1; k < n; ++k) {
      pos[static_cast<std::size_t>(k)] = pos[static_cast<std::size_t>(k - 1)];
      apply_move(pos[static_cast<std::size_t>(k)].data(), digits[static_cast<std::size_t>(k - 1)]);
    }
    int groups = 0;
    for (std::int64_t k = 0; k < n; ++k) {
      group[static_cast<std::size_t>(k)] = -1;
      for (std::int64_t j = 0; j < k; ++j)
        if (pos[static_cast<std::size_t>(j)] == pos[static_cast<std::size_t>(k)]) {
          group[static_cast<std::size_t>(k)] = group[static_cast<std::size_t>(j)];
          break;
        }
      if (group[static_cast<std::size_t>(k)] < 0) group[static_cast<std::size_t>(k)] = groups++;
    }
    std::array<std::int64_t, 64> q{};
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      std::fill_n(q.begin(), groups, 0);
      for (std::int64_t k = 0; k < n; ++k)
        q[static_cast<std::size_t>(group[static_cast<std::size_t>(k)])] += ((mask >> k) & 1u) ? 1 : -1;
      std::int64_t h = -n;
      for (int g = 0; g < groups; ++g) h += q[static_cast<std::size_t>(g)] * q[static_cast<std::size_t>(g)];
      ++out.counts[h];
    }
    for (std::size_t i = 0; i < digits.size(); ++i) {
      if (++digits[i] < K) break;
      digits[i] = 0;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

TailEstimate naive_tail(std::int64_t n, int d, const ChargeDistribution& dist, double x,
                        std::int64_t samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("naive_tail: samples must be positive");
  if (dist.kind() == ChargeKind::rademacher && x > static_cast<double>(n)) {
    TailEstimate t;
    t.p_hat = 0.0;
    t.upper_95 = 0.0;
    t.samples = samples;
    t.method = "naive";
    t.status = EstimateStatus::infeasible;
    return t;
  }
  XCheckSampler sampler(n, d, dist);
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < samples; ++s) hits += sampler(rng) <= -x + 1e-9;
  return TailEstimate::from_hits(hits, samples, "naive");
}

std::map<std::int64_t, std::int64_t> sample_h_histogram(std::int64_t n, int d,
                                                        std::int64_t samples, Rng& rng) {
  XCheckSampler sampler(n, d, ChargeDistribution(ChargeKind::rademacher));
  std::map<std::int64_t, std::int64_t> hist;
  for (std::int64_t s = 0; s < samples; ++s) ++hist[std::llround(sampler(rng))];
  return hist;
}

// ---------------------------------------------------------------------------

ChargeFactor square_sum_below(const std::vector<std::int64_t>& local_times, double bound,
                              const ChargeDistribution& dist, std::int64_t samples, Rng& rng) {
  if (samples < 1) throw std::invalid_argument("square_sum_below: samples must be positive");
  ChargeFactor out;
  const ChargeKind kind = dist.kind();
  std::map<std::int64_t, std::int64_t> groups;
  double mean = 0.0, minimum = 0.0;
  for (auto l : local_times) {
    if (l < 1) throw std::invalid_argument("square_sum_below: local times must be >= 1");
    ++groups[l];
    mean += static_cast<double>(l);
    if (kind == ChargeKind::rademacher) minimum += static_cast<double>(l % 2);
  }
  if (bound < minimum - 1e-9) {
    out.log_p = kNegInf;
    out.exact_zero = true;
    return out;
  }
  if (kind == ChargeKind::rademacher && groups.size() == 1 && groups.begin()->first == 1) {
    out.log_p = 0.0;  // every square equals one
    return out;
  }

  // Exponential tilt e^{-theta V} moving the mean of sum V onto the bound.
  double theta = 0.0;
  if (kind != ChargeKind::uniform && bound < mean) {
    auto excess = [&](double th) {
      double m = 0.0;
      for (const auto& [l, c] : groups) m += static_cast<double>(c) * tilted_mean(kind, l, th);
      return m - bound;
    };
    double hi = 1e-3;
    while (excess(hi) > 0.0 && hi < 1e6) hi *= 2.0;
    double lo = 0.0;
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (excess(mid) > 0.0) lo = mid; else hi = mid;
    }
    theta = 0.5 * (lo + hi);
  }
  out.theta = theta;
  double kappa = 0.0;
  if (theta > 0.0)
    for (const auto& [l, c] : groups) kappa += static_cast<double>(c) * tilted_log_mgf(kind, l, theta);

  std::vector<double> log_w(static_cast<std::size_t>(samples));
  const double sq3 = std::sqrt(3.0);
  if (kind == ChargeKind::rademacher) {
    double fixed = 0.0;
    std::vector<std::pair<TiltedSquareTable, std::int64_t>> tables;
    for (const auto& [l, c] : groups) {
      if (l == 1) fixed += static_cast<double>(c);
      else tables.emplace_back(TiltedSquareTable(l, theta), c);
    }
    for (auto& lw : log_w) {
      double s = fixed;
      for (const auto& [table, c] : tables)
        for (std::int64_t i = 0; i < c; ++i) s += table.sample(rng);
      lw = s <= bound + 1e-9 ? theta * s + kappa : kNegInf;
    }
  } else if (kind == ChargeKind::gaussian) {
    std::vector<std::pair<std::gamma_distribution<double>, std::int64_t>> gammas;
    for (const auto& [l, c] : groups) {
      const auto ld = static_cast<double>(l);
      gammas.emplace_back(std::gamma_distribution<double>(0.5, 2.0 * ld / (1.0 + 2.0 * theta * ld)), c);
    }
    for (auto& lw : log_w) {
      double s = 0.0;
      for (auto& [g, c] : gammas)
        for (std::int64_t i = 0; i < c; ++i) s += g(rng);
      lw = s <= bound ? theta * s + kappa : kNegInf;
    }
  } else {
    for (auto& lw : log_w) {
      double s = 0.0;
      for (const auto& [l, c] : groups)
        for (std::int64_t i = 0; i < c; ++i) {
          double q = 0.0;
          for (std::int64_t j = 0; j < l; ++j) q += sq3 * (2.0 * rng.uniform() - 1.0);
          s += q * q;
        }
      lw = s <= bound ? 0.0 : kNegInf;
    }
  }
  const auto [lp, rel] = log_mean_exp(log_w);
  out.log_p = lp;
  out.rel_stderr = rel;
  return out;
}

// ---------------------------------------------------------------------------

StrategyConfig derive_strategy(std::int64_t n, int d, double x, StrategyConfig base) {
  if (n < 2 || !(x > 0.0)) throw std::invalid_argument("derive_strategy: need n >= 2, x > 0");
  if (d < 3) throw std::invalid_argument("derive_strategy: d >= 3 required");
  const double zeta = static_cast<double>(d) / (d + 2.0);
  if (d == 3) {
    if (base.T == 0) base.T = n;
    const double T = static_cast<double>(base.T);
    if (base.target_volume <= 0.0) base.target_volume = std::pow(T * T * T / (x * x), zeta);
  } else {
    if (base.T == 0) base.T = static_cast<std::int64_t>(std::llround(4.0 / base.eps0 * x));
    if (base.target_volume <= 0.0) base.target_volume = std::pow(x, zeta);
  }
  return base;
}

namespace {

void validate_strategy(const StrategyConfig& cfg) {
  if (!(cfg.eps0 > 0.0 && cfg.eps0 < 1.0)) throw std::invalid_argument("strategy: eps0 must lie in (0,1)");
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("strategy: delta must be positive");
  if (!(cfg.delta0 > 0.0)) throw std::invalid_argument("strategy: delta0 must be positive");
  if (cfg.T < 1) throw std::invalid_argument("strategy: T must be >= 1");
}

std::vector<std::size_t> choose_without_replacement(std::size_t population, std::size_t k, Rng& rng) {
  std::vector<std::size_t> idx(population);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  k = std::min(k, population);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(static_cast<std::uint32_t>(population - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

}  // namespace

StrategyEstimate strategy_lower_bound(std::int64_t n, int d, double x, const StrategyConfig& cfg_in,
                                      const StrategyBudget& budget, const ChargeDistribution& dist,
                                      Rng& rng) {
  const StrategyConfig cfg = derive_strategy(n, d, x, cfg_in);
  validate_strategy(cfg);
  if (budget.particles < 1 || budget.replicates < 1 || budget.profiles < 1 || budget.charge_samples < 1)
    throw std::invalid_argument("strategy: budget must be positive");
  StrategyEstimate out;
  out.T = cfg.T;
  out.target_volume = cfg.target_volume;
  const std::int64_t samples = budget.particles * budget.replicates;
  if (cfg.T > n || (1.0 + cfg.delta) * x > static_cast<double>(n) || cfg.target_volume < 1.0) {
    out.estimate = TailEstimate::from_log(kNegInf, 0.0, samples, "strategy");
    out.estimate.status = EstimateStatus::infeasible;
    out.estimate.upper_95 = 0.0;
    return out;
  }
  const Ball ball = Ball::with_volume(d, cfg.target_volume);
  const std::int64_t vol = ball.volume();
  out.radius = ball.radius();
  out.volume = vol;
  const double T = static_cast<double>(cfg.T);
  if (cfg.delta0 * T / static_cast<double>(vol) < 2.0)
    throw std::invalid_argument("strategy: delta0 T / |B| = " +
                                std::to_string(cfg.delta0 * T / static_cast<double>(vol)) +
                                " < 2");
  const double low = cfg.delta0 * T / static_cast<double>(vol);
  const double high = 2.0 * T / (cfg.eps0 * static_cast<double>(vol));
  const double bn_limit = x * std::pow(static_cast<double>(n), -cfg.eps_prime);

  SplittingOptions opts;
  opts.particles = budget.particles;
  opts.interval = budget.interval;
  opts.track_local_times = true;
  const auto moves = static_cast<std::uint32_t>(move_count(d));

  std::vector<double> rep_logs, walk_logs, charge_logs;
  std::int64_t evaluated = 0, occupied = 0, bn_failed = 0;
  for (int rep = 0; rep < budget.replicates; ++rep) {
    Rng sub = rng.split(static_cast<std::uint64_t>(rep));
    const ParticleCloud cloud = run_splitting(ball, cfg.T, opts, sub);
    walk_logs.push_back(cloud.log_survival);
    if (cloud.extinct) {
      rep_logs.push_back(kNegInf);
      continue;
    }
    const auto chosen = choose_without_replacement(cloud.position.size(),
                                                   static_cast<std::size_t>(budget.profiles), sub);
    std::vector<double> values;
    for (std::size_t idx : chosen) {
      const std::int32_t* lt = cloud.local.data() + static_cast<std::int64_t>(idx) * vol;
      std::vector<std::int64_t> ln(lt, lt + vol);
      std::unordered_map<Site, std::int64_t, SiteHash> outside;
      // Continue freely from S(T) for the remaining n - T positions.
      Site pos = ball.site(cloud.position[idx]);
      for (std::int64_t k = cfg.T; k < n; ++k) {
        if (k > cfg.T) apply_move(pos.data(), static_cast<int>(sub.below(moves)));
        const int bi = ball.index(pos.data());
        if (bi >= 0) ++ln[static_cast<std::size_t>(bi)];
        else ++outside[pos];
      }
      ++evaluated;
      double norm2 = 0.0;
      std::vector<std::int64_t> in_g, not_g;
      std::int64_t g_count = 0;
      for (std::int64_t z = 0; z < vol; ++z) {
        const auto l = ln[static_cast<std::size_t>(z)];
        norm2 += static_cast<double>(l) * static_cast<double>(l);
        if (l == 0) continue;
        const double lt_z = lt[z];
        if (lt_z >= low && lt_z <= high) {
          in_g.push_back(l);
          ++g_count;
        } else {
          not_g.push_back(l);
        }
      }
      for (const auto& [key, l] : outside) {
        norm2 += static_cast<double>(l) * static_cast<double>(l);
        not_g.push_back(l);
      }
      if (std::sqrt(norm2) > bn_limit) ++bn_failed;
      if (static_cast<double>(g_count) < 0.5 * cfg.eps0 * static_cast<double>(vol)) {
        values.push_back(kNegInf);
        continue;
      }
      ++occupied;
      const double sum_g = std::accumulate(in_g.begin(), in_g.end(), 0.0);
      const double sum_ng = std::accumulate(not_g.begin(), not_g.end(), 0.0);
      const ChargeFactor cg = square_sum_below(in_g, sum_g - (1.0 + cfg.delta) * x, dist,
                                               budget.charge_samples, sub);
      const ChargeFactor cn = not_g.empty()
                                  ? ChargeFactor{}
                                  : square_sum_below(not_g, sum_ng + cfg.delta * x, dist,
                                                     budget.charge_samples, sub);
      const double v = cg.log_p + cn.log_p;
      if (std::isfinite(v)) charge_logs.push_back(v);
      values.push_back(v);
    }
    const auto [lm, rel] = log_mean_exp(values);
    (void)rel;
    rep_logs.push_back(cloud.log_survival + lm);
  }
  const auto [log_p, rel] = log_mean_exp(rep_logs);
  out.estimate = TailEstimate::from_log(log_p, budget.replicates > 1 ? rel : 0.0, samples, "strategy");
  const auto [wl, wrel] = log_mean_exp(walk_logs);
  out.log_walk_factor = wl;
  out.walk_rel_stderr = wrel;
  out.profiles_evaluated = evaluated;
  if (evaluated > 0) {
    out.occupation_fraction = static_cast<double>(occupied) / static_cast<double>(evaluated);
    out.bn_failure_fraction = static_cast<double>(bn_failed) / static_cast<double>(evaluated);
  }
  if (!charge_logs.empty())
    out.mean_log_charge_factor =
        std::accumulate(charge_logs.begin(), charge_logs.end(), 0.0) / static_cast<double>(charge_logs.size());
  if (!std::isfinite(wl)) out.estimate.status = EstimateStatus::walk_factor_failed;
  else if (!std::isfinite(log_p)) out.estimate.status = EstimateStatus::charge_factor_failed;
  return out;
}

// ---------------------------------------------------------------------------

D2Estimate d2_moderate_strategy(std::int64_t n, int d, double xi, double gamma0, double delta,
                                std::int64_t walks, const ChargeDistribution& dist,
                                std::int64_t charge_samples, Rng& rng) {
  if (d < 3) throw std::invalid_argument("d2_moderate_strategy: d >= 3 required");
  if (walks < 1) throw std::invalid_argument("d2_moderate_strategy: walks must be positive");
  if (!(gamma0 > 0.0 && gamma0 < 1.0)) throw std::invalid_argument("d2_moderate_strategy: gamma0 in (0,1)");
  D2Estimate out;
  out.gamma1 = 0.25 * gamma0 * gamma0 * (1.0 - gamma0);
  const double t = (1.0 + delta) * xi * std::sqrt(static_cast<double>(n));
  std::vector<double> logs;
  std::int64_t qualifying = 0;
  double frac_sum = 0.0;
  for (std::int64_t w = 0; w < walks; ++w) {
    const LocalTimeField field = local_times(sample_walk(n, d, rng));
    std::int64_t m = 0;
    field.for_each_count([&](std::int64_t c) { m += c == 2; });
    const double frac = static_cast<double>(m) / static_cast<double>(n);
    frac_sum += frac;
    if (frac < out.gamma1 || m == 0) {
      logs.push_back(kNegInf);
      continue;
    }
    ++qualifying;
    if (dist.kind() == ChargeKind::rademacher) {
      // Each site contributes +2 or -2; need #(+2) >= (t/2 + m) / 2.
      const auto need = static_cast<std::int64_t>(std::ceil((0.5 * t + static_cast<double>(m)) / 2.0 - 1e-9));
      logs.push_back(log_binomial_upper_tail(m, need, 0.5));
    } else {
      const std::vector<std::int64_t> ls(static_cast<std::size_t>(m), 2);
      logs.push_back(square_sum_below(ls, 2.0 * static_cast<double>(m) - t, dist, charge_samples, rng).log_p);
    }
  }
  const auto [log_p, rel] = log_mean_exp(logs);
  out.estimate = TailEstimate::from_log(log_p, rel, walks, "d2_moderate");
  if (qualifying == 0) out.estimate.status = EstimateStatus::walk_factor_failed;
  out.qualifying_fraction = static_cast<double>(qualifying) / static_cast<double>(walks);
  out.mean_d2_fraction = frac_sum / static_cast<double>(walks);
  out.envelope_rate = 1.0 / (2.0 * out.mean_d2_fraction * dist.moments().chi1);
  return out;
}

// ---------------------------------------------------------------------------

double UpperBound::bound() const { return std::min(1.0, std::exp(log_bound)); }

double gamma_envelope(double x, double chi1) { return x >= 1.0 ? x : chi1 * x * x; }

UpperBound tilted_upper_bound(std::int64_t n, int d, double x, double lambda, double y,
                              std::int64_t walk_samples, const ChargeDistribution& dist, Rng& rng) {
  if (!(lambda > 0.0) || !(y > 0.0)) throw std::invalid_argument("tilted_upper_bound: need lambda, y > 0");
  if (walk_samples < 2) throw std::invalid_argument("tilted_upper_bound: need >= 2 walks");
  const double chi1 = dist.moments().chi1;
  const double scale = lambda / y;
  std::vector<double> sums(static_cast<std::size_t>(walk_samples));
  for (std::int64_t w = 0; w < walk_samples; ++w) {
    const LocalTimeField field = local_times(sample_walk(n, d, rng));
    double s = 0.0;
    field.for_each_count([&](std::int64_t c) { s += gamma_envelope(scale * static_cast<double>(c), chi1); });
    if (!std::isfinite(s))
      throw std::overflow_error("tilted_upper_bound: non-finite exponent at sample " + std::to_string(w));
    sums[static_cast<std::size_t>(w)] = s;
  }
  const auto [lm, rel] = log_mean_exp(sums);
  UpperBound ub;
  ub.log_bound = -scale * x + lm;
  ub.rel_stderr = rel;
  ub.samples = walk_samples;
  return ub;
}

// ---------------------------------------------------------------------------

ExponentFit exponent_fit(const std::vector<std::pair<double, double>>& points, FitScale scale) {
  if (points.size() < 4) throw std::invalid_argument("exponent_fit: need at least 4 points");
  ExponentFit f;
  for (const auto& [a, b] : points) {
    double xa = a, yb = b;
    if (scale == FitScale::log_log) {
      if (!(a > 0.0)) throw std::invalid_argument("exponent_fit: log of non-positive abscissa");
      xa = std::log(a);
    }
    if (scale != FitScale::linear) {
      if (!(b > 0.0)) throw std::invalid_argument("exponent_fit: log of non-positive ordinate");
      yb = std::log(b);
    }
    f.abscissas.push_back(xa);
    f.ordinates.push_back(yb);
  }
  const LinearFit full = least_squares(f.abscissas, f.ordinates);
  f.slope = full.slope;
  f.intercept = full.intercept;
  f.residual_ss = full.residual_ss;
  const std::size_t k = points.size();
  std::vector<double> loo;
  for (std::size_t drop = 0; drop < k; ++drop) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < k; ++i)
      if (i != drop) {
        xs.push_back(f.abscissas[i]);
        ys.push_back(f.ordinates[i]);
      }
    loo.push_back(least_squares(xs, ys).slope);
  }
  const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / static_cast<double>(k);
  double ss = 0.0;
  for (double s : loo) ss += (s - mean) * (s - mean);
  const double se = std::sqrt(static_cast<double>(k - 1) / static_cast<double>(k) * ss);
  f.half_width = student_t975(static_cast<int>(k) - 1) * se;
  return f;
}

double nagaev_envelope(std::int64_t n, double t, double c_y,
                       const std::function<double(double)>& tail_fn) {
  if (!(t > 0.0)) throw std::invalid_argument("nagaev_envelope: t must be positive");
  const auto nd = static_cast<double>(n);
  return c_y * (nd * tail_fn(t / 2.0) + std::exp(-t * t / (20.0 * nd)));
}

std::vector<TailEstimate> conjecture_probe(std::int64_t n, int d, const std::vector<double>& ys,
                                           std::int64_t samples, Rng& rng) {
  if (ys.empty()) throw std::invalid_argument("conjecture_probe: empty y grid");
  for (double y : ys)
    if (!(y >= 1.0) || std::pow(y, 1.0 + d / 2.0) > static_cast<double>(n))
      throw std::invalid_argument("conjecture_probe: need 1 <= y and y^{1+d/2} <= n");
  std::vector<std::int64_t> hits(ys.size(), 0);
  for (std::int64_t s = 0; s < samples; ++s) {
    const LocalTimeField field = local_times(sample_walk(n, d, rng));
    for (std::size_t i = 0; i < ys.size(); ++i) {
      std::int64_t count = 0;
      field.for_each_count([&](std::int64_t c) { count += static_cast<double>(c) >= ys[i]; });
      hits[i] += static_cast<double>(count) >= std::pow(ys[i], d / 2.0);
    }
  }
  std::vector<TailEstimate> out;
  for (std::size_t i = 0; i < ys.size(); ++i)
    out.push_back(TailEstimate::from_hits(hits[i], samples, "conjecture_probe"));
  return out;
}

}  // namespace polymer
