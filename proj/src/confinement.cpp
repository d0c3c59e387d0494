// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "polymer/confinement.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace polymer {

namespace {

std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

Ball::Ball(int dim, double radius) : dim_(dim), radius_(radius) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Ball: dimension out of range");
  if (!(radius >= 0.0)) throw std::invalid_argument("Ball: negative radius");
  r2_ = static_cast<std::int64_t>(std::floor(radius * radius + 1e-9));
  half_ = static_cast<int>(std::floor(radius + 1e-9));
  const std::int64_t side = 2 * half_ + 1;
  const std::int64_t cells = ipow(side, dim);
  if (cells > (std::int64_t{1} << 27)) throw std::invalid_argument("Ball: radius too large");
  cube_.assign(static_cast<std::size_t>(cells), -1);
  for (std::int64_t c = 0; c < cells; ++c) {
    Site s(dim);
    std::int64_t rem = c;
    for (int i = 0; i < dim; ++i) {
      s[i] = static_cast<std::int32_t>(rem % side) - half_;
      rem /= side;
    }
    if (s.norm2() <= r2_) {
      cube_[static_cast<std::size_t>(c)] = static_cast<int>(sites_.size());
      if (s.norm2() == 0) origin_ = static_cast<int>(sites_.size());
      sites_.push_back(s);
    }
  }
  const int moves = move_count(dim);
  next_.assign(sites_.size() * static_cast<std::size_t>(moves), -1);
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    for (int m = 0; m < moves; ++m) {
      Site s = sites_[i];
      apply_move(s.data(), m);
      next_[i * static_cast<std::size_t>(moves) + static_cast<std::size_t>(m)] = index(s.data());
    }
  }
}

Ball Ball::with_volume(int dim, double target) {
  if (!(target >= 1.0)) throw std::invalid_argument("Ball::with_volume: target must be >= 1");
  // Continuum estimate of the radius, then exact counts over a covering cube.
  const double unit = std::pow(std::numbers::pi, dim / 2.0) / std::tgamma(dim / 2.0 + 1.0);
  const double r_est = std::pow(target / unit, 1.0 / dim);
  const int half = static_cast<int>(std::ceil(1.5 * r_est)) + 2;
  const std::int64_t side = 2 * half + 1;
  const std::int64_t max_r2 = static_cast<std::int64_t>(half) * half;
  std::vector<std::int64_t> hist(static_cast<std::size_t>(max_r2) + 1, 0);
  const std::int64_t cells = ipow(side, dim);
  for (std::int64_t c = 0; c < cells; ++c) {
    std::int64_t rem = c, n2 = 0;
    for (int i = 0; i < dim; ++i) {
      const std::int64_t x = rem % side - half;
      rem /= side;
      n2 += x * x;
    }
    if (n2 <= max_r2) ++hist[static_cast<std::size_t>(n2)];
  }
  std::int64_t best_r2 = 0, volume = 0;
  double best_err = std::abs(1.0 - target);
  for (std::int64_t k = 0; k <= max_r2; ++k) {
    volume += hist[static_cast<std::size_t>(k)];
    if (hist[static_cast<std::size_t>(k)] == 0) continue;
    const double err = std::abs(static_cast<double>(volume) - target);
    if (err < best_err) {
      best_err = err;
      best_r2 = k;
    }
    if (static_cast<double>(volume) > target) break;
  }
  return Ball(dim, std::sqrt(static_cast<double>(best_r2)));
}

int Ball::index(const std::int32_t* coords) const {
  const std::int64_t side = 2 * half_ + 1;
  std::int64_t c = 0, stride = 1;
  for (int i = 0; i < dim_; ++i) {
    if (coords[i] < -half_ || coords[i] > half_) return -1;
    c += (coords[i] + half_) * stride;
    stride *= side;
  }
  return cube_[static_cast<std::size_t>(c)];
}

ConfinementResult sample_confined_walk(std::int64_t T, double r, int dim, Rng& rng) {
  if (T < 1) throw std::invalid_argument("sample_confined_walk: T must be >= 1");
  if (!(r >= 1.0)) throw std::invalid_argument("sample_confined_walk: r must be >= 1");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("sample_confined_walk: bad dimension");
  ConfinementResult res;
  res.radius = r;
  res.duration = T;
  const auto r2 = static_cast<std::int64_t>(std::floor(r * r + 1e-9));
  const auto k = static_cast<std::uint32_t>(move_count(dim));
  std::vector<std::uint8_t> moves(static_cast<std::size_t>(T));
  Site pos(dim);
  std::int64_t n2 = 0;
  for (std::int64_t t = 0; t < T; ++t) {
    const auto m = static_cast<std::uint8_t>(rng.below(k));
    moves[static_cast<std::size_t>(t)] = m;
    if (m != 0) {
      const int axis = (m - 1) / 2;
      const std::int64_t before = pos[axis];
      apply_move(pos.data(), m);
      n2 += static_cast<std::int64_t>(pos[axis]) * pos[axis] - before * before;
      if (n2 > r2) return res;
    }
  }
  res.survived = true;
  res.trajectory = Trajectory(dim, std::move(moves));
  return res;
}

std::int64_t default_interval(std::int64_t T, const Ball& ball) {
  const std::int64_t tenth = (T + 9) / 10;
  const std::int64_t mix = std::max<std::int64_t>(1, ball.radius2());
  return std::max<std::int64_t>(1, std::min(tenth, mix));
}

ParticleCloud run_splitting(const Ball& ball, std::int64_t T, const SplittingOptions& opts,
                            Rng& rng) {
  if (T < 1) throw std::invalid_argument("run_splitting: T must be >= 1");
  if (opts.particles < 1) throw std::invalid_argument("run_splitting: need particles");
  const std::int64_t n = opts.particles;
  const std::int64_t vol = ball.volume();
  const std::int64_t interval = opts.interval > 0 ? opts.interval : default_interval(T, ball);
  const auto k = static_cast<std::uint32_t>(move_count(ball.dim()));
  const bool track = opts.track_local_times;

  ParticleCloud cloud;
  std::vector<int> pos(static_cast<std::size_t>(n), ball.origin());
  std::vector<std::int32_t> local;
  if (track) local.assign(static_cast<std::size_t>(n * vol), 0);
  std::vector<std::int64_t> alive;
  alive.reserve(static_cast<std::size_t>(n));

  std::int64_t t = 0;
  while (t < T) {
    const std::int64_t steps = std::min(interval, T - t);
    alive.clear();
    const auto count = static_cast<std::int64_t>(pos.size());
    for (std::int64_t i = 0; i < count; ++i) {
      int p = pos[static_cast<std::size_t>(i)];
      std::int32_t* lt = track ? local.data() + i * vol : nullptr;
      bool inside = true;
      for (std::int64_t s = 0; s < steps; ++s) {
        if (lt) ++lt[p];
        p = ball.neighbor(p, static_cast<int>(rng.below(k)));
        if (p < 0) {
          inside = false;
          break;
        }
      }
      if (inside) {
        pos[static_cast<std::size_t>(i)] = p;
        alive.push_back(i);
      }
    }
    const auto survivors = static_cast<std::int64_t>(alive.size());
    const double frac = static_cast<double>(survivors) / static_cast<double>(count);
    cloud.stage_fraction.push_back(frac);
    if (survivors == 0) {
      cloud.extinct = true;
      cloud.log_survival = -std::numeric_limits<double>::infinity();
      return cloud;
    }
    cloud.log_survival += std::log(frac);
    t += steps;
    // Multinomial resampling back to n particles; at T the survivors are kept as is.
    std::vector<int> next_pos;
    std::vector<std::int32_t> next_local;
    const std::int64_t target = t < T ? n : survivors;
    next_pos.reserve(static_cast<std::size_t>(target));
    if (track) next_local.resize(static_cast<std::size_t>(target * vol));
    for (std::int64_t j = 0; j < target; ++j) {
      const std::int64_t src =
          t < T ? alive[rng.below(static_cast<std::uint32_t>(survivors))] : alive[static_cast<std::size_t>(j)];
      next_pos.push_back(pos[static_cast<std::size_t>(src)]);
      if (track)
        std::copy_n(local.data() + src * vol, vol, next_local.data() + j * vol);
    }
    pos = std::move(next_pos);
    local = std::move(next_local);
  }
  cloud.position = std::move(pos);
  cloud.local = std::move(local);
  return cloud;
}

TailEstimate survival_probability(std::int64_t T, double r, int dim, SurvivalMethod method,
                                  std::int64_t budget, Rng& rng, int replicates) {
  if (budget <= 0) throw std::invalid_argument("survival_probability: budget must be positive");
  if (T < 1 || !(r >= 1.0)) throw std::invalid_argument("survival_probability: need T, r >= 1");
  const char* tag = method == SurvivalMethod::rejection ? "rejection" : "splitting";
  if (r > static_cast<double>(T)) {
    TailEstimate t = TailEstimate::from_log(0.0, 0.0, budget, tag);
    t.upper_95 = 1.0;
    return t;
  }
  const Ball ball(dim, r);
  if (method == SurvivalMethod::rejection) {
    const auto k = static_cast<std::uint32_t>(move_count(dim));
    std::int64_t hits = 0;
    for (std::int64_t w = 0; w < budget; ++w) {
      int p = ball.origin();
      std::int64_t t = 0;
      for (; t < T; ++t) {
        p = ball.neighbor(p, static_cast<int>(rng.below(k)));
        if (p < 0) break;
      }
      if (t == T) ++hits;
    }
    return TailEstimate::from_hits(hits, budget, tag);
  }
  if (replicates < 2) throw std::invalid_argument("survival_probability: need >= 2 replicates");
  SplittingOptions opts;
  opts.particles = budget;
  std::vector<double> logs;
  for (int rep = 0; rep < replicates; ++rep) {
    Rng sub = rng.split(static_cast<std::uint64_t>(rep));
    logs.push_back(run_splitting(ball, T, opts, sub).log_survival);
  }
  const auto [log_p, rel] = log_mean_exp(logs);
  TailEstimate est = TailEstimate::from_log(log_p, rel, budget * replicates, tag);
  if (!std::isfinite(log_p)) est.status = EstimateStatus::walk_factor_failed;
  return est;
}

}  // namespace polymer
