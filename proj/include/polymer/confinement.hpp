// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "polymer/lattice.hpp"
#include "polymer/stats.hpp"

namespace polymer {

/// Lattice points of the Euclidean ball {z : |z|^2 <= r^2}, indexed densely,
/// with a precomputed move table for walking inside the ball.
class Ball {
 public:
  Ball(int dim, double radius);
  /// Ball whose lattice volume is closest to `target` among radii r^2 in Z.
  static Ball with_volume(int dim, double target);

  int dim() const { return dim_; }
  double radius() const { return radius_; }
  std::int64_t radius2() const { return r2_; }
  std::int64_t volume() const { return static_cast<std::int64_t>(sites_.size()); }
  /// Index of the site with the given coordinates, or -1 when outside.
  int index(const std::int32_t* coords) const;
  int origin() const { return origin_; }
  const Site& site(int idx) const { return sites_[static_cast<std::size_t>(idx)]; }
  /// Destination index after `move`, or -1 when the move leaves the ball.
  int neighbor(int idx, int move) const {
    return next_[static_cast<std::size_t>(idx * move_count(dim_) + move)];
  }

 private:
  int dim_;
  double radius_;
  std::int64_t r2_;
  int half_;
  std::vector<int> cube_;
  std::vector<Site> sites_;
  std::vector<int> next_;
  int origin_ = 0;
};

struct ConfinementResult {
  bool survived = false;
  double radius = 0.0;
  std::int64_t duration = 0;
  std::optional<Trajectory> trajectory;  // positions S(0..T) when survived
};

/// One rejection attempt: runs T steps and reports whether S(0..T) stayed in B(r).
ConfinementResult sample_confined_walk(std::int64_t T, double r, int dim, Rng& rng);

struct SplittingOptions {
  std::int64_t particles = 1000;
  std::int64_t interval = 0;  // 0: min(ceil(T/10), max(1, floor(r^2)))
  int replicates = 8;
  bool track_local_times = false;
};

/// Result of one fixed-effort splitting run to time T.
struct ParticleCloud {
  double log_survival = 0.0;
  bool extinct = false;
  std::vector<double> stage_fraction;
  std::vector<int> position;        // ball index of S(T)
  std::vector<std::int32_t> local;  // particles x volume, visits of S(0..T-1)
};

std::int64_t default_interval(std::int64_t T, const Ball& ball);

ParticleCloud run_splitting(const Ball& ball, std::int64_t T, const SplittingOptions& opts,
                            Rng& rng);

enum class SurvivalMethod { rejection, splitting };

/// Estimate of P0(S(k) in B(r) for all k <= T). For rejection `budget` is the
/// number of walks; for splitting it is particles per replicate.
TailEstimate survival_probability(std::int64_t T, double r, int dim, SurvivalMethod method,
                                  std::int64_t budget, Rng& rng, int replicates = 8);

}  // namespace polymer
