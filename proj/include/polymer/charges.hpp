// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "polymer/lattice.hpp"
#include "polymer/rng.hpp"

namespace polymer {

enum class ChargeKind { rademacher, gaussian, uniform };

struct Moments {
  double mean = 0.0;
  double second = 1.0;
  double fourth = 1.0;
  double chi1 = 2.0;  // fourth + 1
};

/// Centered, unit-variance charge law with exact moments.
class ChargeDistribution {
 public:
  explicit ChargeDistribution(ChargeKind kind = ChargeKind::rademacher) : kind_(kind) {}
  /// Accepts "rademacher", "gaussian", "uniform".
  static ChargeDistribution from_name(const std::string& name);

  ChargeKind kind() const { return kind_; }
  std::string name() const;
  Moments moments() const;

 private:
  ChargeKind kind_;
};

struct ChargeSequence {
  ChargeKind kind = ChargeKind::rademacher;
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
};

ChargeSequence sample_charges(std::int64_t n, const ChargeDistribution& dist, Rng& rng);
Moments moment_summary(const ChargeDistribution& dist);

using LocalCharges = std::unordered_map<Site, double, SiteHash>;
using GroupedCharges = std::unordered_map<Site, std::vector<double>, SiteHash>;

/// q(z) = sum of charges deposited at z.
LocalCharges local_charges(const Trajectory& traj, const ChargeSequence& charges);
GroupedCharges group_charges(const Trajectory& traj, const ChargeSequence& charges);

/// zeta(z) = q(z)^2 / l(z) for visited sites.
std::unordered_map<Site, double, SiteHash> zeta_field(const LocalTimeField& field,
                                                       const GroupedCharges& grouped);

/// log W(l, beta) with W = E exp(-beta S_l^2), S_l a sum of l signs, and the
/// derivative -d/dbeta log W (tilted mean of S_l^2). Exact for l <= kExactMax.
struct WeightPoint {
  double log_w = 0.0;
  double mean_sq = 0.0;
};

inline constexpr std::int64_t kExactWeightMax = 10000;

WeightPoint rademacher_weight(std::int64_t l, double beta);

class WeightTable {
 public:
  WeightTable(std::int64_t l_max, double beta);

  double beta() const { return beta_; }
  std::int64_t l_max() const { return static_cast<std::int64_t>(points_.size()) - 1; }
  /// Throws std::out_of_range above l_max.
  double log_weight(std::int64_t l) const { return at(l).log_w; }
  double weight(std::int64_t l) const;
  /// -d/dbeta log W(l, beta).
  double energy_derivative(std::int64_t l) const { return at(l).mean_sq; }

 private:
  const WeightPoint& at(std::int64_t l) const;
  double beta_;
  std::vector<WeightPoint> points_;
};

WeightTable rademacher_weight_table(std::int64_t l_max, double beta);

}  // namespace polymer
