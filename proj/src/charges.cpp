// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "polymer/charges.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace polymer {

ChargeDistribution ChargeDistribution::from_name(const std::string& name) {
  if (name == "rademacher") return ChargeDistribution(ChargeKind::rademacher);
  if (name == "gaussian") return ChargeDistribution(ChargeKind::gaussian);
  if (name == "uniform") return ChargeDistribution(ChargeKind::uniform);
  throw std::invalid_argument("unknown charge distribution '" + name + "'");
}

std::string ChargeDistribution::name() const {
  switch (kind_) {
    case ChargeKind::rademacher: return "rademacher";
    case ChargeKind::gaussian: return "gaussian";
    case ChargeKind::uniform: return "uniform";
  }
  return "unknown";
}

Moments ChargeDistribution::moments() const {
  switch (kind_) {
    case ChargeKind::rademacher: return {0.0, 1.0, 1.0, 2.0};
    case ChargeKind::gaussian: return {0.0, 1.0, 3.0, 4.0};
    case ChargeKind::uniform: return {0.0, 1.0, 9.0 / 5.0, 14.0 / 5.0};
  }
  return {};
}

Moments moment_summary(const ChargeDistribution& dist) { return dist.moments(); }

ChargeSequence sample_charges(std::int64_t n, const ChargeDistribution& dist, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_charges: n must be >= 1");
  ChargeSequence seq;
  seq.kind = dist.kind();
  seq.values.resize(static_cast<std::size_t>(n));
  switch (dist.kind()) {
    case ChargeKind::rademacher:
      for (auto& v : seq.values) v = (rng() & 1u) ? 1.0 : -1.0;
      break;
    case ChargeKind::gaussian: {
      std::normal_distribution<double> normal;
      for (auto& v : seq.values) v = normal(rng);
      break;
    }
    case ChargeKind::uniform: {
      const double s = std::sqrt(3.0);
      for (auto& v : seq.values) v = s * (2.0 * rng.uniform() - 1.0);
      break;
    }
  }
  return seq;
}

LocalCharges local_charges(const Trajectory& traj, const ChargeSequence& charges) {
  if (static_cast<std::int64_t>(charges.size()) != traj.size())
    throw std::invalid_argument("local_charges: length mismatch");
  LocalCharges q;
  for (std::int64_t k = 0; k < traj.size(); ++k)
    q[traj.position(k)] += charges.values[static_cast<std::size_t>(k)];
  return q;
}

GroupedCharges group_charges(const Trajectory& traj, const ChargeSequence& charges) {
  if (static_cast<std::int64_t>(charges.size()) != traj.size())
    throw std::invalid_argument("group_charges: length mismatch");
  GroupedCharges g;
  for (std::int64_t k = 0; k < traj.size(); ++k)
    g[traj.position(k)].push_back(charges.values[static_cast<std::size_t>(k)]);
  return g;
}

std::unordered_map<Site, double, SiteHash> zeta_field(const LocalTimeField& field,
                                                       const GroupedCharges& grouped) {
  std::unordered_map<Site, double, SiteHash> zeta;
  std::int64_t attached = 0;
  for (const auto& [site, values] : grouped) {
    const std::int64_t l = field.count(site);
    if (l == 0) throw std::invalid_argument("zeta_field: charges attached to an unvisited site");
    if (static_cast<std::int64_t>(values.size()) != l)
      throw std::invalid_argument("zeta_field: charge count differs from local time");
    double q = 0.0;
    for (double v : values) q += v;
    zeta.emplace(site, q * q / static_cast<double>(l));
    attached += l;
  }
  if (attached != field.total())
    throw std::invalid_argument("zeta_field: visited sites without charges");
  return zeta;
}

WeightPoint rademacher_weight(std::int64_t l, double beta) {
  if (l < 0) throw std::invalid_argument("rademacher_weight: negative l");
  if (!(beta >= 0.0)) throw std::invalid_argument("rademacher_weight: negative beta");
  if (l == 0) return {0.0, 0.0};
  const double ld = static_cast<double>(l);
  if (l > kExactWeightMax) {
    // Gaussian regime: S_l^2 ~ l chi^2_1.
    return {-0.5 * std::log1p(2.0 * beta * ld), ld / (1.0 + 2.0 * beta * ld)};
  }
  // log term t(k) = log C(l,k) - l log 2 - beta (2k-l)^2 is concave in k and
  // peaks at k = l/2; sum outward until terms fall below 1e-18 of the peak.
  const std::int64_t c = l / 2;
  const double log_peak = std::lgamma(ld + 1.0) - std::lgamma(static_cast<double>(c) + 1.0) -
                          std::lgamma(static_cast<double>(l - c) + 1.0) - ld * std::log(2.0) -
                          beta * static_cast<double>((2 * c - l) * (2 * c - l));
  constexpr double kCut = 41.5;
  double sum = 0.0, sum_sq = 0.0;
  auto term = [&](std::int64_t k, double log_binom) {
    const auto s = static_cast<double>(2 * k - l);
    return log_binom - beta * s * s;
  };
  const double log_binom_c = log_peak + beta * static_cast<double>((2 * c - l) * (2 * c - l));
  double lb = log_binom_c;
  for (std::int64_t k = c; k <= l; ++k) {
    if (k > c) lb += std::log(static_cast<double>(l - k + 1) / static_cast<double>(k));
    const double t = term(k, lb) - log_peak;
    if (t < -kCut) break;
    const double w = std::exp(t);
    const auto s = static_cast<double>(2 * k - l);
    sum += w;
    sum_sq += w * s * s;
  }
  lb = log_binom_c;
  for (std::int64_t k = c - 1; k >= 0; --k) {
    lb += std::log(static_cast<double>(k + 1) / static_cast<double>(l - k));
    const double t = term(k, lb) - log_peak;
    if (t < -kCut) break;
    const double w = std::exp(t);
    const auto s = static_cast<double>(2 * k - l);
    sum += w;
    sum_sq += w * s * s;
  }
  return {log_peak + std::log(sum), sum_sq / sum};
}

WeightTable::WeightTable(std::int64_t l_max, double beta) : beta_(beta) {
  if (l_max < 0) throw std::invalid_argument("WeightTable: negative l_max");
  if (!(beta >= 0.0)) throw std::invalid_argument("WeightTable: negative beta");
  points_.reserve(static_cast<std::size_t>(l_max) + 1);
  for (std::int64_t l = 0; l <= l_max; ++l) points_.push_back(rademacher_weight(l, beta));
}

const WeightPoint& WeightTable::at(std::int64_t l) const {
  if (l < 0 || l >= static_cast<std::int64_t>(points_.size()))
    throw std::out_of_range("WeightTable: local time " + std::to_string(l) +
                            " beyond table range " + std::to_string(l_max()));
  return points_[static_cast<std::size_t>(l)];
}

double WeightTable::weight(std::int64_t l) const { return std::exp(log_weight(l)); }

WeightTable rademacher_weight_table(std::int64_t l_max, double beta) {
  return WeightTable(l_max, beta);
}

}  // namespace polymer
