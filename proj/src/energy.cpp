// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "polymer/energy.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace polymer {

namespace {

void check_lengths(const Trajectory& traj, const ChargeSequence& charges) {
  if (static_cast<std::int64_t>(charges.size()) != traj.size())
    throw std::invalid_argument("energy: trajectory and charge lengths differ");
}

/// One integer id per position; equal ids iff equal sites.
std::vector<std::uint64_t> site_ids(const Trajectory& traj) {
  const std::int64_t n = traj.size();
  std::vector<std::uint64_t> ids(static_cast<std::size_t>(n));
  const SiteCodec codec(traj.dim(), std::max<std::int64_t>(traj.max_abs_coord(), 1));
  if (codec.packable()) {
    for (std::int64_t k = 0; k < n; ++k) ids[static_cast<std::size_t>(k)] = codec.pack(traj.coords(k));
    return ids;
  }
  std::unordered_map<Site, std::uint64_t, SiteHash> dense;
  for (std::int64_t k = 0; k < n; ++k) {
    auto [it, inserted] = dense.emplace(traj.position(k), dense.size());
    ids[static_cast<std::size_t>(k)] = it->second;
  }
  return ids;
}

bool is_rademacher(const ChargeSequence& charges) {
  if (charges.kind != ChargeKind::rademacher) return false;
  for (double v : charges.values)
    if (v != 1.0 && v != -1.0) throw std::invalid_argument("energy: non-sign Rademacher charge");
  return true;
}

struct SiteSums {
  std::vector<std::size_t> first;  // representative position index per site
  std::vector<long double> q;
  std::vector<std::int64_t> l;
};

SiteSums group_by_site(const Trajectory& traj, const ChargeSequence& charges) {
  const auto ids = site_ids(traj);
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ids[a] != ids[b] ? ids[a] < ids[b] : a < b;
  });
  SiteSums s;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t k = order[i];
    if (i == 0 || ids[k] != ids[order[i - 1]]) {
      s.first.push_back(k);
      s.q.push_back(0.0L);
      s.l.push_back(0);
    }
    s.q.back() += static_cast<long double>(charges.values[k]);
    ++s.l.back();
  }
  return s;
}

double direct_sum(const Trajectory& traj, const ChargeSequence& charges) {
  const auto ids = site_ids(traj);
  const std::size_t n = ids.size();
  if (is_rademacher(charges)) {
    std::vector<std::int8_t> sign(n);
    for (std::size_t k = 0; k < n; ++k) sign[k] = charges.values[k] > 0 ? 1 : -1;
    std::int64_t h = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::int64_t row = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i && ids[i] == ids[j]) row += sign[j];
      h += sign[i] * row;
    }
    return static_cast<double>(h);
  }
  long double h = 0.0L;
  for (std::size_t i = 0; i < n; ++i) {
    long double row = 0.0L;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i && ids[i] == ids[j]) row += charges.values[j];
    h += static_cast<long double>(charges.values[i]) * row;
  }
  return static_cast<double>(h);
}

}  // namespace

double hamiltonian(const Trajectory& traj, const ChargeSequence& charges, EnergyMethod method) {
  check_lengths(traj, charges);
  if (method == EnergyMethod::direct) return direct_sum(traj, charges);
  const SiteSums s = group_by_site(traj, charges);
  if (is_rademacher(charges)) {
    std::int64_t h = 0;
    for (std::size_t i = 0; i < s.q.size(); ++i) {
      const auto q = static_cast<std::int64_t>(s.q[i]);
      h += q * q;
    }
    return static_cast<double>(h - traj.size());
  }
  long double h = 0.0L;
  for (long double q : s.q) h += q * q;
  for (double v : charges.values) h -= static_cast<long double>(v) * v;
  return static_cast<double>(h);
}

double x_check(const Trajectory& traj, const ChargeSequence& charges) {
  check_lengths(traj, charges);
  const SiteSums s = group_by_site(traj, charges);
  long double x = 0.0L;
  for (std::size_t i = 0; i < s.q.size(); ++i) x += s.q[i] * s.q[i] - static_cast<long double>(s.l[i]);
  return static_cast<double>(x);
}

EnergyBreakdown decompose(const Trajectory& traj, const ChargeSequence& charges) {
  check_lengths(traj, charges);
  EnergyBreakdown b;
  const SiteSums s = group_by_site(traj, charges);
  long double x = 0.0L;
  for (std::size_t i = 0; i < s.q.size(); ++i) {
    const long double xi = s.q[i] * s.q[i] - static_cast<long double>(s.l[i]);
    b.per_site.emplace(traj.position(static_cast<std::int64_t>(s.first[i])), static_cast<double>(xi));
    x += xi;
  }
  long double y = 0.0L;
  if (!is_rademacher(charges))
    for (double v : charges.values) y += 1.0L - static_cast<long double>(v) * v;
  b.X_check = static_cast<double>(x);
  b.Y = static_cast<double>(y);
  b.H = static_cast<double>(x + y);
  return b;
}

SiteVariance site_variance_formula(std::int64_t l, const ChargeDistribution& dist) {
  if (l < 1) throw std::invalid_argument("site_variance_formula: l must be >= 1");
  const Moments m = dist.moments();
  const auto ld = static_cast<double>(l);
  return {ld * (m.fourth - 1.0) + 2.0 * (ld * ld - ld), 2.0 * (ld * ld - ld), m.chi1 * ld * ld};
}

}  // namespace polymer
