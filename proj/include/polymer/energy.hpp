// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <unordered_map>

#include "polymer/charges.hpp"
#include "polymer/lattice.hpp"

namespace polymer {

enum class EnergyMethod { direct, per_site };

struct EnergyBreakdown {
  double H = 0.0;
  double X_check = 0.0;  // sum_z q(z)^2 - l(z)
  double Y = 0.0;        // sum_k 1 - eta(k)^2
  std::unordered_map<Site, double, SiteHash> per_site;
};

/// H = sum over ordered pairs i != j of eta_i eta_j 1{S_i = S_j}.
double hamiltonian(const Trajectory& traj, const ChargeSequence& charges,
                   EnergyMethod method = EnergyMethod::per_site);

/// X_check alone, without building the per-site map.
double x_check(const Trajectory& traj, const ChargeSequence& charges);

EnergyBreakdown decompose(const Trajectory& traj, const ChargeSequence& charges);

struct SiteVariance {
  double exact = 0.0;  // E[(q^2 - l)^2] = l (E eta^4 - 1) + 2 (l^2 - l)
  double lower = 0.0;  // 2 (l^2 - l)
  double upper = 0.0;  // chi1 l^2
};

SiteVariance site_variance_formula(std::int64_t l, const ChargeDistribution& dist);

}  // namespace polymer
