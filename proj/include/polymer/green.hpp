// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "polymer/rng.hpp"
#include "polymer/stats.hpp"

namespace polymer {

enum class ReturnMethod {
  quadrature,   // trapezoid rule on the torus, exact for m < nodes
  convolution,  // step-distribution iteration on a truncated box
  series,       // lazy-walk binomial mixing of simple-walk return probabilities
};

const char* to_string(ReturnMethod m);

struct GridResolutionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ToleranceUnreachable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// P0(S(m) = 0) for m = 1..N of the lazy walk.
struct ReturnSeries {
  int d = 3;
  ReturnMethod method = ReturnMethod::series;
  std::vector<double> probs;     // probs[m - 1]
  double amplitude = 0.0;        // A in P ~ A m^{-d/2}, fitted on the last decade
  double truncation_tail = 0.0;  // bound on the sum over m > N
  double leakage = 0.0;          // mass lost to box truncation (convolution)

  std::int64_t terms() const { return static_cast<std::int64_t>(probs.size()); }
  double at(std::int64_t m) const { return probs.at(static_cast<std::size_t>(m - 1)); }
  double partial_sum() const;
};

/// `nodes` overrides the per-dimension quadrature grid (0: N + 1).
ReturnSeries return_probabilities(int d, std::int64_t N, ReturnMethod method,
                                  std::int64_t nodes = 0);

struct GreenConstant {
  int d = 3;
  double value = 0.0;          // partial sum + fitted tail estimate
  double partial_sum = 0.0;
  double tail_estimate = 0.0;  // A * int_N^inf m^{-d/2} dm
  double tail_bound = 0.0;     // 2 |value(N) - value(N/2)|
  double amplitude = 0.0;
  std::int64_t terms = 0;
};

/// c_d = sum_{m >= 1} P0(S(m) = 0), doubling N from 1024 until the
/// extrapolation error bound is <= tol.
GreenConstant c_d(int d, double tol, std::int64_t max_terms = std::int64_t{1} << 16);

struct EscapeProbability {
  int d = 3;
  double gamma0 = 0.0;
  double error = 0.0;
  GreenConstant c;
};

/// gamma0 = 1 / (1 + c_d).
EscapeProbability escape_probability(int d, double tol = 1e-3);

/// P0(no return to the origin in steps 1..N), exact by the renewal relation
/// u_m = sum_k f_k u_{m-k} applied to the series return probabilities.
double escape_within(int d, std::int64_t N);

/// Expected number of returns to the origin in steps 1..N, by simulation.
struct ReturnCountMC {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t walks = 0;
};
ReturnCountMC mc_return_count(int d, std::int64_t N, std::int64_t walks, Rng& rng);

/// Fraction of walks with no return to the origin in steps 1..steps.
TailEstimate mc_never_return(int d, std::int64_t steps, std::int64_t walks, Rng& rng);

/// Structured-text cache of (d, c_d, gamma0, N, tail bound).
struct GreenTableEntry {
  int d = 3;
  double c_d = 0.0;
  double gamma0 = 0.0;
  std::int64_t terms = 0;
  double tail_bound = 0.0;
};
void write_green_table(const std::string& path, const std::vector<GreenTableEntry>& entries);
std::vector<GreenTableEntry> read_green_table(const std::string& path);
GreenTableEntry green_entry(const EscapeProbability& esc);

}  // namespace polymer
