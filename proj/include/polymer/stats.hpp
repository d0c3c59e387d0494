// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace polymer {

enum class EstimateStatus {
  ok,
  zero_hits,             // no hits; upper_95 carries the Clopper-Pearson bound
  infeasible,            // event impossible under the given parameters
  walk_factor_failed,    // splitting lost every particle
  charge_factor_failed,  // no qualifying profile for the charge stage
};

const char* to_string(EstimateStatus s);

/// Probability estimate. log_p is the primary quantity for rare events;
/// p_hat = exp(log_p) may underflow to 0 while log_p stays finite.
struct TailEstimate {
  double p_hat = 0.0;
  double std_error = 0.0;
  double log_p = -std::numeric_limits<double>::infinity();
  double rel_stderr = 0.0;  // std_error / p_hat, meaningful in log-space
  double upper_95 = 1.0;    // Clopper-Pearson upper bound (binomial estimators)
  std::int64_t samples = 0;
  std::string method;
  EstimateStatus status = EstimateStatus::ok;

  static TailEstimate from_log(double log_p, double rel_stderr, std::int64_t samples,
                               std::string method);
  static TailEstimate from_hits(std::int64_t hits, std::int64_t samples, std::string method);
  /// Stderr of log_p by the delta method.
  double log_stderr() const { return rel_stderr; }
  nlohmann::json to_json() const;
};

/// Welford running mean and variance.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  void merge(const RunningStats& o);
  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  std::int64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

double log_sum_exp(std::span<const double> xs);
double log_add_exp(double a, double b);

/// Mean of exp(xs) in log-space together with the relative standard error.
std::pair<double, double> log_mean_exp(std::span<const double> xs);

double log_choose(std::int64_t n, std::int64_t k);
double log_binomial_pmf(std::int64_t n, std::int64_t k, double p);
/// log P(Bin(n, p) >= k).
double log_binomial_upper_tail(std::int64_t n, std::int64_t k, double p);
/// log P(Bin(n, p) <= k).
double log_binomial_lower_tail(std::int64_t n, std::int64_t k, double p);

/// Two-sided Clopper-Pearson interval at confidence 1 - alpha.
std::pair<double, double> clopper_pearson(std::int64_t hits, std::int64_t trials,
                                          double alpha = 0.05);

/// Two-sided 97.5% Student t quantile.
double student_t975(int dof);

/// Batch-means estimate of the mean and its standard error.
std::pair<double, double> batch_means(std::span<const double> series, int batches = 20);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_ss = 0.0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

/// Total variation distance between two probability vectors of equal length.
double total_variation(std::span<const double> p, std::span<const double> q);

}  // namespace polymer
