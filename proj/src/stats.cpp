// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "polymer/stats.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

namespace polymer {

const char* to_string(EstimateStatus s) {
  switch (s) {
    case EstimateStatus::ok: return "ok";
    case EstimateStatus::zero_hits: return "zero_hits";
    case EstimateStatus::infeasible: return "infeasible";
    case EstimateStatus::walk_factor_failed: return "walk_factor_failed";
    case EstimateStatus::charge_factor_failed: return "charge_factor_failed";
  }
  return "unknown";
}

TailEstimate TailEstimate::from_log(double log_p, double rel_stderr, std::int64_t samples,
                                    std::string method) {
  TailEstimate t;
  t.log_p = log_p;
  t.p_hat = std::exp(log_p);
  t.rel_stderr = rel_stderr;
  t.std_error = t.p_hat * rel_stderr;
  t.samples = samples;
  t.method = std::move(method);
  t.upper_95 = std::min(1.0, t.p_hat + 1.96 * t.std_error);
  if (!std::isfinite(log_p)) t.status = EstimateStatus::zero_hits;
  return t;
}

TailEstimate TailEstimate::from_hits(std::int64_t hits, std::int64_t samples,
                                     std::string method) {
  if (samples <= 0) throw std::invalid_argument("from_hits: samples must be positive");
  TailEstimate t;
  const double ns = static_cast<double>(samples);
  t.p_hat = static_cast<double>(hits) / ns;
  t.std_error = std::sqrt(t.p_hat * (1.0 - t.p_hat) / ns);
  t.log_p = hits > 0 ? std::log(t.p_hat) : -std::numeric_limits<double>::infinity();
  t.rel_stderr = hits > 0 ? t.std_error / t.p_hat : 0.0;
  t.upper_95 = clopper_pearson(hits, samples).second;
  t.samples = samples;
  t.method = std::move(method);
  t.status = hits > 0 ? EstimateStatus::ok : EstimateStatus::zero_hits;
  return t;
}

nlohmann::json TailEstimate::to_json() const {
  auto finite_or_null = [](double v) -> nlohmann::json {
    if (std::isfinite(v)) return v;
    return nullptr;
  };
  return {{"p_hat", p_hat},
          {"stderr", std_error},
          {"log_p", finite_or_null(log_p)},
          {"rel_stderr", rel_stderr},
          {"upper_95", upper_95},
          {"samples", samples},
          {"method", method},
          {"status", to_string(status)}};
}

void RunningStats::merge(const RunningStats& o) {
  if (o.n_ == 0) return;
  if (n_ == 0) {
    *this = o;
    return;
  }
  const double n = static_cast<double>(n_ + o.n_);
  const double d = o.mean_ - mean_;
  mean_ += d * static_cast<double>(o.n_) / n;
  m2_ += o.m2_ + d * d * static_cast<double>(n_) * static_cast<double>(o.n_) / n;
  n_ += o.n_;
}

double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (!std::isfinite(b)) return a;
  return a + std::log1p(std::exp(b - a));
}

std::pair<double, double> log_mean_exp(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("log_mean_exp: empty input");
  const double n = static_cast<double>(xs.size());
  const double lse = log_sum_exp(xs);
  if (!std::isfinite(lse)) return {lse, 0.0};
  const double log_mean = lse - std::log(n);
  // Relative stderr: sd(w/mean) / sqrt(n), computed on normalized weights.
  double s2 = 0.0;
  for (double x : xs) {
    const double r = std::exp(x - log_mean) - 1.0;
    s2 += r * r;
  }
  const double rel = xs.size() > 1 ? std::sqrt(s2 / (n - 1.0) / n) : 0.0;
  return {log_mean, rel};
}

double log_choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

double log_binomial_pmf(std::int64_t n, std::int64_t k, double p) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  const double kk = static_cast<double>(k);
  const double nk = static_cast<double>(n - k);
  double lp = log_choose(n, k);
  if (k > 0) lp += kk * std::log(p);
  if (n - k > 0) lp += nk * std::log1p(-p);
  return lp;
}

double log_binomial_upper_tail(std::int64_t n, std::int64_t k, double p) {
  if (k <= 0) return 0.0;
  if (k > n) return -std::numeric_limits<double>::infinity();
  if (static_cast<double>(k) <= p * static_cast<double>(n))
    return std::log1p(-std::exp(log_binomial_lower_tail(n, k - 1, p)));
  // Terms decrease beyond the mode; sum outward and stop once negligible.
  double acc = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = k; j <= n; ++j) {
    const double t = log_binomial_pmf(n, j, p);
    acc = log_add_exp(acc, t);
    if (static_cast<double>(j) > p * static_cast<double>(n) && t < acc - 40.0) break;
  }
  return std::min(acc, 0.0);
}

double log_binomial_lower_tail(std::int64_t n, std::int64_t k, double p) {
  if (k >= n) return 0.0;
  if (k < 0) return -std::numeric_limits<double>::infinity();
  if (static_cast<double>(k) >= p * static_cast<double>(n))
    return std::log1p(-std::exp(log_binomial_upper_tail(n, k + 1, p)));
  double acc = -std::numeric_limits<double>::infinity();
  for (std::int64_t j = k; j >= 0; --j) {
    const double t = log_binomial_pmf(n, j, p);
    acc = log_add_exp(acc, t);
    if (static_cast<double>(j) < p * static_cast<double>(n) && t < acc - 40.0) break;
  }
  return std::min(acc, 0.0);
}

std::pair<double, double> clopper_pearson(std::int64_t hits, std::int64_t trials, double alpha) {
  if (trials <= 0 || hits < 0 || hits > trials)
    throw std::invalid_argument("clopper_pearson: invalid counts");
  const double k = static_cast<double>(hits), n = static_cast<double>(trials);
  const double lower = hits > 0 ? boost::math::ibeta_inv(k, n - k + 1.0, alpha / 2.0) : 0.0;
  const double upper = hits < trials ? boost::math::ibeta_inv(k + 1.0, n - k, 1.0 - alpha / 2.0) : 1.0;
  return {lower, upper};
}

double student_t975(int dof) {
  if (dof < 1) throw std::invalid_argument("student_t975: dof must be positive");
  return boost::math::quantile(boost::math::students_t(dof), 0.975);
}

std::pair<double, double> batch_means(std::span<const double> series, int batches) {
  if (series.empty()) throw std::invalid_argument("batch_means: empty series");
  const auto n = static_cast<std::int64_t>(series.size());
  batches = static_cast<int>(std::min<std::int64_t>(batches, n));
  RunningStats means;
  double total = 0.0;
  for (double v : series) total += v;
  const std::int64_t size = n / batches;
  for (int b = 0; b < batches; ++b) {
    const std::int64_t begin = b * size;
    const std::int64_t end = (b == batches - 1) ? n : begin + size;
    double s = 0.0;
    for (std::int64_t i = begin; i < end; ++i) s += series[static_cast<std::size_t>(i)];
    means.add(s / static_cast<double>(end - begin));
  }
  return {total / static_cast<double>(n), batches > 1 ? means.std_error() : 0.0};
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("least_squares: need matching inputs with at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 1e-300 * n)) throw std::invalid_argument("least_squares: degenerate abscissas");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    f.residual_ss += r * r;
  }
  return f;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw std::invalid_argument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

}  // namespace polymer
