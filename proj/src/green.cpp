// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "polymer/green.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "polymer/lattice.hpp"

namespace polymer {

const char* to_string(ReturnMethod m) {
  switch (m) {
    case ReturnMethod::quadrature: return "quadrature";
    case ReturnMethod::convolution: return "convolution";
    case ReturnMethod::series: return "series";
  }
  return "unknown";
}

double ReturnSeries::partial_sum() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

namespace {

void check_args(int d, std::int64_t N) {
  if (d < 3) throw std::invalid_argument("return_probabilities: d >= 3 required (transience)");
  if (d > kMaxDim) throw std::invalid_argument("return_probabilities: dimension too large");
  if (N < 1) throw std::invalid_argument("return_probabilities: N must be >= 1");
}

/// sum_j Binom(k, j; p) f(j), summed outward from the mode until weights drop
/// below 1e-20 of the modal weight.
template <class F>
double binomial_mix(std::int64_t k, double p, F&& f) {
  if (k == 0) return f(0);
  const auto mode = std::clamp<std::int64_t>(
      static_cast<std::int64_t>(std::floor(static_cast<double>(k + 1) * p)), 0, k);
  const double w0 = std::exp(log_binomial_pmf(k, mode, p));
  const double odds = p / (1.0 - p);
  double sum = w0 * f(mode);
  double w = w0;
  for (std::int64_t j = mode + 1; j <= k; ++j) {
    w *= static_cast<double>(k - j + 1) / static_cast<double>(j) * odds;
    if (w < 1e-20 * w0) break;
    sum += w * f(j);
  }
  w = w0;
  for (std::int64_t j = mode - 1; j >= 0; --j) {
    w *= static_cast<double>(j + 1) / static_cast<double>(k - j) / odds;
    if (w < 1e-20 * w0) break;
    sum += w * f(j);
  }
  return sum;
}

std::vector<double> series_probs(int d, std::int64_t N) {
  const auto n = static_cast<std::size_t>(N);
  std::vector<double> mu(n + 1, 0.0);
  mu[0] = 1.0;
  for (std::size_t k = 2; k <= n; k += 2)
    mu[k] = mu[k - 2] * static_cast<double>(k - 1) / static_cast<double>(k);
  std::vector<double> nu = mu;
  for (int r = 2; r <= d; ++r) {
    std::vector<double> next(n + 1, 0.0);
    const double p = 1.0 / r;
    for (std::size_t k = 0; k <= n; ++k)
      next[k] = binomial_mix(static_cast<std::int64_t>(k), p, [&](std::int64_t j) {
        return mu[static_cast<std::size_t>(j)] * nu[k - static_cast<std::size_t>(j)];
      });
    nu = std::move(next);
  }
  const double move = 2.0 * d / (2.0 * d + 1.0);
  std::vector<double> probs(n);
  for (std::size_t m = 1; m <= n; ++m)
    probs[m - 1] = binomial_mix(static_cast<std::int64_t>(m), move,
                                [&](std::int64_t k) { return nu[static_cast<std::size_t>(k)]; });
  return probs;
}

std::vector<double> quadrature_probs(int d, std::int64_t N, std::int64_t nodes) {
  const std::int64_t K = nodes > 0 ? nodes : N + 1;
  if (K <= N)
    throw GridResolutionError("quadrature: " + std::to_string(K) +
                              " nodes per dimension cannot resolve m = " + std::to_string(N));
  // cos(2 pi j / K) is symmetric under j -> K - j; fold onto j = 0..K/2.
  const std::int64_t F = K / 2 + 1;
  std::vector<double> cosv(static_cast<std::size_t>(F)), mult(static_cast<std::size_t>(F));
  for (std::int64_t j = 0; j < F; ++j) {
    cosv[static_cast<std::size_t>(j)] = std::cos(2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(K));
    mult[static_cast<std::size_t>(j)] = (j == 0 || (K % 2 == 0 && j == K / 2)) ? 1.0 : 2.0;
  }
  std::vector<double> factorial(static_cast<std::size_t>(d) + 1, 1.0);
  for (int i = 1; i <= d; ++i) factorial[static_cast<std::size_t>(i)] = factorial[static_cast<std::size_t>(i - 1)] * i;

  std::vector<long double> acc(static_cast<std::size_t>(N), 0.0L);
  std::vector<std::int64_t> idx(static_cast<std::size_t>(d), 0);
  const double norm = 1.0 / (2.0 * d + 1.0);
  while (true) {
    // Weight of the multiset idx: product of fold multiplicities times the
    // number of distinct orderings.
    double w = factorial[static_cast<std::size_t>(d)];
    double sum_cos = 0.0;
    std::size_t run = 1;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      w *= mult[static_cast<std::size_t>(idx[i])];
      sum_cos += cosv[static_cast<std::size_t>(idx[i])];
      if (i > 0 && idx[i] == idx[i - 1]) {
        ++run;
      } else {
        run = 1;
      }
      w /= static_cast<double>(run);
    }
    const double phi = (1.0 + 2.0 * sum_cos) * norm;
    long double pw = w;
    for (std::int64_t m = 0; m < N; ++m) {
      pw *= phi;
      acc[static_cast<std::size_t>(m)] += pw;
    }
    int pos = d - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == F - 1) --pos;
    if (pos < 0) break;
    const std::int64_t v = idx[static_cast<std::size_t>(pos)] + 1;
    for (int i = pos; i < d; ++i) idx[static_cast<std::size_t>(i)] = v;
  }
  const long double cells = std::pow(static_cast<long double>(K), d);
  std::vector<double> probs(static_cast<std::size_t>(N));
  for (std::size_t m = 0; m < probs.size(); ++m) probs[m] = static_cast<double>(acc[m] / cells);
  return probs;
}

std::vector<double> convolution_probs(int d, std::int64_t N, double* leakage) {
  // Reflection symmetry: store the orthant x_i >= 0 only. Box radius grows as
  // ceil(4 sqrt(m)), capped by m.
  auto radius = [](std::int64_t m) {
    return std::min<std::int64_t>(m, static_cast<std::int64_t>(std::ceil(4.0 * std::sqrt(static_cast<double>(m)))));
  };
  const std::int64_t R = radius(N);
  const std::int64_t side = R + 2;
  std::int64_t cells = 1;
  for (int i = 0; i < d; ++i) cells *= side;
  if (cells > (std::int64_t{1} << 28)) throw std::invalid_argument("convolution: box too large");
  std::vector<std::int64_t> stride(static_cast<std::size_t>(d));
  stride[0] = 1;
  for (int i = 1; i < d; ++i) stride[static_cast<std::size_t>(i)] = stride[static_cast<std::size_t>(i - 1)] * side;

  std::vector<double> cur(static_cast<std::size_t>(cells), 0.0), next(cur.size(), 0.0);
  cur[0] = 1.0;
  const double norm = 1.0 / (2.0 * d + 1.0);
  std::vector<double> probs(static_cast<std::size_t>(N));
  std::vector<std::int64_t> x(static_cast<std::size_t>(d));
  double max_leak = 0.0;
  for (std::int64_t m = 1; m <= N; ++m) {
    const std::int64_t rm = radius(m);
    std::fill(x.begin(), x.end(), 0);
    double mass = 0.0;
    while (true) {
      std::int64_t c = 0;
      int nonzero = 0;
      for (int i = 0; i < d; ++i) {
        c += x[static_cast<std::size_t>(i)] * stride[static_cast<std::size_t>(i)];
        nonzero += x[static_cast<std::size_t>(i)] > 0;
      }
      double s = cur[static_cast<std::size_t>(c)];
      for (int i = 0; i < d; ++i) {
        const std::int64_t st = stride[static_cast<std::size_t>(i)];
        const double up = cur[static_cast<std::size_t>(c + st)];
        const double down = x[static_cast<std::size_t>(i)] > 0 ? cur[static_cast<std::size_t>(c - st)] : up;
        s += up + down;
      }
      s *= norm;
      next[static_cast<std::size_t>(c)] = s;
      mass += s * static_cast<double>(1 << nonzero);
      int pos = 0;
      while (pos < d && x[static_cast<std::size_t>(pos)] == rm) x[static_cast<std::size_t>(pos++)] = 0;
      if (pos == d) break;
      ++x[static_cast<std::size_t>(pos)];
    }
    std::swap(cur, next);
    probs[static_cast<std::size_t>(m - 1)] = cur[0];
    max_leak = std::max(max_leak, 1.0 - mass);
  }
  if (leakage) *leakage = std::max(0.0, max_leak);
  return probs;
}

void fit_tail(ReturnSeries& s) {
  const std::int64_t N = s.terms();
  const std::int64_t lo = std::max<std::int64_t>(1, (N + 9) / 10);
  const double h = s.d / 2.0;
  double num = 0.0, den = 0.0;
  for (std::int64_t m = lo; m <= N; ++m) {
    const double g = std::pow(static_cast<double>(m), -h);
    num += s.at(m) * g;
    den += g * g;
  }
  s.amplitude = num / den;
  const double estimate = s.amplitude * std::pow(static_cast<double>(N), 1.0 - h) / (h - 1.0);
  s.truncation_tail = 2.0 * estimate;
}

}  // namespace

ReturnSeries return_probabilities(int d, std::int64_t N, ReturnMethod method, std::int64_t nodes) {
  check_args(d, N);
  ReturnSeries s;
  s.d = d;
  s.method = method;
  switch (method) {
    case ReturnMethod::quadrature: s.probs = quadrature_probs(d, N, nodes); break;
    case ReturnMethod::convolution: s.probs = convolution_probs(d, N, &s.leakage); break;
    case ReturnMethod::series: s.probs = series_probs(d, N); break;
  }
  fit_tail(s);
  return s;
}

GreenConstant c_d(int d, double tol, std::int64_t max_terms) {
  if (!(tol > 0.0)) throw std::invalid_argument("c_d: tol must be positive");
  double previous = std::numeric_limits<double>::quiet_NaN();
  for (std::int64_t N = 512;; N *= 2) {
    if (N > max_terms)
      throw ToleranceUnreachable("c_d: tail bound cannot reach " + std::to_string(tol) +
                                 " within " + std::to_string(max_terms) + " terms");
    const ReturnSeries s = return_probabilities(d, N, ReturnMethod::series);
    GreenConstant g;
    g.d = d;
    g.partial_sum = s.partial_sum();
    g.tail_estimate = 0.5 * s.truncation_tail;
    g.value = g.partial_sum + g.tail_estimate;
    g.amplitude = s.amplitude;
    g.terms = N;
    // Extrapolation error: twice the change since the previous doubling.
    g.tail_bound = 2.0 * std::abs(g.value - previous);
    if (g.tail_bound <= tol) return g;
    previous = g.value;
  }
}

EscapeProbability escape_probability(int d, double tol) {
  EscapeProbability e;
  e.d = d;
  e.c = c_d(d, tol);
  e.gamma0 = 1.0 / (1.0 + e.c.value);
  e.error = e.gamma0 * e.gamma0 * e.c.tail_bound;
  return e;
}

double escape_within(int d, std::int64_t N) {
  const ReturnSeries s = return_probabilities(d, N, ReturnMethod::series);
  const auto n = static_cast<std::size_t>(N);
  std::vector<double> u(n + 1, 1.0), f(n + 1, 0.0);
  for (std::size_t m = 1; m <= n; ++m) u[m] = s.probs[m - 1];
  double first_return = 0.0;
  for (std::size_t m = 1; m <= n; ++m) {
    double conv = 0.0;
    for (std::size_t k = 1; k < m; ++k) conv += f[k] * u[m - k];
    f[m] = u[m] - conv;
    first_return += f[m];
  }
  return 1.0 - first_return;
}

ReturnCountMC mc_return_count(int d, std::int64_t N, std::int64_t walks, Rng& rng) {
  check_args(d, N);
  if (walks < 2) throw std::invalid_argument("mc_return_count: need >= 2 walks");
  const auto k = static_cast<std::uint32_t>(move_count(d));
  RunningStats st;
  std::vector<std::int32_t> x(static_cast<std::size_t>(d));
  for (std::int64_t w = 0; w < walks; ++w) {
    std::fill(x.begin(), x.end(), 0);
    std::int64_t n2 = 0, returns = 0;
    for (std::int64_t m = 1; m <= N; ++m) {
      const auto mv = static_cast<int>(rng.below(k));
      if (mv != 0) {
        const int axis = (mv - 1) / 2;
        const std::int64_t before = x[static_cast<std::size_t>(axis)];
        x[static_cast<std::size_t>(axis)] += (mv % 2 == 1) ? 1 : -1;
        const std::int64_t after = x[static_cast<std::size_t>(axis)];
        n2 += after * after - before * before;
      }
      returns += n2 == 0;
    }
    st.add(static_cast<double>(returns));
  }
  return {st.mean(), st.std_error(), walks};
}

TailEstimate mc_never_return(int d, std::int64_t steps, std::int64_t walks, Rng& rng) {
  check_args(d, steps);
  const auto k = static_cast<std::uint32_t>(move_count(d));
  std::int64_t escaped = 0;
  std::vector<std::int32_t> x(static_cast<std::size_t>(d));
  for (std::int64_t w = 0; w < walks; ++w) {
    std::fill(x.begin(), x.end(), 0);
    std::int64_t n2 = 0;
    bool returned = false;
    for (std::int64_t m = 1; m <= steps && !returned; ++m) {
      const auto mv = static_cast<int>(rng.below(k));
      if (mv != 0) {
        const int axis = (mv - 1) / 2;
        const std::int64_t before = x[static_cast<std::size_t>(axis)];
        x[static_cast<std::size_t>(axis)] += (mv % 2 == 1) ? 1 : -1;
        const std::int64_t after = x[static_cast<std::size_t>(axis)];
        n2 += after * after - before * before;
      }
      returned = n2 == 0;
    }
    escaped += !returned;
  }
  return TailEstimate::from_hits(escaped, walks, "never_return");
}

GreenTableEntry green_entry(const EscapeProbability& esc) {
  return {esc.d, esc.c.value, esc.gamma0, esc.c.terms, esc.c.tail_bound};
}

void write_green_table(const std::string& path, const std::vector<GreenTableEntry>& entries) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : entries)
    j.push_back({{"d", e.d}, {"c_d", e.c_d}, {"gamma0", e.gamma0}, {"terms", e.terms},
                 {"tail_bound", e.tail_bound}});
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_green_table: cannot open " + path);
  out << j.dump(2) << "\n";
}

std::vector<GreenTableEntry> read_green_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_green_table: cannot open " + path);
  const auto j = nlohmann::json::parse(in);
  std::vector<GreenTableEntry> entries;
  for (const auto& e : j)
    entries.push_back({e.at("d").get<int>(), e.at("c_d").get<double>(), e.at("gamma0").get<double>(),
                       e.at("terms").get<std::int64_t>(), e.at("tail_bound").get<double>()});
  return entries;
}

}  // namespace polymer
