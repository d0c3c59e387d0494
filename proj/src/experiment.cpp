// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "polymer/experiment.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

#include "polymer/charges.hpp"
#include "polymer/energy.hpp"
#include "polymer/gibbs.hpp"
#include "polymer/green.hpp"
#include "polymer/lattice.hpp"
#include "polymer/parallel.hpp"
#include "polymer/rng.hpp"
#include "polymer/stats.hpp"
#include "polymer/tails.hpp"

namespace polymer {

using nlohmann::json;

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"identity_suite", "oracle_compare", "level_sets",
                                                 "green",          "tails_scan",     "gibbs_scan",
                                                 "conjecture_probe"};
  return kinds;
}

json default_params(const std::string& kind) {
  if (kind == "identity_suite")
    return {{"n_max", 1000}, {"dims", {3, 4, 5}}, {"distributions", {"rademacher", "gaussian"}},
            {"chunk", 500}, {"variance_l_max", 12}};
  if (kind == "oracle_compare")
    return {{"d", 3}, {"ns", {2, 3, 4, 5, 6}}, {"tail_x", 2.0}};
  if (kind == "level_sets")
    return {{"d", 3}, {"n", 100000}, {"ks", {1, 2, 3, 4}}, {"l2_ns", {20000, 80000}}, {"chunk", 25}};
  if (kind == "green")
    return {{"dims", {3, 4}}, {"compare_terms", 100}, {"tol", 1e-5}, {"mc_steps", 1000},
            {"escape_steps", 1000}, {"range_n", 100000}};
  if (kind == "tails_scan")
    return {{"families", {"d3_xi", "d3_n", "d3_upper", "d4_moderate", "d4_folded", "ordering"}},
            {"distribution", "rademacher"},
            {"d3",
             {{"n", 4096}, {"xis", {2, 4, 8, 16}}, {"ns", {1024, 2048, 4096, 8192, 16384}},
              {"xi_fixed", 4}, {"delta0", 0.9}, {"eps0", 0.25}, {"delta", 0.1}, {"lambda", 0.05}}},
            {"d4_moderate",
             {{"ns", {10000, 30000, 100000, 300000, 1000000}}, {"xi_exponent", 0.2}, {"delta", 0.1}}},
            {"d4_folded",
             {{"ns", {2048, 4096, 8192, 16384, 32768}}, {"x_fraction", 0.03125}, {"eps0", 0.25},
              {"delta0", 0.5}, {"delta", 0.1}}},
            {"ordering",
             {{"n", 64}, {"xs", {32, 40, 48}}, {"delta0", 0.9}, {"eps0", 0.25}, {"delta", 0.1},
              {"lambda", 0.5}}}};
  if (kind == "gibbs_scan")
    return {{"d", 3},
            {"s", 0.4},
            {"exact", {{"n", 3}, {"beta_eff", 0.5}}},
            {"partition",
             {{"ns", {1000, 10000, 1024}}, {"betas", {0.2, 0.2, 8.0}}, {"grid_points", 3}}},
            {"phase", {{"n", 4096}, {"betas", {0.2, 8.0}}, {"a", {2, 4, 8}}, {"b", {2, 4, 8}}}}};
  if (kind == "conjecture_probe")
    return {{"d", 3}, {"n", 10000}, {"ys", {1, 2, 4, 8, 16}},
            {"nagaev", {{"n", 10000}, {"t_multiples", {1, 2, 3, 4}}, {"c_y", 2.0}}}};
  throw ConfigError("unknown experiment kind '" + kind + "'");
}

json default_budget(const std::string& kind) {
  if (kind == "identity_suite") return {{"instances", 10000}};
  if (kind == "oracle_compare") return {{"samples", 1000000}, {"tail_samples", 200000}};
  if (kind == "level_sets") return {{"walks", 200}, {"l2_walks", 100}};
  if (kind == "green")
    return {{"mc_walks", 500000}, {"escape_walks", 100000}, {"range_walks", 50}};
  if (kind == "tails_scan")
    return {{"particles", 400}, {"replicates", 4}, {"profiles", 24}, {"charge_samples", 1000},
            {"upper_walks", 200}, {"moderate_walks", 20}, {"naive_samples", 1000000},
            {"ordering_upper_walks", 20000}};
  if (kind == "gibbs_scan")
    return {{"exact_steps", 1000000}, {"partition_steps", 50000}, {"phase_steps", 200000},
            {"phase_thin", 200}, {"chains", 1}};
  if (kind == "conjecture_probe") return {{"samples", 200}, {"nagaev_samples", 20000}};
  throw ConfigError("unknown experiment kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Config parsing and validation

namespace {

std::string type_name(const json& j) {
  if (j.is_number()) return "number";
  return j.type_name();
}

void validate_against(const json& user, const json& def, const std::string& path) {
  if (!user.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& [key, value] : user.items()) {
    const std::string where = path + "." + key;
    if (!def.contains(key)) throw ConfigError(where + ": unknown key");
    const json& d = def.at(key);
    if (type_name(value) != type_name(d))
      throw ConfigError(where + ": expected " + type_name(d) + ", got " + type_name(value));
    if (value.is_object()) validate_against(value, d, where);
    if (value.is_array()) {
      if (value.empty()) throw ConfigError(where + ": grid must be nonempty");
      for (const auto& e : value)
        if (type_name(e) != type_name(d.front()))
          throw ConfigError(where + ": elements must be " + type_name(d.front()));
    }
    if (value.is_number_float() && !std::isfinite(value.get<double>()))
      throw ConfigError(where + ": must be finite");
  }
}

std::int64_t as_int(const json& j, const std::string& where) {
  const double v = j.get<double>();
  if (std::floor(v) != v || std::abs(v) > 9e15) throw ConfigError(where + ": expected an integer");
  return static_cast<std::int64_t>(v);
}

std::vector<double> as_doubles(const json& j) { return j.get<std::vector<double>>(); }

std::vector<std::int64_t> as_ints(const json& j, const std::string& where) {
  std::vector<std::int64_t> out;
  for (const auto& e : j) out.push_back(as_int(e, where));
  return out;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

// ---------------------------------------------------------------------------
// Tasks

class Emitter {
 public:
  explicit Emitter(std::vector<ResultRecord>& out) : out_(out) {}
  void operator()(const std::string& metric, double value, double se = 0.0, json params = json::object(),
                  json extra = json::object()) {
    ResultRecord r;
    r.metric = metric;
    r.value = value;
    r.std_error = se;
    r.params = std::move(params);
    r.extra = std::move(extra);
    out_.push_back(std::move(r));
  }

 private:
  std::vector<ResultRecord>& out_;
};

struct Task {
  json params;  // full parameter tuple of the task
  std::function<void(Rng&, Emitter&, const json&)> body;
};

json with(json base, const json& more) {
  for (const auto& [k, v] : more.items()) base[k] = v;
  return base;
}

json estimate_extra(const TailEstimate& t) {
  return {{"p_hat", t.p_hat},
          {"std_error", t.std_error},
          {"log_p", std::isfinite(t.log_p) ? json(t.log_p) : json(nullptr)},
          {"upper_95", t.upper_95},
          {"samples", t.samples},
          {"method", t.method},
          {"status", to_string(t.status)}};
}

// -- identity_suite ----------------------------------------------------------

std::vector<Task> plan_identity(const json& p, const json& b) {
  const std::int64_t instances = as_int(b.at("instances"), "budget.instances");
  const std::int64_t n_max = as_int(p.at("n_max"), "params.n_max");
  const std::int64_t chunk = as_int(p.at("chunk"), "params.chunk");
  const auto dims = as_ints(p.at("dims"), "params.dims");
  const auto dists = p.at("distributions").get<std::vector<std::string>>();
  const std::int64_t l_max = as_int(p.at("variance_l_max"), "params.variance_l_max");
  require(instances > 0, "budget.instances: must be positive");
  require(n_max >= 1, "params.n_max: must be >= 1");
  require(chunk >= 1, "params.chunk: must be >= 1");
  require(l_max >= 1 && l_max <= 24, "params.variance_l_max: must lie in [1, 24]");
  for (auto d : dims) require(d >= 1 && d <= kMaxDim, "params.dims: dimension out of range");
  std::vector<ChargeDistribution> laws;
  for (const auto& name : dists) {
    try {
      laws.push_back(ChargeDistribution::from_name(name));
    } catch (const std::exception& e) {
      throw ConfigError("params.distributions: " + std::string(e.what()));
    }
  }
  std::vector<Task> tasks;
  for (std::int64_t start = 0; start < instances; start += chunk) {
    const std::int64_t end = std::min(instances, start + chunk);
    Task t;
    t.params = {{"part", "energy_identities"}, {"first_instance", start}, {"instances", end - start},
                {"n_max", n_max}, {"dims", dims}, {"distributions", dists}};
    t.body = [=](Rng& rng, Emitter& emit, const json& tp) {
      std::int64_t v_methods = 0, v_decomp = 0, v_y = 0, v_lower = 0;
      double max_rel = 0.0;
      for (std::int64_t i = start; i < end; ++i) {
        const int d = static_cast<int>(dims[rng.below(static_cast<std::uint32_t>(dims.size()))]);
        const std::int64_t n = 1 + rng.below(static_cast<std::uint32_t>(n_max));
        const ChargeDistribution& law = laws[static_cast<std::size_t>(i) % laws.size()];
        const Trajectory traj = sample_walk(n, d, rng);
        const ChargeSequence q = sample_charges(n, law, rng);
        const double hd = hamiltonian(traj, q, EnergyMethod::direct);
        const double hp = hamiltonian(traj, q, EnergyMethod::per_site);
        const EnergyBreakdown br = decompose(traj, q);
        const bool exact = law.kind() == ChargeKind::rademacher;
        const double tol = exact ? 0.0 : 1e-10 * std::max(1.0, std::abs(hd));
        if (exact) {
          v_methods += hd != hp;
        } else {
          const double rel = std::abs(hd - hp) / std::max(1.0, std::abs(hd));
          max_rel = std::max(max_rel, rel);
          v_methods += rel >= 1e-10;
        }
        v_decomp += std::abs(br.H - (br.X_check + br.Y)) > tol || std::abs(br.H - hp) > tol;
        if (exact) v_y += br.Y != 0.0;
        double floor = -static_cast<double>(n);
        if (!exact) {
          floor = 0.0;
          for (double v : q.values) floor -= v * v;
        }
        v_lower += hp < floor - tol;
      }
      emit("instances", static_cast<double>(end - start), 0.0, tp);
      emit("violations_energy_methods", static_cast<double>(v_methods), 0.0, tp);
      emit("violations_decomposition", static_cast<double>(v_decomp), 0.0, tp);
      emit("violations_y_zero", static_cast<double>(v_y), 0.0, tp);
      emit("violations_lower_bound", static_cast<double>(v_lower), 0.0, tp);
      emit("max_rel_err_gaussian", max_rel, 0.0, tp);
    };
    tasks.push_back(std::move(t));
  }
  Task v;
  v.params = {{"part", "variance_identity"}, {"l_max", l_max}, {"distribution", "rademacher"}};
  v.body = [=](Rng&, Emitter& emit, const json& tp) {
    const ChargeDistribution rad(ChargeKind::rademacher);
    for (std::int64_t l = 1; l <= l_max; ++l) {
      long double sum = 0.0L;
      const std::uint64_t patterns = std::uint64_t{1} << l;
      for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        const std::int64_t q = 2 * std::popcount(mask) - l;
        const std::int64_t y = q * q - l;
        sum += static_cast<long double>(y * y);
      }
      const double empirical = static_cast<double>(sum / patterns);
      const SiteVariance f = site_variance_formula(l, rad);
      const json lp = with(tp, {{"l", l}});
      emit("variance_abs_error", std::abs(empirical - f.exact), 0.0, lp,
           {{"exhaustive", empirical}, {"formula", f.exact}, {"lower", f.lower}, {"upper", f.upper}});
      emit("sandwich_ok", (f.lower <= empirical + 1e-12 && empirical <= f.upper + 1e-12) ? 1.0 : 0.0,
           0.0, lp);
    }
  };
  tasks.push_back(std::move(v));
  return tasks;
}

// -- oracle_compare ----------------------------------------------------------

std::vector<Task> plan_oracle(const json& p, const json& b) {
  const int d = static_cast<int>(as_int(p.at("d"), "params.d"));
  const auto ns = as_ints(p.at("ns"), "params.ns");
  const double tail_x = p.at("tail_x").get<double>();
  const std::int64_t samples = as_int(b.at("samples"), "budget.samples");
  const std::int64_t tail_samples = as_int(b.at("tail_samples"), "budget.tail_samples");
  require(samples > 0 && tail_samples > 0, "budget: sample counts must be positive");
  for (auto n : ns) {
    require(n >= 1, "params.ns: n must be >= 1");
    try {
      double states = std::pow(2.0, static_cast<double>(n)) *
                      std::pow(static_cast<double>(move_count(d)), static_cast<double>(n - 1));
      require(states <= 2.0e7, "params.ns: n = " + std::to_string(n) + " too large for enumeration");
    } catch (const ConfigError&) {
      throw;
    }
  }
  std::vector<Task> tasks;
  for (auto n : ns) {
    Task t;
    t.params = {{"n", n}, {"d", d}, {"samples", samples}, {"tail_x", tail_x}, {"tail_samples", tail_samples}};
    t.body = [=](Rng& rng, Emitter& emit, const json& tp) {
      const ExactHDistribution exact = exact_h_distribution(n, d);
      const auto hist = sample_h_histogram(n, d, samples, rng);
      std::map<std::int64_t, std::pair<double, double>> joint;  // h -> (exact, empirical)
      for (const auto& [h, c] : exact.counts) joint[h].first = exact.pmf(h);
      for (const auto& [h, c] : hist)
        joint[h].second = static_cast<double>(c) / static_cast<double>(samples);
      std::vector<double> pe, pm;
      for (const auto& [h, pr] : joint) {
        pe.push_back(pr.first);
        pm.push_back(pr.second);
      }
      double fe = 0.0, fm = 0.0, max_z = 0.0;
      std::int64_t violations = 0;
      const auto ns_d = static_cast<double>(samples);
      for (const auto& [h, pr] : joint) {
        fe += pr.first;
        fm += pr.second;
        const double F = std::min(1.0, fe);
        if (F <= 0.0 || F >= 1.0 - 1e-15) {
          violations += std::abs(fm - F) > 1e-12;
          continue;
        }
        const double z = std::abs(fm - F) / std::sqrt(F * (1.0 - F) / ns_d);
        max_z = std::max(max_z, z);
        violations += z > 3.0;
      }
      emit("tv", total_variation(pe, pm), 0.0, tp, {{"support", joint.size()}});
      emit("max_tail_z", max_z, 0.0, tp);
      emit("tail_violations", static_cast<double>(violations), 0.0, tp);
      emit("exact_mean", exact.mean(), 0.0, tp);
      emit("exact_variance", exact.variance(), 0.0, tp);
      const TailEstimate naive = naive_tail(n, d, ChargeDistribution(), tail_x, tail_samples, rng);
      const double ref = exact.lower_tail(tail_x);
      const double se = std::sqrt(ref * (1.0 - ref) / static_cast<double>(tail_samples));
      emit("naive_tail_z", se > 0.0 ? std::abs(naive.p_hat - ref) / se : std::abs(naive.p_hat - ref),
           0.0, tp, with(estimate_extra(naive), {{"exact", ref}}));
    };
    tasks.push_back(std::move(t));
  }
  return tasks;
}

// -- green -------------------------------------------------------------------

std::vector<Task> plan_green(const json& p, const json& b) {
  const auto dims = as_ints(p.at("dims"), "params.dims");
  const std::int64_t terms = as_int(p.at("compare_terms"), "params.compare_terms");
  const double tol = p.at("tol").get<double>();
  const std::int64_t mc_steps = as_int(p.at("mc_steps"), "params.mc_steps");
  const std::int64_t esc_steps = as_int(p.at("escape_steps"), "params.escape_steps");
  const std::int64_t range_n = as_int(p.at("range_n"), "params.range_n");
  const std::int64_t mc_walks = as_int(b.at("mc_walks"), "budget.mc_walks");
  const std::int64_t esc_walks = as_int(b.at("escape_walks"), "budget.escape_walks");
  const std::int64_t range_walks = as_int(b.at("range_walks"), "budget.range_walks");
  for (auto d : dims) require(d >= 3 && d <= kMaxDim, "params.dims: d must lie in [3, 8]");
  require(terms >= 1 && mc_steps >= 1 && esc_steps >= 1 && range_n >= 1, "params: sizes must be positive");
  require(tol > 0.0, "params.tol: must be positive");
  require(mc_walks >= 2 && esc_walks >= 1 && range_walks >= 2, "budget: walk counts too small");
  std::vector<Task> tasks;
  for (auto d64 : dims) {
    const int d = static_cast<int>(d64);
    tasks.push_back({{{"d", d}, {"part", "terms"}, {"terms", terms}},
                     [=](Rng&, Emitter& emit, const json& tp) {
                       const auto q = return_probabilities(d, terms, ReturnMethod::quadrature);
                       const auto c = return_probabilities(d, terms, ReturnMethod::convolution);
                       const auto s = return_probabilities(d, terms, ReturnMethod::series);
                       double qc = 0.0, qs = 0.0;
                       for (std::int64_t m = 1; m <= terms; ++m) {
                         qc = std::max(qc, std::abs(q.at(m) - c.at(m)) / q.at(m));
                         qs = std::max(qs, std::abs(q.at(m) - s.at(m)) / q.at(m));
                       }
                       emit("quad_conv_max_rel", qc, 0.0, tp, {{"leakage", c.leakage}});
                       emit("quad_series_max_rel", qs, 0.0, tp);
                     }});
    tasks.push_back({{{"d", d}, {"part", "constants"}, {"tol", tol}},
                     [=](Rng&, Emitter& emit, const json& tp) {
                       const EscapeProbability e = escape_probability(d, tol);
                       emit("c_d", e.c.value, e.c.tail_bound, tp, {{"terms", e.c.terms}});
                       emit("gamma0", e.gamma0, e.error, tp);
                     }});
    tasks.push_back({{{"d", d}, {"part", "mc_returns"}, {"steps", mc_steps}, {"walks", mc_walks}},
                     [=](Rng& rng, Emitter& emit, const json& tp) {
                       const double exact =
                           return_probabilities(d, mc_steps, ReturnMethod::series).partial_sum();
                       const ReturnCountMC mc = mc_return_count(d, mc_steps, mc_walks, rng);
                       emit("mc_returns", mc.mean, mc.std_error, tp, {{"exact_partial_sum", exact}});
                     }});
    tasks.push_back({{{"d", d}, {"part", "never_return"}, {"steps", esc_steps}, {"walks", esc_walks}, {"tol", tol}},
                     [=](Rng& rng, Emitter& emit, const json& tp) {
                       const double within = escape_within(d, esc_steps);
                       const double g0 = escape_probability(d, tol).gamma0;
                       const TailEstimate t = mc_never_return(d, esc_steps, esc_walks, rng);
                       emit("never_return", t.p_hat, t.std_error, tp,
                            {{"exact_within_steps", within}, {"gamma0", g0}});
                       emit("gamma0_from_never_return", t.p_hat - (within - g0), t.std_error, tp);
                     }});
    tasks.push_back({{{"d", d}, {"part", "range"}, {"n", range_n}, {"walks", range_walks}},
                     [=](Rng& rng, Emitter& emit, const json& tp) {
                       RunningStats st;
                       for (std::int64_t w = 0; w < range_walks; ++w)
                         st.add(static_cast<double>(range_size(local_times(sample_walk(range_n, d, rng)))) /
                                static_cast<double>(range_n));
                       emit("range_fraction", st.mean(), st.std_error(), tp);
                     }});
  }
  return tasks;
}

// -- level_sets --------------------------------------------------------------

std::vector<Task> plan_level_sets(const json& p, const json& b) {
  const int d = static_cast<int>(as_int(p.at("d"), "params.d"));
  const std::int64_t n = as_int(p.at("n"), "params.n");
  const auto ks = as_ints(p.at("ks"), "params.ks");
  const auto l2_ns = as_ints(p.at("l2_ns"), "params.l2_ns");
  const std::int64_t chunk = as_int(p.at("chunk"), "params.chunk");
  const std::int64_t walks = as_int(b.at("walks"), "budget.walks");
  const std::int64_t l2_walks = as_int(b.at("l2_walks"), "budget.l2_walks");
  require(d >= 3 && d <= kMaxDim, "params.d: must lie in [3, 8]");
  require(n >= 1 && chunk >= 1, "params: n and chunk must be positive");
  for (auto k : ks) require(k >= 1, "params.ks: levels must be >= 1");
  for (auto m : l2_ns) require(m >= 1, "params.l2_ns: sizes must be positive");
  require(walks >= 1 && l2_walks >= 1, "budget: walk counts must be positive");
  std::vector<Task> tasks;
  tasks.push_back({{{"d", d}, {"part", "gamma0"}}, [=](Rng&, Emitter& emit, const json& tp) {
                     const EscapeProbability e = escape_probability(d, 1e-5);
                     emit("gamma0", e.gamma0, e.error, tp);
                   }});
  for (std::int64_t s = 0; s < walks; s += chunk) {
    const std::int64_t count = std::min(chunk, walks - s);
    tasks.push_back({{{"d", d}, {"part", "levels"}, {"n", n}, {"first_walk", s}, {"walks", count}},
                     [=](Rng& rng, Emitter& emit, const json& tp) {
                       for (std::int64_t w = 0; w < count; ++w) {
                         const auto h = level_histogram(local_times(sample_walk(n, d, rng)));
                         for (auto k : ks) {
                           const double c = k < static_cast<std::int64_t>(h.size()) ? static_cast<double>(h[static_cast<std::size_t>(k)]) : 0.0;
                           emit("level_fraction", c / static_cast<double>(n), 0.0,
                                with(tp, {{"k", k}, {"walk", s + w}}));
                         }
                       }
                     }});
  }
  for (auto m : l2_ns)
    for (std::int64_t s = 0; s < l2_walks; s += chunk) {
      const std::int64_t count = std::min(chunk, l2_walks - s);
      tasks.push_back({{{"d", d}, {"part", "l2"}, {"n", m}, {"first_walk", s}, {"walks", count}},
                       [=](Rng& rng, Emitter& emit, const json& tp) {
                         for (std::int64_t w = 0; w < count; ++w) {
                           const double q2 = q_norm(local_times(sample_walk(m, d, rng)), 2.0);
                           emit("l2_sq_over_n", q2 / static_cast<double>(m), 0.0, with(tp, {{"walk", s + w}}));
                         }
                       }});
    }
  return tasks;
}

// -- tails_scan --------------------------------------------------------------

StrategyBudget strategy_budget(const json& b) {
  StrategyBudget sb;
  sb.particles = as_int(b.at("particles"), "budget.particles");
  sb.replicates = static_cast<int>(as_int(b.at("replicates"), "budget.replicates"));
  sb.profiles = as_int(b.at("profiles"), "budget.profiles");
  sb.charge_samples = as_int(b.at("charge_samples"), "budget.charge_samples");
  return sb;
}

json strategy_extra(const StrategyEstimate& e) {
  return with(estimate_extra(e.estimate),
              {{"T", e.T}, {"radius", e.radius}, {"target_volume", e.target_volume}, {"volume", e.volume},
               {"log_walk_factor", std::isfinite(e.log_walk_factor) ? json(e.log_walk_factor) : json(nullptr)},
               {"walk_rel_stderr", e.walk_rel_stderr}, {"occupation_fraction", e.occupation_fraction},
               {"mean_log_charge_factor", e.mean_log_charge_factor},
               {"bn_failure_fraction", e.bn_failure_fraction}, {"profiles_evaluated", e.profiles_evaluated}});
}

void emit_neg_log(Emitter& emit, const std::string& metric, const TailEstimate& t, const json& tp, json extra) {
  emit(metric, std::isfinite(t.log_p) ? -t.log_p : std::numeric_limits<double>::quiet_NaN(), t.rel_stderr,
       tp, std::move(extra));
}

std::vector<Task> plan_tails(const json& p, const json& b) {
  const auto families = p.at("families").get<std::vector<std::string>>();
  ChargeDistribution dist;
  try {
    dist = ChargeDistribution::from_name(p.at("distribution").get<std::string>());
  } catch (const std::exception& e) {
    throw ConfigError("params.distribution: " + std::string(e.what()));
  }
  const std::string dname = dist.name();
  const StrategyBudget sb = strategy_budget(b);
  require(sb.particles > 0 && sb.replicates > 0 && sb.profiles > 0 && sb.charge_samples > 0,
          "budget: strategy budget must be positive");
  const std::int64_t upper_walks = as_int(b.at("upper_walks"), "budget.upper_walks");
  const std::int64_t moderate_walks = as_int(b.at("moderate_walks"), "budget.moderate_walks");
  const std::int64_t naive_samples = as_int(b.at("naive_samples"), "budget.naive_samples");
  const std::int64_t ord_upper = as_int(b.at("ordering_upper_walks"), "budget.ordering_upper_walks");
  require(upper_walks >= 2 && moderate_walks >= 1 && naive_samples >= 1 && ord_upper >= 2,
          "budget: walk and sample counts too small");
  const json budget_tuple = b;
  const json& d3 = p.at("d3");
  std::vector<Task> tasks;
  auto d3_config = [&](const json& src) {
    StrategyConfig c;
    c.delta0 = src.at("delta0").get<double>();
    c.eps0 = src.at("eps0").get<double>();
    c.delta = src.at("delta").get<double>();
    require(c.delta0 > 0.0 && c.eps0 > 0.0 && c.eps0 < 1.0 && c.delta > 0.0,
            "params: delta0 > 0, eps0 in (0,1), delta > 0 required");
    return c;
  };
  for (const auto& family : families) {
    if (family == "d3_xi" || family == "d3_n" || family == "d3_upper") {
      const StrategyConfig c = d3_config(d3);
      const std::int64_t n0 = as_int(d3.at("n"), "params.d3.n");
      const auto xis = as_doubles(d3.at("xis"));
      const auto ns = as_ints(d3.at("ns"), "params.d3.ns");
      const double xi0 = d3.at("xi_fixed").get<double>();
      const double lambda = d3.at("lambda").get<double>();
      require(n0 >= 2 && lambda > 0.0 && xi0 > 0.0, "params.d3: n >= 2, lambda > 0, xi_fixed > 0");
      for (double xi : xis) require(xi > 0.0, "params.d3.xis: must be positive");
      for (auto n : ns) require(n >= 2, "params.d3.ns: must be >= 2");
      std::vector<std::tuple<std::int64_t, double, std::string>> grid;
      if (family == "d3_xi" || family == "d3_upper")
        for (double xi : xis) grid.emplace_back(n0, xi, "xi");
      if (family == "d3_n" || family == "d3_upper")
        for (auto n : ns) grid.emplace_back(n, xi0, "n");
      for (const auto& [n, xi, scan] : grid) {
        const double x = xi * std::pow(static_cast<double>(n), 2.0 / 3.0);
        const bool upper = family == "d3_upper";
        json tp = {{"family", family}, {"scan", scan}, {"d", 3}, {"n", n}, {"xi", xi}, {"x", x},
                   {"distribution", dname}};
        if (upper) {
          const double y = std::pow(xi, 0.2) * std::pow(static_cast<double>(n), 1.0 / 3.0);
          tp["lambda"] = lambda;
          tp["y"] = y;
          tp["walks"] = upper_walks;
          tasks.push_back({tp, [=](Rng& rng, Emitter& emit, const json& t) {
                             const UpperBound ub = tilted_upper_bound(n, 3, x, lambda, y, upper_walks, dist, rng);
                             emit("neg_log_upper", -ub.log_bound, ub.rel_stderr, t,
                                  {{"bound", ub.bound()}, {"log_bound", ub.log_bound}});
                           }});
        } else {
          tp["delta0"] = c.delta0;
          tp["eps0"] = c.eps0;
          tp["delta"] = c.delta;
          tp["budget"] = budget_tuple;
          tasks.push_back({tp, [=](Rng& rng, Emitter& emit, const json& t) {
                             const StrategyEstimate e = strategy_lower_bound(n, 3, x, c, sb, dist, rng);
                             emit_neg_log(emit, "neg_log_lower", e.estimate, t, strategy_extra(e));
                           }});
        }
      }
    } else if (family == "d4_moderate") {
      const json& m = p.at("d4_moderate");
      const auto ns = as_ints(m.at("ns"), "params.d4_moderate.ns");
      const double expo = m.at("xi_exponent").get<double>();
      const double delta = m.at("delta").get<double>();
      require(delta > 0.0, "params.d4_moderate.delta: must be positive");
      for (auto n : ns) {
        require(n >= 2, "params.d4_moderate.ns: must be >= 2");
        const double xi = std::pow(static_cast<double>(n), expo);
        const json tp = {{"family", family}, {"d", 4}, {"n", n}, {"xi", xi}, {"delta", delta},
                         {"walks", moderate_walks}, {"charge_samples", sb.charge_samples}, {"distribution", dname}};
        tasks.push_back({tp, [=](Rng& rng, Emitter& emit, const json& t) {
                           const double g0 = escape_probability(4, 1e-5).gamma0;
                           const D2Estimate e = d2_moderate_strategy(n, 4, xi, g0, delta, moderate_walks, dist,
                                                                     sb.charge_samples, rng);
                           emit_neg_log(emit, "neg_log_lower", e.estimate, t,
                                        with(estimate_extra(e.estimate),
                                             {{"gamma0", g0}, {"gamma1", e.gamma1},
                                              {"qualifying_fraction", e.qualifying_fraction},
                                              {"mean_d2_fraction", e.mean_d2_fraction},
                                              {"envelope_rate", e.envelope_rate}}));
                         }});
      }
    } else if (family == "d4_folded") {
      const json& f = p.at("d4_folded");
      const StrategyConfig c = d3_config(f);
      const auto ns = as_ints(f.at("ns"), "params.d4_folded.ns");
      const double frac = f.at("x_fraction").get<double>();
      require(frac > 0.0 && frac <= 1.0, "params.d4_folded.x_fraction: must lie in (0, 1]");
      for (auto n : ns) {
        require(n >= 2, "params.d4_folded.ns: must be >= 2");
        const double x = frac * static_cast<double>(n);
        const json tp = {{"family", family}, {"d", 4}, {"n", n}, {"x", x}, {"delta0", c.delta0},
                         {"eps0", c.eps0}, {"delta", c.delta}, {"budget", budget_tuple}, {"distribution", dname}};
        tasks.push_back({tp, [=](Rng& rng, Emitter& emit, const json& t) {
                           const StrategyEstimate e = strategy_lower_bound(n, 4, x, c, sb, dist, rng);
                           emit_neg_log(emit, "neg_log_lower", e.estimate, t, strategy_extra(e));
                         }});
      }
    } else if (family == "ordering") {
      const json& o = p.at("ordering");
      const StrategyConfig c = d3_config(o);
      const std::int64_t n = as_int(o.at("n"), "params.ordering.n");
      const double lambda = o.at("lambda").get<double>();
      require(n >= 2 && n <= 64, "params.ordering.n: must lie in [2, 64]");
      require(lambda > 0.0, "params.ordering.lambda: must be positive");
      for (double x : as_doubles(o.at("xs"))) {
        require(x > 0.0, "params.ordering.xs: must be positive");
        const double y = std::pow(x / std::pow(static_cast<double>(n), 2.0 / 3.0), 0.2) *
                         std::pow(static_cast<double>(n), 1.0 / 3.0);
        const json tp = {{"family", family}, {"d", 3}, {"n", n}, {"x", x}, {"delta0", c.delta0},
                         {"eps0", c.eps0}, {"delta", c.delta}, {"lambda", lambda}, {"y", y},
                         {"budget", budget_tuple}, {"distribution", dname}};
        tasks.push_back({tp, [=](Rng& rng, Emitter& emit, const json& t) {
                           Rng r_low = rng.split(0), r_naive = rng.split(1), r_up = rng.split(2);
                           const StrategyEstimate lo = strategy_lower_bound(n, 3, x, c, sb, dist, r_low);
                           emit("p_lower", lo.estimate.p_hat, lo.estimate.std_error, t, strategy_extra(lo));
                           const TailEstimate nv = naive_tail(n, 3, dist, x, naive_samples, r_naive);
                           emit("p_naive", nv.p_hat, nv.std_error, t, estimate_extra(nv));
                           const UpperBound ub = tilted_upper_bound(n, 3, x, lambda, y, ord_upper, dist, r_up);
                           emit("p_upper", ub.bound(), ub.std_error(), t, {{"log_bound", ub.log_bound}});
                         }});
      }
    } else {
      throw ConfigError("params.families: unknown family '" + family + "'");
    }
  }
  return tasks;
}

// -- gibbs_scan --------------------------------------------------------------

std::vector<Task> plan_gibbs(const json& p, const json& b) {
  const int d = static_cast<int>(as_int(p.at("d"), "params.d"));
  const double s = p.at("s").get<double>();
  require(d >= 1 && d <= kMaxDim, "params.d: dimension out of range");
  ChainBudget cb;
  cb.chains = static_cast<int>(as_int(b.at("chains"), "budget.chains"));
  require(cb.chains >= 1, "budget.chains: must be >= 1");
  const std::int64_t exact_steps = as_int(b.at("exact_steps"), "budget.exact_steps");
  const std::int64_t part_steps = as_int(b.at("partition_steps"), "budget.partition_steps");
  const std::int64_t phase_steps = as_int(b.at("phase_steps"), "budget.phase_steps");
  const std::int64_t phase_thin = as_int(b.at("phase_thin"), "budget.phase_thin");
  require(exact_steps >= 10 && part_steps >= 10 && phase_steps >= 10 && phase_thin >= 1,
          "budget: chain lengths too small");
  std::vector<Task> tasks;

  const json& ex = p.at("exact");
  const std::int64_t en = as_int(ex.at("n"), "params.exact.n");
  const double ebeta = ex.at("beta_eff").get<double>();
  require(en >= 2 && en <= 5 && ebeta >= 0.0, "params.exact: n in [2, 5], beta_eff >= 0");
  tasks.push_back({{{"part", "exact"}, {"n", en}, {"d", d}, {"beta_eff", ebeta}, {"steps", exact_steps}},
                   [=](Rng& rng, Emitter& emit, const json& tp) {
                     const ExactGibbsLaw law = exact_gibbs_law(en, d, ebeta);
                     GibbsChain chain(en, d, ebeta, rng);
                     std::vector<double> counts(law.probs.size(), 0.0);
                     std::int64_t audit_failures = 0;
                     std::string first_failure;
                     for (std::int64_t t = 0; t < exact_steps; ++t) {
                       try {
                         chain.step();
                       } catch (const CacheAuditError& e) {
                         ++audit_failures;
                         if (first_failure.empty()) first_failure = e.what();
                       }
                       counts[chain.state_code()] += 1.0;
                     }
                     for (auto& c : counts) c /= static_cast<double>(exact_steps);
                     emit("tv", total_variation(counts, law.probs), 0.0, tp,
                          {{"exact_log_z", law.log_z}, {"exact_mean_energy", law.mean_energy}});
                     emit("audits", static_cast<double>(chain.audits()), 0.0, tp);
                     emit("audit_failures", static_cast<double>(audit_failures), 0.0, tp,
                          {{"first_failure", first_failure}});
                     emit("acceptance", chain.acceptance_rate(), 0.0, tp);
                   }});

  const json& pt = p.at("partition");
  const auto pns = as_ints(pt.at("ns"), "params.partition.ns");
  const auto pbetas = as_doubles(pt.at("betas"));
  const std::int64_t points = as_int(pt.at("grid_points"), "params.partition.grid_points");
  require(pns.size() == pbetas.size(), "params.partition: ns and betas must have equal length");
  require(points >= 2, "params.partition.grid_points: must be >= 2");
  for (std::size_t i = 0; i < pns.size(); ++i) {
    const std::int64_t n = pns[i];
    const double beta = pbetas[i];
    require(n >= 2 && beta > 0.0, "params.partition: n >= 2 and beta > 0 required");
    ChainBudget pb = cb;
    pb.steps = part_steps;
    tasks.push_back({{{"part", "partition"}, {"n", n}, {"d", d}, {"s", s}, {"beta", beta},
                      {"grid_points", points}, {"steps", part_steps}, {"chains", cb.chains}},
                     [=](Rng& rng, Emitter& emit, const json& tp) {
                       std::vector<double> grid;
                       for (std::int64_t k = 0; k < points; ++k)
                         grid.push_back(beta * static_cast<double>(k) / static_cast<double>(points - 1));
                       const GibbsConfig cfg{n, d, beta, s};
                       const LogPartitionProfile prof = log_partition(cfg, grid, pb, rng);
                       for (const auto& pt2 : prof.points) {
                         const json gp = with(tp, {{"grid_beta", pt2.beta}, {"beta_eff", pt2.beta_eff}});
                         emit("log_z", pt2.log_z, pt2.error, gp,
                              {{"upper", pt2.beta_eff * static_cast<double>(n)}});
                         emit("mean_energy", pt2.mean_energy, pt2.energy_stderr, gp,
                              {{"equilibrated", pt2.equilibrated}});
                       }
                       emit("unresolved_panels", static_cast<double>(prof.unresolved_panels), 0.0, tp,
                            {{"evaluations", prof.evaluations}});
                       if (d >= 3) emit("c_d", c_d(d, 1e-5).value, 0.0, tp);
                     }});
  }

  const json& ph = p.at("phase");
  const std::int64_t phn = as_int(ph.at("n"), "params.phase.n");
  const auto a = as_doubles(ph.at("a"));
  const auto bb = as_doubles(ph.at("b"));
  for (double av : a) require(av > 1.0, "params.phase.a: must exceed 1");
  for (double bv : bb) require(bv > 0.0, "params.phase.b: must be positive");
  require(phn >= 2, "params.phase.n: must be >= 2");
  for (double beta : as_doubles(ph.at("betas"))) {
    require(beta >= 0.0, "params.phase.betas: must be >= 0");
    ChainBudget pb = cb;
    pb.steps = phase_steps;
    pb.thin = phase_thin;
    tasks.push_back({{{"part", "phase"}, {"n", phn}, {"d", d}, {"s", s}, {"beta", beta}, {"steps", phase_steps},
                      {"thin", phase_thin}, {"chains", cb.chains}},
                     [=](Rng& rng, Emitter& emit, const json& tp) {
                       const PhaseObservables o = phase_cell(phn, beta, s, a, bb, pb, d, rng);
                       for (std::size_t i = 0; i < a.size(); ++i)
                         emit("mid_level_frequency", o.mid_level_frequency[i], 0.0, with(tp, {{"a", a[i]}}));
                       for (std::size_t i = 0; i < bb.size(); ++i)
                         emit("max_local_frequency", o.max_local_frequency[i], 0.0, with(tp, {{"b", bb[i]}}));
                       emit("mean_max_local_time", o.mean_max_local_time, 0.0, tp);
                       emit("mean_energy", o.mean_energy, 0.0, tp, {{"beta_eff", o.beta_eff}});
                       emit("acceptance", o.acceptance, 0.0, tp, {{"samples", o.samples}});
                     }});
  }
  return tasks;
}

// -- conjecture_probe --------------------------------------------------------

std::vector<Task> plan_probe(const json& p, const json& b) {
  const int d = static_cast<int>(as_int(p.at("d"), "params.d"));
  const std::int64_t n = as_int(p.at("n"), "params.n");
  const auto ys = as_doubles(p.at("ys"));
  const std::int64_t samples = as_int(b.at("samples"), "budget.samples");
  const json& ng = p.at("nagaev");
  const std::int64_t nn = as_int(ng.at("n"), "params.nagaev.n");
  const auto mult = as_doubles(ng.at("t_multiples"));
  const double c_y = ng.at("c_y").get<double>();
  const std::int64_t nsamples = as_int(b.at("nagaev_samples"), "budget.nagaev_samples");
  require(d >= 1 && d <= kMaxDim && n >= 1 && nn >= 1, "params: bad n or d");
  require(samples >= 1 && nsamples >= 1, "budget: sample counts must be positive");
  for (double y : ys)
    require(y >= 1.0 && std::pow(y, 1.0 + d / 2.0) <= static_cast<double>(n),
            "params.ys: need 1 <= y and y^(1+d/2) <= n");
  for (double m : mult) require(m > 0.0, "params.nagaev.t_multiples: must be positive");
  std::vector<Task> tasks;
  tasks.push_back({{{"part", "probe"}, {"n", n}, {"d", d}, {"samples", samples}},
                   [=](Rng& rng, Emitter& emit, const json& tp) {
                     const auto est = conjecture_probe(n, d, ys, samples, rng);
                     for (std::size_t i = 0; i < ys.size(); ++i)
                       emit("probe_p", est[i].p_hat, est[i].std_error, with(tp, {{"y", ys[i]}}),
                            with(estimate_extra(est[i]), {{"y_pow_half_d", std::pow(ys[i], d / 2.0)}}));
                   }});
  tasks.push_back({{{"part", "nagaev"}, {"n", nn}, {"c_y", c_y}, {"samples", nsamples}},
                   [=](Rng& rng, Emitter& emit, const json& tp) {
                     // Sums of nn Rademacher signs, 64 at a time.
                     std::vector<std::int64_t> sums(static_cast<std::size_t>(nsamples));
                     for (auto& sum : sums) {
                       std::int64_t ones = 0, left = nn;
                       while (left >= 64) {
                         ones += std::popcount(rng.next_u64());
                         left -= 64;
                       }
                       if (left > 0) ones += std::popcount(rng.next_u64() & ((std::uint64_t{1} << left) - 1));
                       sum = 2 * ones - nn;
                     }
                     const auto tail_fn = [](double t) { return t <= 1.0 ? 0.5 : 0.0; };
                     for (double m : mult) {
                       const double t = m * std::sqrt(static_cast<double>(nn));
                       std::int64_t hits = 0;
                       for (auto sum : sums) hits += static_cast<double>(sum) >= t;
                       const TailEstimate emp = TailEstimate::from_hits(hits, nsamples, "partial_sum");
                       const json tt = with(tp, {{"t", t}});
                       emit("empirical_tail", emp.p_hat, emp.std_error, tt, estimate_extra(emp));
                       emit("envelope", nagaev_envelope(nn, t, c_y, tail_fn), 0.0, tt);
                     }
                   }});
  return tasks;
}

std::vector<Task> plan(const ExperimentConfig& cfg) {
  const json& p = cfg.params;
  const json& b = cfg.budget;
  try {
    if (cfg.experiment == "identity_suite") return plan_identity(p, b);
    if (cfg.experiment == "oracle_compare") return plan_oracle(p, b);
    if (cfg.experiment == "green") return plan_green(p, b);
    if (cfg.experiment == "level_sets") return plan_level_sets(p, b);
    if (cfg.experiment == "tails_scan") return plan_tails(p, b);
    if (cfg.experiment == "gibbs_scan") return plan_gibbs(p, b);
    if (cfg.experiment == "conjecture_probe") return plan_probe(p, b);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("params: ") + e.what());
  }
  throw ConfigError("experiment: unknown kind '" + cfg.experiment + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::defaults(const std::string& kind) {
  ExperimentConfig c;
  c.experiment = kind;
  c.params = default_params(kind);
  c.budget = default_budget(kind);
  return c;
}

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": top level must be an object");
  static const std::vector<std::string> keys = {"experiment", "params", "budget", "seed", "workers", "output"};
  for (const auto& [key, value] : j.items())
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError(source + ": unknown key '" + key + "'");
  if (!j.contains("experiment") || !j.at("experiment").is_string())
    throw ConfigError(source + ": 'experiment' must be a string naming the kind");
  const std::string kind = j.at("experiment").get<std::string>();
  const auto& kinds = experiment_kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw ConfigError(source + ": experiment: unknown kind '" + kind + "'");
  ExperimentConfig c = defaults(kind);
  if (j.contains("params")) {
    validate_against(j.at("params"), c.params, source + ": params");
    c.params.merge_patch(j.at("params"));
  }
  if (j.contains("budget")) {
    validate_against(j.at("budget"), c.budget, source + ": budget");
    for (const auto& [key, value] : j.at("budget").items())
      if (!(value.get<double>() > 0.0)) throw ConfigError(source + ": budget." + key + ": must be positive");
    c.budget.merge_patch(j.at("budget"));
  }
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ConfigError(source + ": seed: expected a non-negative integer");
    c.seed = s.get<std::uint64_t>();
  }
  if (j.contains("workers")) {
    const json& w = j.at("workers");
    if (!w.is_number_integer() || w.get<std::int64_t>() < 1 || w.get<std::int64_t>() > 1024)
      throw ConfigError(source + ": workers: expected an integer in [1, 1024]");
    c.workers = w.get<int>();
  }
  if (j.contains("output")) {
    if (!j.at("output").is_string() || j.at("output").get<std::string>().empty())
      throw ConfigError(source + ": output: expected a nonempty string");
    c.output = j.at("output").get<std::string>();
  }
  try {
    plan(c);
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

json ExperimentConfig::to_json() const {
  return {{"experiment", experiment}, {"params", params}, {"budget", budget},
          {"seed", seed},             {"workers", workers}, {"output", output}};
}

json ResultRecord::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"experiment", experiment}, {"task", task},          {"seed", seed},
          {"params", params},         {"metric", metric},      {"value", num(value)},
          {"stderr", num(std_error)}, {"extra", extra},        {"wall_ms", wall_ms}};
}

ResultRecord ResultRecord::from_json(const json& j) {
  auto num = [](const json& v) {
    return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  };
  ResultRecord r;
  r.experiment = j.at("experiment").get<std::string>();
  r.task = j.at("task").get<std::int64_t>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.params = j.at("params");
  r.metric = j.at("metric").get<std::string>();
  r.value = num(j.at("value"));
  r.std_error = num(j.at("stderr"));
  r.extra = j.value("extra", json::object());
  r.wall_ms = j.value("wall_ms", 0.0);
  return r;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  const std::vector<Task> tasks = plan(cfg);
  std::vector<std::vector<ResultRecord>> per_task(tasks.size());
  std::vector<std::string> errors(tasks.size());
  parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
    const auto start = std::chrono::steady_clock::now();
    Rng rng = Rng::for_task(cfg.seed, i);
    Emitter emit(per_task[i]);
    try {
      tasks[i].body(rng, emit, tasks[i].params);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      emit("task_failed", 1.0, 0.0, tasks[i].params, {{"error", errors[i]}});
    }
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    for (auto& r : per_task[i]) {
      r.experiment = cfg.experiment;
      r.task = static_cast<std::int64_t>(i);
      r.seed = cfg.seed;
      r.wall_ms = ms;
    }
  });
  RunResult out;
  out.tasks = tasks.size();
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (auto& r : per_task[i]) out.records.push_back(std::move(r));
    if (!errors[i].empty()) out.failures.push_back("task " + std::to_string(i) + ": " + errors[i]);
  }
  return out;
}

void write_run(const ExperimentConfig& cfg, const RunResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "records.jsonl");
    if (!out) throw std::runtime_error("cannot write " + dir + "/records.jsonl");
    for (const auto& r : result.records) out << r.to_json().dump() << "\n";
  }
  std::ofstream sum(fs::path(dir) / "summary.txt");
  if (!sum) throw std::runtime_error("cannot write " + dir + "/summary.txt");
  sum << "experiment: " << cfg.experiment << "\n"
      << "seed: " << cfg.seed << "\n"
      << "workers: " << cfg.workers << "\n"
      << "tasks: " << result.tasks << "\n"
      << "failed tasks: " << result.failures.size() << "\n";
  for (const auto& f : result.failures) sum << "  " << f << "\n";
  sum << "\n";
  std::map<std::string, std::pair<std::size_t, double>> per_metric;
  for (const auto& r : result.records) {
    auto& [count, total] = per_metric[r.metric];
    ++count;
    if (std::isfinite(r.value)) total += r.value;
  }
  sum << "metric                              records  mean\n";
  for (const auto& [metric, ct] : per_metric) {
    char line[160];
    std::snprintf(line, sizeof line, "%-36s%7zu  %.6g\n", metric.c_str(), ct.first,
                  ct.second / static_cast<double>(ct.first));
    sum << line;
  }
  const auto criteria = criteria_for_kind(cfg.experiment);
  if (!criteria.empty()) {
    sum << "\nverdicts\n";
    json verdicts = json::array();
    for (const auto& c : criteria) {
      const Verdict v = summarize(c, result.records);
      verdicts.push_back(v.to_json());
      sum << "  " << c << ": " << v.status << "\n";
      for (const auto& l : v.lines) sum << "    " << l << "\n";
    }
    std::ofstream vout(fs::path(dir) / "verdicts.json");
    vout << verdicts.dump(2) << "\n";
  }
}

std::vector<ResultRecord> read_records(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<ResultRecord> out;
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return out;
  if (fs::exists(fs::path(dir) / "records.jsonl")) files.push_back(fs::path(dir) / "records.jsonl");
  std::vector<fs::path> subs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && fs::exists(entry.path() / "records.jsonl")) subs.push_back(entry.path() / "records.jsonl");
  std::sort(subs.begin(), subs.end());
  files.insert(files.end(), subs.begin(), subs.end());
  for (const auto& f : files) {
    std::ifstream in(f);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      try {
        out.push_back(ResultRecord::from_json(json::parse(line)));
      } catch (const std::exception& e) {
        throw std::runtime_error(f.string() + ":" + std::to_string(lineno) + ": bad record: " + e.what());
      }
    }
  }
  return out;
}

}  // namespace polymer
