// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

#include "polymer/experiment.hpp"
#include "polymer/tails.hpp"

namespace polymer {

using nlohmann::json;

namespace {

struct CriterionInfo {
  const char* name;
  const char* kind;
};

const CriterionInfo kCriteria[] = {
    {"identity", "identity_suite"},
    {"oracle", "oracle_compare"},
    {"green", "green"},
    {"level_sets", "level_sets"},
    {"l2_stability", "level_sets"},
    {"variance", "identity_suite"},
    {"exponents_d3", "tails_scan"},
    {"regimes_d4", "tails_scan"},
    {"sampler", "gibbs_scan"},
    {"gibbs", "gibbs_scan"},
    {"ordering", "tails_scan"},
    {"diagnostics", "conjecture_probe"},
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string num(double v) { return fmt("%.6g", v); }

class View {
 public:
  View(const std::vector<ResultRecord>& all, const std::string& kind) {
    for (const auto& r : all)
      if (r.experiment == kind) records_.push_back(&r);
  }
  bool empty() const { return records_.empty(); }

  std::vector<const ResultRecord*> metric(const std::string& m) const {
    std::vector<const ResultRecord*> out;
    for (const auto* r : records_)
      if (r->metric == m) out.push_back(r);
    return out;
  }
  template <class Pred>
  std::vector<const ResultRecord*> metric(const std::string& m, Pred pred) const {
    std::vector<const ResultRecord*> out;
    for (const auto* r : records_)
      if (r->metric == m && pred(r->params)) out.push_back(r);
    return out;
  }
  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto* r : records_)
      if (r->metric == "task_failed")
        out.push_back("task " + std::to_string(r->task) + " failed: " + r->extra.value("error", std::string("?")));
    return out;
  }
  /// Sum of task wall times over tasks that emitted a record matching pred.
  template <class Pred>
  double wall_seconds(Pred pred) const {
    std::map<std::int64_t, double> per_task;
    for (const auto* r : records_)
      if (pred(*r)) per_task[r->task] = r->wall_ms;
    double total = 0.0;
    for (const auto& [t, ms] : per_task) total += ms;
    return total / 1000.0;
  }

 private:
  std::vector<const ResultRecord*> records_;
};

class Builder {
 public:
  explicit Builder(std::string criterion) { v_.criterion = std::move(criterion); }
  void check(bool ok, const std::string& line) {
    v_.lines.push_back(std::string(ok ? "ok   " : "FAIL ") + line);
    all_ok_ = all_ok_ && ok;
  }
  void note(const std::string& line) { v_.lines.push_back("     " + line); }
  void missing(const std::string& what) {
    v_.lines.push_back("missing: " + what);
    missing_ = true;
  }
  void metric(const std::string& key, json value) { v_.metrics[key] = std::move(value); }
  void failures(const View& view) {
    for (const auto& f : view.failures()) check(false, f);
  }
  Verdict finish() {
    v_.status = missing_ ? "missing" : (all_ok_ ? "pass" : "fail");
    return v_;
  }

 private:
  Verdict v_;
  bool all_ok_ = true;
  bool missing_ = false;
};

double total_value(const std::vector<const ResultRecord*>& rs) {
  double s = 0.0;
  for (const auto* r : rs) s += r->value;
  return s;
}

template <class T>
auto param_is(const std::string& key, T value) {
  return [key, value](const json& p) { return p.contains(key) && p.at(key) == json(value); };
}

/// Slope check of a log-log fit; reports the fit even when it cannot be formed.
void slope_check(Builder& b, const std::string& label, const std::vector<std::pair<double, double>>& pts,
                 double target, double tol) {
  std::vector<std::pair<double, double>> finite;
  for (const auto& p : pts)
    if (std::isfinite(p.second) && p.second > 0.0) finite.push_back(p);
  if (finite.size() < pts.size())
    b.note(label + ": " + std::to_string(pts.size() - finite.size()) + " of " + std::to_string(pts.size()) +
           " points without a finite positive value");
  try {
    const ExponentFit fit = exponent_fit(finite, FitScale::log_log);
    b.metric(label, {{"slope", fit.slope}, {"half_width", fit.half_width}, {"points", finite.size()},
                     {"target", target}, {"tolerance", tol}});
    b.check(std::abs(fit.slope - target) <= tol,
            label + " slope " + num(fit.slope) + " +- " + num(fit.half_width) + " (95% CI), target " +
                num(target) + " +- " + num(tol) + ", " + std::to_string(finite.size()) + " points");
  } catch (const std::exception& e) {
    b.metric(label, {{"points", finite.size()}, {"target", target}, {"error", e.what()}});
    b.check(false, label + ": fit not available (" + std::string(e.what()) + ")");
  }
}

// ---------------------------------------------------------------------------

Verdict identity(const View& v) {
  Builder b("identity");
  const auto inst = v.metric("instances");
  if (inst.empty()) {
    b.missing("identity_suite instances records");
    return b.finish();
  }
  b.failures(v);
  const double n = total_value(inst);
  b.note("instances checked: " + num(n));
  b.metric("instances", n);
  for (const char* m : {"violations_energy_methods", "violations_decomposition", "violations_y_zero",
                        "violations_lower_bound"}) {
    const double c = total_value(v.metric(m));
    b.metric(m, c);
    b.check(c == 0.0, std::string(m) + " = " + num(c));
  }
  double max_rel = 0.0;
  for (const auto* r : v.metric("max_rel_err_gaussian")) max_rel = std::max(max_rel, r->value);
  b.metric("max_rel_err_gaussian", max_rel);
  b.note("largest Gaussian relative error between energy methods: " + num(max_rel));
  const double secs = v.wall_seconds([](const ResultRecord& r) { return r.metric == "instances"; });
  b.metric("runtime_s", secs);
  b.check(secs < 120.0, "runtime " + num(secs) + " s < 120 s");
  return b.finish();
}

Verdict variance(const View& v) {
  Builder b("variance");
  const auto errs = v.metric("variance_abs_error");
  if (errs.empty()) {
    b.missing("identity_suite variance_abs_error records");
    return b.finish();
  }
  double worst = 0.0;
  std::int64_t l_max = 0;
  for (const auto* r : errs) {
    const double formula = r->extra.value("formula", 1.0);
    worst = std::max(worst, r->value / std::max(1.0, std::abs(formula)));
    l_max = std::max<std::int64_t>(l_max, r->params.value("l", 0));
  }
  b.metric("max_rel_error", worst);
  b.metric("l_max", l_max);
  b.check(worst <= 1e-12, "exhaustive vs formula, l = 1.." + std::to_string(l_max) +
                              ": max relative error " + num(worst));
  const auto sandwich = v.metric("sandwich_ok");
  const double bad = static_cast<double>(sandwich.size()) - total_value(sandwich);
  b.check(bad == 0.0 && !sandwich.empty(), "sandwich bounds violated for " + num(bad) + " of " +
                                               std::to_string(sandwich.size()) + " levels");
  return b.finish();
}

Verdict oracle(const View& v) {
  Builder b("oracle");
  const auto tv = v.metric("tv");
  if (tv.empty()) {
    b.missing("oracle_compare tv records");
    return b.finish();
  }
  b.failures(v);
  for (const auto* r : tv) {
    const auto n = r->params.value("n", 0);
    const auto viol = v.metric("tail_violations", param_is("n", n));
    const auto z = v.metric("max_tail_z", param_is("n", n));
    const auto nz = v.metric("naive_tail_z", param_is("n", n));
    const std::string tag = "n = " + std::to_string(n);
    b.metric(tag, {{"tv", r->value}, {"max_tail_z", z.empty() ? 0.0 : z.front()->value}});
    b.check(r->value < 0.005, tag + ": TV " + num(r->value) + " < 0.005");
    if (viol.empty()) {
      b.missing(tag + " tail_violations");
      continue;
    }
    b.check(viol.front()->value == 0.0, tag + ": CDF points beyond 3 stderr: " + num(viol.front()->value) +
                                            " (max z " + num(z.empty() ? 0.0 : z.front()->value) + ")");
    if (!nz.empty())
      b.check(nz.front()->value <= 3.0, tag + ": naive tail estimator vs exact, z = " + num(nz.front()->value));
  }
  const double secs = v.wall_seconds([](const ResultRecord&) { return true; });
  b.metric("runtime_s", secs);
  b.check(secs < 300.0, "runtime " + num(secs) + " s < 300 s");
  return b.finish();
}

Verdict green(const View& v) {
  Builder b("green");
  const auto gammas = v.metric("gamma0");
  if (gammas.empty()) {
    b.missing("green gamma0 records");
    return b.finish();
  }
  b.failures(v);
  for (const auto* g : gammas) {
    const int d = g->params.value("d", 0);
    const std::string tag = "d = " + std::to_string(d);
    const double g0 = g->value;
    const auto cd = v.metric("c_d", param_is("d", d));
    if (!cd.empty()) b.note(tag + ": c_d = " + num(cd.front()->value) + " +- " + num(cd.front()->std_error) +
                            ", gamma0 = " + num(g0));
    const auto qc = v.metric("quad_conv_max_rel", param_is("d", d));
    const auto mc = v.metric("mc_returns", param_is("d", d));
    const auto nr = v.metric("gamma0_from_never_return", param_is("d", d));
    const auto rg = v.metric("range_fraction", param_is("d", d));
    if (qc.empty() || mc.empty() || nr.empty() || rg.empty()) {
      b.missing(tag + ": terms, mc_returns, never_return or range records");
      continue;
    }
    b.check(qc.front()->value < 1e-6, tag + ": quadrature vs convolution, max relative error per term " +
                                          num(qc.front()->value) + " < 1e-6");
    const double exact = mc.front()->extra.value("exact_partial_sum", std::nan(""));
    const double mc_rel = std::abs(mc.front()->value - exact) / exact;
    b.check(mc_rel < 0.01, tag + ": returns by MC " + num(mc.front()->value) + " vs series " + num(exact) +
                               ", relative difference " + num(mc_rel) + " < 1%");
    const double nr_rel = std::abs(nr.front()->value - g0) / g0;
    b.check(nr_rel < 0.02, tag + ": never-return estimate " + num(nr.front()->value) +
                               " vs gamma0, relative difference " + num(nr_rel) + " < 2%");
    const double rg_rel = std::abs(rg.front()->value - g0) / g0;
    b.check(rg_rel < 0.02, tag + ": range law |R_n|/n = " + num(rg.front()->value) +
                               " vs gamma0, relative difference " + num(rg_rel) + " < 2%");
    b.metric(tag, {{"gamma0", g0}, {"quad_conv", qc.front()->value}, {"mc_rel", mc_rel},
                   {"never_return_rel", nr_rel}, {"range_rel", rg_rel}});
  }
  return b.finish();
}

Verdict level_sets(const View& v) {
  Builder b("level_sets");
  const auto g = v.metric("gamma0");
  const auto fr = v.metric("level_fraction");
  if (g.empty() || fr.empty()) {
    b.missing("level_sets gamma0 or level_fraction records");
    return b.finish();
  }
  b.failures(v);
  const double g0 = g.front()->value;
  std::map<std::int64_t, std::vector<double>> by_k;
  for (const auto* r : fr) by_k[r->params.value("k", std::int64_t{0})].push_back(r->value);
  for (const auto& [k, vals] : by_k) {
    double m = 0.0;
    for (double x : vals) m += x;
    m /= static_cast<double>(vals.size());
    const double target = g0 * g0 * std::pow(1.0 - g0, static_cast<double>(k - 1));
    const double rel = std::abs(m - target) / target;
    b.metric("k=" + std::to_string(k), {{"mean", m}, {"target", target}, {"rel", rel}, {"walks", vals.size()}});
    b.check(rel < 0.05, "k = " + std::to_string(k) + ": mean |D_n(k)|/n = " + num(m) + " vs " + num(target) +
                            ", relative difference " + num(rel) + " < 5% (" + std::to_string(vals.size()) +
                            " walks)");
  }
  const double secs = v.wall_seconds([](const ResultRecord& r) { return r.metric == "level_fraction"; });
  b.metric("runtime_s", secs);
  b.check(secs < 600.0, "runtime " + num(secs) + " s < 600 s");
  return b.finish();
}

Verdict l2_stability(const View& v) {
  Builder b("l2_stability");
  const auto rs = v.metric("l2_sq_over_n");
  std::map<std::int64_t, std::vector<double>> by_n;
  for (const auto* r : rs) by_n[r->params.value("n", std::int64_t{0})].push_back(r->value);
  if (by_n.size() < 2) {
    b.missing("l2_sq_over_n records at two walk lengths");
    return b.finish();
  }
  b.failures(v);
  std::vector<double> means;
  for (const auto& [n, vals] : by_n) {
    double m = 0.0;
    for (double x : vals) m += x;
    m /= static_cast<double>(vals.size());
    means.push_back(m);
    b.note("n = " + std::to_string(n) + ": mean |l_n|_2^2 / n = " + num(m) + " (" +
           std::to_string(vals.size()) + " walks)");
  }
  const double rel = std::abs(means.back() - means.front()) / means.back();
  b.metric("relative_difference", rel);
  b.check(rel < 0.05, "relative difference between smallest and largest n: " + num(rel) + " < 5%");
  return b.finish();
}

Verdict exponents_d3(const View& v) {
  Builder b("exponents_d3");
  const auto xi_lo = v.metric("neg_log_lower", param_is("family", "d3_xi"));
  const auto n_lo = v.metric("neg_log_lower", param_is("family", "d3_n"));
  const auto up = v.metric("neg_log_upper", param_is("family", "d3_upper"));
  if (xi_lo.empty() && n_lo.empty() && up.empty()) {
    b.missing("tails_scan d3 records");
    return b.finish();
  }
  if (xi_lo.empty()) b.missing("d3_xi lower-bound records");
  if (n_lo.empty()) b.missing("d3_n lower-bound records");
  if (up.empty()) b.missing("d3_upper records");
  for (const auto& f : v.failures()) b.note(f);
  auto pts = [](const std::vector<const ResultRecord*>& rs, const char* key) {
    std::vector<std::pair<double, double>> out;
    for (const auto* r : rs) out.emplace_back(r->params.at(key).get<double>(), r->value);
    return out;
  };
  auto scan = [](const std::vector<const ResultRecord*>& rs, const char* s) {
    std::vector<const ResultRecord*> out;
    for (const auto* r : rs)
      if (r->params.value("scan", std::string()) == s) out.push_back(r);
    return out;
  };
  // Lower-bound families also count failed tasks as points without a value.
  auto with_failed = [&](std::vector<std::pair<double, double>> p, const char* family, const char* key) {
    for (const auto* r : v.metric("task_failed", param_is("family", family)))
      p.emplace_back(r->params.at(key).get<double>(), std::nan(""));
    return p;
  };
  for (const auto* r : xi_lo)
    b.note("lower, n = " + num(r->params.value("n", 0.0)) + ", xi = " + num(r->params.value("xi", 0.0)) +
           ": -log p = " + (std::isfinite(r->value) ? num(r->value) : "n/a") + " [" +
           r->extra.value("status", std::string("?")) + "]");
  slope_check(b, "lower xi-scan", with_failed(pts(xi_lo, "xi"), "d3_xi", "xi"), 0.8, 0.15);
  slope_check(b, "lower n-scan", with_failed(pts(n_lo, "n"), "d3_n", "n"), 1.0 / 3.0, 0.1);
  const auto up_xi = scan(up, "xi");
  const auto up_n = scan(up, "n");
  slope_check(b, "upper xi-scan", pts(up_xi, "xi"), 0.8, 0.15);
  slope_check(b, "upper n-scan", pts(up_n, "n"), 1.0 / 3.0, 0.1);
  std::int64_t bracket_bad = 0, bracket_total = 0;
  for (const auto* u : up) {
    const auto& lows = u->params.value("scan", std::string()) == "xi" ? xi_lo : n_lo;
    for (const auto* l : lows)
      if (l->params.at("n") == u->params.at("n") && l->params.at("xi") == u->params.at("xi") &&
          std::isfinite(l->value)) {
        ++bracket_total;
        bracket_bad += u->value > l->value;
      }
  }
  b.check(bracket_bad == 0, "upper bound below lower bound on " + std::to_string(bracket_bad) + " of " +
                                std::to_string(bracket_total) + " common grid points (-log UB <= -log p_lower)");
  const double secs = v.wall_seconds([](const ResultRecord& r) {
    const std::string f = r.params.value("family", std::string());
    return f == "d3_xi" || f == "d3_n" || f == "d3_upper";
  });
  b.metric("runtime_s", secs);
  b.check(secs < 1800.0, "runtime " + num(secs) + " s < 1800 s");
  return b.finish();
}

Verdict regimes_d4(const View& v) {
  Builder b("regimes_d4");
  const auto mod = v.metric("neg_log_lower", param_is("family", "d4_moderate"));
  const auto fold = v.metric("neg_log_lower", param_is("family", "d4_folded"));
  if (mod.empty() && fold.empty()) {
    b.missing("tails_scan d4 records");
    return b.finish();
  }
  if (mod.empty()) b.missing("d4_moderate records");
  if (fold.empty()) b.missing("d4_folded records");
  std::vector<std::pair<double, double>> pm, pf;
  for (const auto* r : mod) pm.emplace_back(r->params.at("xi").get<double>(), r->value);
  for (const auto* r : fold) {
    pf.emplace_back(r->params.at("x").get<double>(), r->value);
    b.note("folded, n = " + num(r->params.value("n", 0.0)) + ": ball volume " +
           num(r->extra.value("volume", 0.0)) + ", -log p = " + num(r->value));
  }
  for (const char* fam : {"d4_moderate", "d4_folded"})
    for (const auto* r : v.metric("task_failed", param_is("family", fam)))
      b.check(false, std::string(fam) + " task " + std::to_string(r->task) + " failed");
  slope_check(b, "moderate: -log p vs xi_n", pm, 2.0, 0.2);
  slope_check(b, "folded: -log p vs x_n", pf, 2.0 / 3.0, 0.15);
  return b.finish();
}

Verdict ordering(const View& v) {
  Builder b("ordering");
  const auto lo = v.metric("p_lower");
  const auto nv = v.metric("p_naive");
  const auto up = v.metric("p_upper");
  if (lo.empty() && nv.empty() && up.empty() && v.metric("task_failed", param_is("family", "ordering")).empty()) {
    b.missing("tails_scan ordering records");
    return b.finish();
  }
  for (const auto* r : v.metric("task_failed", param_is("family", "ordering")))
    b.check(false, "ordering task " + std::to_string(r->task) + " failed: " + r->extra.value("error", std::string()));
  std::map<std::int64_t, std::map<std::string, const ResultRecord*>> cells;
  for (const auto* r : lo) cells[r->task]["lower"] = r;
  for (const auto* r : nv) cells[r->task]["naive"] = r;
  for (const auto* r : up) cells[r->task]["upper"] = r;
  for (const auto& [task, c] : cells) {
    if (c.size() < 3) {
      b.missing("task " + std::to_string(task) + ": not all three estimators present");
      continue;
    }
    const auto* l = c.at("lower");
    const auto* n = c.at("naive");
    const auto* u = c.at("upper");
    const std::string tag = "x = " + num(l->params.value("x", 0.0));
    const bool zero = n->extra.value("status", std::string()) == "zero_hits";
    const double cp = n->extra.value("upper_95", 1.0);
    if (zero) {
      b.check(cp > 0.0 && cp < 1.0, tag + ": naive has zero hits, Clopper-Pearson upper " + num(cp));
      b.check(l->value <= cp, tag + ": lower " + num(l->value) + " <= naive CP upper " + num(cp));
      b.note(tag + ": upper " + num(u->value) + ", naive interval [0, " + num(cp) + "]");
    } else {
      const double s1 = 3.0 * std::hypot(l->std_error, n->std_error);
      const double s2 = 3.0 * std::hypot(n->std_error, u->std_error);
      b.check(l->value <= n->value + s1,
              tag + ": lower " + num(l->value) + " <= naive " + num(n->value) + " + " + num(s1));
      b.check(n->value <= u->value + s2,
              tag + ": naive " + num(n->value) + " <= upper " + num(u->value) + " + " + num(s2));
    }
    b.metric(tag, {{"lower", l->value}, {"naive", n->value}, {"naive_upper_95", cp}, {"upper", u->value}});
  }
  return b.finish();
}

Verdict sampler(const View& v) {
  Builder b("sampler");
  const auto tv = v.metric("tv", param_is("part", "exact"));
  if (tv.empty()) {
    b.missing("gibbs_scan exact-law tv record");
    return b.finish();
  }
  const auto audits = v.metric("audits", param_is("part", "exact"));
  const auto bad = v.metric("audit_failures", param_is("part", "exact"));
  const auto acc = v.metric("acceptance", param_is("part", "exact"));
  b.metric("tv", tv.front()->value);
  b.check(tv.front()->value < 0.01, "TV between chain and exact law " + num(tv.front()->value) + " < 0.01 after " +
                                        num(tv.front()->params.value("steps", 0.0)) + " steps");
  const double a = audits.empty() ? 0.0 : audits.front()->value;
  const double f = bad.empty() ? 1.0 : bad.front()->value;
  b.check(a > 0.0 && f == 0.0, "cache audits: " + num(a) + " run, " + num(f) + " mismatches");
  if (!acc.empty()) b.check(acc.front()->value > 0.0, "acceptance rate " + num(acc.front()->value));
  return b.finish();
}

Verdict gibbs(const View& v) {
  Builder b("gibbs");
  const auto lz = v.metric("log_z");
  const auto mid = v.metric("mid_level_frequency");
  if (lz.empty() && mid.empty()) {
    b.missing("gibbs_scan partition and phase records");
    return b.finish();
  }
  for (const auto& f : v.failures())
    if (f.find("task") == 0) b.check(false, f);
  std::int64_t out_of_range = 0;
  for (const auto* r : lz) {
    const double upper = r->extra.value("upper", 0.0);
    const double slack = 3.0 * r->std_error;
    out_of_range += !(r->value >= -slack && r->value <= upper + slack);
  }
  b.check(out_of_range == 0 && !lz.empty(), "0 <= log Z <= beta_eff n (within 3 stderr) on " +
                                                std::to_string(lz.size() - static_cast<std::size_t>(out_of_range)) +
                                                " of " + std::to_string(lz.size()) + " grid points");
  // Free-energy scaling at beta = 0.2.
  std::vector<std::pair<double, double>> ratios;
  for (const auto* r : lz) {
    const double beta = r->params.value("beta", 0.0);
    if (std::abs(beta - 0.2) > 1e-12 || std::abs(r->params.value("grid_beta", 0.0) - beta) > 1e-12) continue;
    const auto n = r->params.value("n", std::int64_t{0});
    const auto cd = v.metric("c_d", [&](const json& p) {
      return p.value("n", std::int64_t{0}) == n && std::abs(p.value("beta", 0.0) - beta) < 1e-12;
    });
    if (cd.empty()) continue;
    const double target = cd.front()->value * beta * beta / 2.0;
    const double scaled = std::pow(static_cast<double>(n), -0.2) * r->value;
    ratios.emplace_back(static_cast<double>(n), scaled / target);
    b.note("n = " + std::to_string(n) + ", beta = " + num(beta) + ": n^{-1/5} log Z = " + num(scaled) +
           ", c_d beta^2/2 = " + num(target) + ", ratio " + num(scaled / target));
  }
  std::sort(ratios.begin(), ratios.end());
  if (ratios.size() < 2) {
    b.missing("log Z at beta = 0.2 for two values of n");
  } else {
    bool within = true;
    for (const auto& [n, ratio] : ratios) within = within && std::abs(ratio - 1.0) <= 0.5;
    const bool trend = std::abs(ratios.back().second - 1.0) < std::abs(ratios.front().second - 1.0);
    b.metric("ratios", ratios);
    b.check(within, "scaled log Z within 50% of c_d beta^2 / 2 at every n");
    b.check(trend, "ratio moves toward 1 as n grows (" + num(ratios.front().second) + " -> " +
                       num(ratios.back().second) + ")");
  }
  // Phase observables.
  const auto hot = v.metric("mid_level_frequency", [](const json& p) { return p.value("beta", 0.0) >= 8.0 - 1e-12; });
  if (hot.empty()) {
    b.missing("mid-level frequencies at beta = 8");
  } else {
    double best = 0.0;
    for (const auto* r : hot) {
      best = std::max(best, r->value);
      b.note("beta = 8, a = " + num(r->params.value("a", 0.0)) + ": mid-level frequency " + num(r->value));
    }
    b.check(best >= 0.9, "beta = 8: mid-level event frequency " + num(best) + " >= 0.9 for some a");
  }
  const auto cold = v.metric("max_local_frequency", [](const json& p) {
    return std::abs(p.value("beta", 0.0) - 0.2) < 1e-12 && std::abs(p.value("b", 0.0) - 8.0) < 1e-12;
  });
  if (cold.empty()) {
    b.missing("max-local-time frequency at beta = 0.2, b = 8");
  } else {
    b.check(cold.front()->value <= 0.1,
            "beta = 0.2, b = 8: max-local-time event frequency " + num(cold.front()->value) + " <= 0.1");
  }
  const double secs = v.wall_seconds([](const ResultRecord& r) {
    const std::string part = r.params.value("part", std::string());
    return part == "partition" || part == "phase";
  });
  b.metric("runtime_s", secs);
  b.check(secs < 2700.0, "runtime " + num(secs) + " s < 2700 s");
  return b.finish();
}

Verdict diagnostics(const View& v) {
  Builder b("diagnostics");
  const auto probe = v.metric("probe_p");
  const auto tail = v.metric("empirical_tail");
  const auto env = v.metric("envelope");
  if (probe.empty() && tail.empty()) {
    b.missing("conjecture_probe records");
    return b.finish();
  }
  if (probe.empty()) b.missing("probe_p records");
  if (tail.empty() || env.empty()) b.missing("nagaev records");
  for (const auto& f : v.failures()) b.check(false, f);
  bool monotone = true;
  for (std::size_t i = 0; i < probe.size(); ++i) {
    b.note("y = " + num(probe[i]->params.value("y", 0.0)) + ": P = " + num(probe[i]->value) + " (CP upper " +
           num(probe[i]->extra.value("upper_95", 1.0)) + ")");
    if (i > 0) monotone = monotone && probe[i]->value <= probe[i - 1]->value;
  }
  b.note(std::string("probe trend in y: ") + (monotone ? "non-increasing" : "not monotone"));
  for (std::size_t i = 0; i < tail.size() && i < env.size(); ++i)
    b.note("t = " + num(tail[i]->params.value("t", 0.0)) + ": empirical tail " + num(tail[i]->value) +
           ", envelope " + num(env[i]->value));
  b.metric("probe_monotone", monotone);
  return b.finish();
}

}  // namespace

json Verdict::to_json() const {
  return {{"criterion", criterion}, {"status", status}, {"lines", lines}, {"metrics", metrics}};
}

const std::vector<std::string>& criterion_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : kCriteria) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

std::string criterion_kind(const std::string& criterion) {
  for (const auto& c : kCriteria)
    if (criterion == c.name) return c.kind;
  throw std::invalid_argument("unknown criterion '" + criterion + "'");
}

std::vector<std::string> criteria_for_kind(const std::string& kind) {
  std::vector<std::string> out;
  for (const auto& c : kCriteria)
    if (kind == c.kind) out.emplace_back(c.name);
  return out;
}

Verdict summarize(const std::string& criterion, const std::vector<ResultRecord>& records) {
  const View v(records, criterion_kind(criterion));
  if (criterion == "identity") return identity(v);
  if (criterion == "variance") return variance(v);
  if (criterion == "oracle") return oracle(v);
  if (criterion == "green") return green(v);
  if (criterion == "level_sets") return level_sets(v);
  if (criterion == "l2_stability") return l2_stability(v);
  if (criterion == "exponents_d3") return exponents_d3(v);
  if (criterion == "regimes_d4") return regimes_d4(v);
  if (criterion == "ordering") return ordering(v);
  if (criterion == "sampler") return sampler(v);
  if (criterion == "gibbs") return gibbs(v);
  return diagnostics(v);
}

}  // namespace polymer
