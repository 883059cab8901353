#pragma once

// Data tables behind the branch figures. Figures 1-7 are views of two theta = 1
// branches (p = 2.8 and p = 3.15, d = 5) reparametrized for several theta; the
// branch is computed once per (p, d, grid) and cached as a CSV next to the
// outputs. Figures 9 and 10 are parameter sweeps of the expansion and of the
// scenario criteria.

#include <algorithm>
#include <future>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ckn/classify.hpp"
#include "ckn/continuation.hpp"
#include "ckn/expansion.hpp"
#include "ckn/io.hpp"

namespace ckn {

struct FigurePanel {
  std::string label;  // file prefix
  double theta;       // < 0: critical theta = vartheta(p, d)
};

struct FigureSpec {
  std::string name;
  double p;
  int d;
  double mu_max;  // view range in units of mu_FS
  std::vector<FigurePanel> panels;
};

inline const std::vector<FigureSpec>& branch_figures() {
  static const std::vector<FigureSpec> specs = {
      {"fig1", 2.8, 5, 20.0, {{"fig1", 1.0}}},
      {"fig2", 2.8, 5, 20.0, {{"fig2", 0.8}}},
      {"fig3", 2.8, 5, 20.0, {{"fig3", 0.72}}},
      {"fig4", 2.8, 5, 1.6, {{"fig4", 0.95}}},
      {"fig5", 2.8, 5, 3.0, {{"fig5", 0.72}}},
      {"fig6", 2.8, 5, 3.0, {{"fig6", -1.0}}},
      {"fig7", 3.15, 5, 20.0, {{"fig7l", 1.0}, {"fig7c", 0.95}, {"fig7r", -1.0}}},
  };
  return specs;
}

inline std::vector<std::string> figure_names() {
  std::vector<std::string> n;
  for (const auto& s : branch_figures()) n.push_back(s.name);
  n.push_back("fig9");
  n.push_back("fig10");
  return n;
}

/// Branch settings shared by all figures of one (p, d).
struct FigureBranchSettings {
  double mu_start = 0.6;   // units of mu_FS
  double mu_end = 20.0;    // units of mu_FS
  double step = 0.1;       // geometric
  double first_offset = 0.01;  // units of mu_FS
  ContinuationOptions cont;
};

inline FigureBranchSettings figure_settings(const RunConfig& c) {
  FigureBranchSettings s;
  s.cont.n_s = c.n_s;
  s.cont.n_zeta = c.n_zeta;
  s.cont.zeta_factor = c.zeta_factor;
  s.cont.s_factor = c.s_factor;
  return s;
}

inline nlohmann::json branch_cache_key(double p, int d, const FigureBranchSettings& s) {
  return {{"p", p},
          {"d", d},
          {"mu_start", s.mu_start},
          {"mu_end", s.mu_end},
          {"step", s.step},
          {"first_offset", s.first_offset},
          {"n_s", s.cont.n_s},
          {"n_zeta", s.cont.n_zeta},
          {"zeta_factor", s.cont.zeta_factor},
          {"s_factor", s.cont.s_factor},
          {"tol", s.cont.solve.tol},
          {"layout", 1}};
}

/// Branch without fields, rebuilt from a theta = 1 table (tau and nu suffice
/// for every reparametrization).
inline Branch branch_from_table(const CurveTable& t, double p, int d, double mu_bif) {
  Branch br;
  br.p = p;
  br.d = d;
  br.mu_bifurcation_estimate = mu_bif;
  for (const auto& r : t.rows) {
    BranchPoint q;
    q.mu = r.mu;
    q.tau = r.tau;
    q.nu = r.nu;
    q.q = r.nu * (r.mu + r.tau);
    q.symmetric = r.symmetric;
    br.points.push_back(std::move(q));
  }
  return br;
}

/// The theta = 1 branch for figures, from the cache directory when a run with
/// identical settings is stored there.
inline Branch figure_branch(double p, int d, const FigureBranchSettings& s, const std::string& cache_dir) {
  const std::string base = cache_dir + "/branch_p" + short_number(p) + "_d" + std::to_string(d);
  const auto key = branch_cache_key(p, d, s);
  if (std::filesystem::exists(base + ".json") && std::filesystem::exists(base + ".csv")) {
    try {
      const auto meta = nlohmann::json::parse(read_text(base + ".json"));
      if (meta.at("key") == key && !meta.at("truncated").get<bool>())
        return branch_from_table(read_curve(base + ".csv"), p, d, meta.at("mu_bifurcation_estimate"));
    } catch (const std::exception&) {
      // unreadable cache: recompute
    }
  }
  const double m = mu_fs(p, d);
  StepPolicy pol;
  pol.step = s.step;
  pol.geometric = true;
  pol.first_offset = s.first_offset * m;
  Branch br = continue_branch(s.mu_start * m, s.mu_end * m, pol, p, d, s.cont);
  if (br.truncated) throw solver_error("figure branch at p = " + format_double(p) + ": " + br.diagnostic);
  write_curve(to_table(reparametrize(br, 1.0)), base + ".csv");
  nlohmann::json meta{{"key", key},
                      {"truncated", br.truncated},
                      {"mu_bifurcation_estimate", br.mu_bifurcation_estimate}};
  write_text(base + ".json", meta.dump(2) + "\n");
  for (auto& q : br.points) q.field = {};  // fields are not needed downstream
  return br;
}

/// Files written by one figure, path -> content; written in sorted order.
using FigureFiles = std::map<std::string, std::string>;

inline void add_branch_panel(FigureFiles& out, const std::string& dir, const FigureSpec& f, const FigurePanel& pan,
                             const Branch& br) {
  const double p = f.p;
  const int d = f.d;
  const double m = mu_fs(p, d);
  const double vt = vartheta(p, d);
  const double th = pan.theta < 0.0 ? vt : pan.theta;
  const double K = GroundStateCache::global().k_gn(p, d);
  // bifurcating branch restricted to the view
  std::vector<CurvePoint> bp;
  for (const auto& c : reparametrize(br, th))
    if (c.mu <= f.mu_max * m * (1.0 + 1e-12)) bp.push_back(c);
  // symmetric curve on a uniform mu grid over the same view
  std::vector<double> mus;
  const int n = 400;
  for (int i = 0; i <= n; ++i) mus.push_back(m * (0.05 + (f.mu_max - 0.05) * i / n));
  CurveTable sym = to_table(symmetric_curve(mus, p, d, th));
  out[dir + "/" + pan.label + "_symmetric.csv"] = format_curve(sym);
  out[dir + "/" + pan.label + "_branch.csv"] = format_curve(to_table(bp));
  // asymptote of Theorem 1 (constant 1/K_GN in the critical case)
  std::string a = "Lambda,J\n";
  const double l0 = sym.rows.front().Lambda, l1 = std::max(sym.rows.back().Lambda, bp.back().Lambda);
  const bool critical = th <= vt + 1e-12;
  const auto asym = critical ? std::function<double(double)>([K](double) { return 1.0 / K; })
                             : asymptote(th, p, d, K);
  for (int i = 0; i <= n; ++i) {
    const double L = l0 + (l1 - l0) * i / n;
    if (L > 0.0) a += format_double(L) + ',' + format_double(asym(L)) + '\n';
  }
  out[dir + "/" + pan.label + "_asymptote.csv"] = a;
  nlohmann::json meta;
  meta["figure"] = f.name;
  meta["panel"] = pan.label;
  meta["p"] = p;
  meta["d"] = d;
  meta["theta"] = th;
  meta["critical_theta"] = critical;
  meta["vartheta"] = vt;
  meta["mu_FS"] = m;
  meta["Lambda_FS"] = lambda_fs(p, th, d);
  meta["mu_bifurcation_estimate"] = br.mu_bifurcation_estimate;
  meta["K_GN"] = K;
  const auto e = compute_expansion(p, d);
  meta["theta2"] = e.theta2 ? nlohmann::json(*e.theta2) : nlohmann::json(nullptr);
  if (critical) {
    const auto t = gn_threshold(p, d, K);
    meta["Lambda_GN_star"] = t ? nlohmann::json(t->Lambda_GN_star) : nlohmann::json(nullptr);
    meta["mu_GN"] = t ? nlohmann::json(t->mu_GN) : nlohmann::json(nullptr);
  }
  out[dir + "/" + pan.label + "_meta.json"] = meta.dump(2) + "\n";
}

inline FigureFiles sweep_figure(const std::string& name, const std::string& dir) {
  FigureFiles out;
  const int d = 5;
  const double pc = critical_exponent(d);
  std::string csv;
  if (name == "fig9") {
    csv = "p,c_pd,c_pd_approx\n";
    for (int i = 0; i <= 64; ++i) {
      const double p = 2.05 + (pc - 0.005 - 2.05) * i / 64;
      const auto e = compute_expansion(p, d);
      csv += format_double(p) + ',' + (e.c_pd ? format_double(*e.c_pd) : "nan") + ',' +
             (e.c_pd_approx ? format_double(*e.c_pd_approx) : "nan") + '\n';
    }
    nlohmann::json meta{{"figure", "fig9"}, {"d", d}, {"critical_exponent", pc}, {"p_approx", p_approx(d)}};
    out[dir + "/fig9_meta.json"] = meta.dump(2) + "\n";
  } else if (name == "fig10") {
    csv = "p,gn_margin,five_theta2_gap\n";
    for (int i = 0; i <= 48; ++i) {
      const double p = 2.1 + (pc - 0.03 - 2.1) * i / 48;
      const auto e = compute_expansion(p, d);
      const double K = GroundStateCache::global().k_gn(p, d);
      csv += format_double(p) + ',' + format_double(gn_margin(p, d, K)) + ',' +
             (e.theta2 ? format_double(5.0 * (*e.theta2 - vartheta(p, d))) : "nan") + '\n';
    }
    const auto ps = p_star(d);
    const auto pl = p_local_criterion(d);
    nlohmann::json meta{{"figure", "fig10"},
                        {"d", d},
                        {"p_star", ps.p_star ? nlohmann::json(*ps.p_star) : nlohmann::json(nullptr)},
                        {"p_local_criterion", pl.p_star ? nlohmann::json(*pl.p_star) : nlohmann::json(nullptr)}};
    out[dir + "/fig10_meta.json"] = meta.dump(2) + "\n";
  } else {
    throw domain_error("unknown figure '" + name + "'");
  }
  out[dir + "/" + name + ".csv"] = csv;
  return out;
}

/// All files for the requested figures ("all" for every one). Branch
/// computations for distinct p run concurrently; results merge by path.
inline FigureFiles figure_files(const std::vector<std::string>& names, const RunConfig& cfg) {
  const std::string dir = cfg.resolved_out_dir();
  const auto all = figure_names();
  std::set<std::string> want;
  for (const auto& n : names) {
    if (n == "all") {
      want.insert(all.begin(), all.end());
    } else if (std::find(all.begin(), all.end(), n) != all.end()) {
      want.insert(n);
    } else {
      std::string list;
      for (const auto& a : all) list += (list.empty() ? "" : ", ") + a;
      throw domain_error("unknown figure '" + n + "' (expected one of " + list + ", all)");
    }
  }
  const auto settings = figure_settings(cfg);
  const std::string cache = dir + "/cache";
  std::map<std::pair<double, int>, std::shared_future<Branch>> branches;
  for (const auto& f : branch_figures())
    if (want.count(f.name) && !branches.count({f.p, f.d})) {
      const double p = f.p;
      const int d = f.d;
      branches[{p, d}] = std::async(std::launch::async, [=] { return figure_branch(p, d, settings, cache); }).share();
    }
  FigureFiles out;
  for (const auto& f : branch_figures()) {
    if (!want.count(f.name)) continue;
    const Branch& br = branches.at({f.p, f.d}).get();
    for (const auto& pan : f.panels) add_branch_panel(out, dir, f, pan, br);
  }
  for (const char* s : {"fig9", "fig10"})
    if (want.count(s)) out.merge(sweep_figure(s, dir));
  return out;
}

}  // namespace ckn
