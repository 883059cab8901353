// ckn: command-line front end. Settings come from defaults, then an optional
// --config file, then flags. Exit codes: 0 success, 1 invalid input or I/O,
// 2 numerical failure.

#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ckn/classify.hpp"
#include "ckn/continuation.hpp"
#include "ckn/expansion.hpp"
#include "ckn/figures.hpp"
#include "ckn/ground_state.hpp"
#include "ckn/io.hpp"
#include "ckn/spectral_ode.hpp"

using namespace ckn;

namespace {

// Flags of one subcommand, stored as text and applied through the config keys
// so that files and flags share one parser.
struct Flags {
  std::string config;
  std::map<std::string, std::string> text;
  std::map<std::string, CLI::Option*> opt;
  std::map<std::string, bool> flag;
  std::map<std::string, CLI::Option*> flag_opt;

  void add(CLI::App* app, const std::string& key, const std::string& help) {
    std::string name = key;
    for (auto& c : name)
      if (c == '_') c = '-';
    opt[key] = app->add_option("--" + name, text[key], help);
  }
  void add_flag(CLI::App* app, const std::string& key, const std::string& help) {
    std::string name = key;
    for (auto& c : name)
      if (c == '_') c = '-';
    flag_opt[key] = app->add_flag("--" + name, flag[key], help);
  }

  RunConfig resolve() const {
    RunConfig c;
    if (!config.empty()) load_config(c, config);
    for (const auto& [k, o] : opt)
      if (o->count() > 0) apply_setting(c, k, text.at(k));
    for (const auto& [k, o] : flag_opt)
      if (o->count() > 0) apply_setting(c, k, flag.at(k) ? "1" : "0");
    c.validate();
    return c;
  }
};

void add_common(CLI::App* app, Flags& f, bool grid) {
  app->add_option("--config", f.config, "key = value settings file (flags take precedence)");
  f.add(app, "d", "dimension (default 5)");
  f.add(app, "p", "exponent, 2 < p < 2d/(d-2) (default 2.8)");
  f.add(app, "out", "output file, '-' for stdout");
  f.add(app, "out_dir", "output directory (default $CKN_OUT_DIR, else .)");
  if (grid) {
    f.add(app, "n_s", "points in s, odd with (n_s-1)/2 even (default 801)");
    f.add(app, "n_zeta", "angular nodes, 0 for automatic (default 0)");
    f.add(app, "zeta_factor", "automatic angular nodes: even ceil(factor sqrt(mu/(1-vartheta))), >= 32 (default 7)");
    f.add(app, "s_factor", "half-length of the s interval times beta(mu) (default 20)");
  }
}

ContinuationOptions continuation_options(const RunConfig& c) {
  ContinuationOptions o;
  o.n_s = c.n_s;
  o.n_zeta = c.n_zeta;
  o.zeta_factor = c.zeta_factor;
  o.s_factor = c.s_factor;
  return o;
}

std::string tag(const RunConfig& c, double theta) {
  return "p" + short_number(c.p) + "_d" + std::to_string(c.d) + "_theta" + short_number(theta);
}

// Table commands write <out_dir>/<stem>_<tag>.csv per theta, or --out for a
// single theta.
void emit_tables(const RunConfig& c, const std::string& stem,
                 const std::vector<std::pair<double, CurveTable>>& tables) {
  if (!c.out.empty()) {
    if (tables.size() != 1) throw domain_error("--out needs a single theta; use --out-dir for several");
    write_curve(tables.front().second, c.out);
    return;
  }
  for (const auto& [th, t] : tables) {
    const std::string path = c.resolved_out_dir() + "/" + stem + "_" + tag(c, th) + ".csv";
    write_curve(t, path);
    std::cout << path << '\n';
  }
}

void emit_report(const RunConfig& c, const std::string& text) { write_text(c.out.empty() ? "-" : c.out, text); }

int run_symmetric(const RunConfig& c) {
  if (!c.mu) throw domain_error("symmetric-branch needs --mu start:end:step");
  std::vector<std::pair<double, CurveTable>> tables;
  for (double th : c.thetas) tables.emplace_back(th, to_table(symmetric_curve(c.mu->values(), c.p, c.d, th)));
  emit_tables(c, "symmetric", tables);
  return 0;
}

int run_continue(const RunConfig& c) {
  const double m = mu_fs(c.p, c.d);
  // default: 0.9 mu_FS to 2 mu_FS in 5% relative steps
  MuRange r{0.9 * m, 2.0 * m, 0.05};
  bool geometric = true;
  if (c.mu) {
    r = *c.mu;
    geometric = c.geometric;
  }
  StepPolicy pol;
  pol.step = r.step;
  pol.geometric = geometric;
  auto opt = continuation_options(c);
  opt.on_point = [](const BranchPoint& q) {
    std::fprintf(stderr, "mu %.6g  %s  residual %.2e\n", q.mu, q.symmetric ? "symmetric" : "non-symmetric",
                 q.residual_norm);
  };
  const Branch br = continue_branch(r.start, r.end, pol, c.p, c.d, opt);
  std::vector<std::pair<double, CurveTable>> tables;
  for (double th : c.thetas) tables.emplace_back(th, to_table(reparametrize(br, th)));
  emit_tables(c, "branch", tables);
  if (c.dump_fields) {
    const std::string dir = c.resolved_out_dir() + "/fields_" + tag(c, 1.0);
    for (size_t i = 0; i < br.points.size(); ++i) {
      const auto& q = br.points[i];
      char name[32];
      std::snprintf(name, sizeof name, "/point_%03zu", i);
      write_field_dump(q, make_angular_basis(c.d, q.field.grid.n_zeta), c.p, dir + name);
    }
  }
  std::fprintf(stderr, "bifurcation estimate mu = %.8g (mu_FS = %.8g)\n", br.mu_bifurcation_estimate, m);
  if (br.truncated) throw solver_error("branch truncated: " + br.diagnostic);
  return 0;
}

int run_chi(const RunConfig& c) {
  const auto prof = solve_chi(chi_kind_from_string(c.chi_kind), c.p, c.d, default_chi_grid(c.p, c.d));
  std::string out = "s,chi\n";
  for (int i = 0; i < prof.grid.n; ++i) out += format_double(prof.grid.node(i)) + ',' + format_double(prof.values[i]) + '\n';
  emit_report(c, out);
  return 0;
}

int run_gn(const RunConfig& c) {
  const auto g = ground_state_shoot(c.p, c.d);
  nlohmann::json j{{"p", c.p},          {"d", c.d},           {"u0", g.u0},
                   {"K_GN", g.K_GN},    {"S_p", g.S_p},       {"grad2", g.grad2},
                   {"mass2", g.mass2},  {"massp", g.massp},   {"pohozaev_defect", g.pohozaev_defect()},
                   {"vartheta", vartheta(c.p, c.d)}};
  emit_report(c, j.dump(2) + "\n");
  return 0;
}

int run_figure(const RunConfig& c) {
  if (c.name.empty()) throw domain_error("figure needs --name (fig1..fig7, fig9, fig10 or all)");
  std::vector<std::string> names;
  std::stringstream ss(c.name);
  for (std::string s; std::getline(ss, s, ',');) names.push_back(trim(s));
  for (const auto& [path, text] : figure_files(names, c)) {
    write_text(path, text);
    std::cout << path << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Symmetry breaking in Caffarelli-Kohn-Nirenberg inequalities: branches, expansion, scenarios"};
  app.require_subcommand(1);
  std::map<std::string, Flags> flags;

  auto* sym = app.add_subcommand("symmetric-branch", "closed-form symmetric curve (CSV)");
  add_common(sym, flags["symmetric-branch"], false);
  flags["symmetric-branch"].add(sym, "theta", "theta or comma list (default 1)");
  flags["symmetric-branch"].add(sym, "mu", "start:end:step");

  auto* exp = app.add_subcommand("expansion", "bifurcation expansion at mu_FS (JSON)");
  add_common(exp, flags["expansion"], false);

  auto* chi = app.add_subcommand("chi", "one chi profile at mu_FS (CSV s,chi)");
  add_common(chi, flags["chi"], false);
  flags["chi"].add(chi, "kind", "chi_0_pm1, chi_0_2pm3 or chi_2_2pm3");

  auto* gn = app.add_subcommand("gn", "Gagliardo-Nirenberg ground state (JSON)");
  add_common(gn, flags["gn"], false);

  auto* cont = app.add_subcommand("continue", "non-symmetric branch by continuation in mu (CSV per theta)");
  add_common(cont, flags["continue"], true);
  flags["continue"].add(cont, "theta", "theta or comma list for the reparametrized tables (default 1)");
  flags["continue"].add(cont, "mu", "start:end:step (default 0.9 mu_FS to 2 mu_FS, 5% geometric)");
  flags["continue"].add_flag(cont, "geometric", "step is relative: mu_{k+1} = mu_k (1 + step)");
  flags["continue"].add_flag(cont, "dump_fields", "raw fields per point (little-endian f64 + JSON header)");

  auto* cls = app.add_subcommand("classify", "Scenario 1 or 2 (JSON)");
  add_common(cls, flags["classify"], false);
  bool skip_p_star = false;
  cls->add_flag("--skip-p-star", skip_p_star, "do not locate the threshold exponent");

  auto* fig = app.add_subcommand("figure", "data tables of a figure (CSV + JSON)");
  add_common(fig, flags["figure"], true);
  flags["figure"].add(fig, "name", "fig1..fig7, fig9, fig10, all (comma list allowed)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    CLI::App* shown = &app;
    for (auto* s : app.get_subcommands()) shown = s;
    std::cerr << shown->help();
    return 1;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const RunConfig c = flags.at(sub->get_name()).resolve();
    if (sub == sym) return run_symmetric(c);
    if (sub == exp) return emit_report(c, to_json(compute_expansion(c.p, c.d)).dump(2) + "\n"), 0;
    if (sub == chi) return run_chi(c);
    if (sub == gn) return run_gn(c);
    if (sub == cont) return run_continue(c);
    if (sub == cls) {
      ClassifyOptions o;
      o.with_p_star = !skip_p_star;
      return emit_report(c, to_json(classify_scenario(c.p, c.d, o)).dump(2) + "\n"), 0;
    }
    if (sub == fig) return run_figure(c);
  } catch (const domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const solver_error& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
