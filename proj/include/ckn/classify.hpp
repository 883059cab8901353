#pragma once

// Gagliardo-Nirenberg thresholds, the large-Lambda law of the branches and
// the decision between the two global scenarios of symmetry breaking.

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <utility>

#include "json.hpp"
#include "ckn/analytic.hpp"
#include "ckn/error.hpp"
#include "ckn/expansion.hpp"
#include "ckn/ground_state.hpp"

namespace ckn {

/// Lambda -> theta^theta / (vt^vt (theta-vt)^(theta-vt)) Lambda^(theta-vt) / K_GN.
inline std::function<double(double)> asymptote(double theta, double p, int d, double K_GN) {
  const double vt = vartheta(p, d);
  if (!(theta > vt)) throw domain_error("asymptote requires theta > vartheta(p,d) (the exponent degenerates)");
  detail::require(theta <= 1.0 + 1e-12, "theta must not exceed 1");
  detail::require(K_GN > 0.0, "K_GN must be positive");
  const double pre =
      std::pow(theta, theta) / (std::pow(vt, vt) * std::pow(theta - vt, theta - vt) * K_GN);
  return [pre, e = theta - vt](double Lambda) { return pre * std::pow(Lambda, e); };
}

/// lim mu^{vt-theta} J^theta(mu) = theta^theta vt^-vt (1-vt)^(vt-theta) / K_GN.
inline double asymptotic_constant(double theta, double p, int d, double K_GN) {
  const double vt = vartheta(p, d);
  return std::pow(theta, theta) * std::pow(vt, -vt) * std::pow(1.0 - vt, vt - theta) / K_GN;
}

/// Memoized ground-state constants, keyed by (p, d, resolution). Entries are
/// written once; concurrent readers of a present key never block on a shoot.
class GroundStateCache {
 public:
  double k_gn(double p, int d, const ShootOptions& opt = {}) {
    const Key key{p, d, opt.rel_tol, opt.bisection_tol};
    std::shared_ptr<Entry> e;
    {
      std::lock_guard<std::mutex> lk(m_);
      auto& slot = map_[key];
      if (!slot) slot = std::make_shared<Entry>();
      e = slot;
    }
    std::call_once(e->once, [&] { e->k = ground_state_shoot(p, d, opt).K_GN; });
    return e->k;
  }

  std::size_t size() const {
    std::lock_guard<std::mutex> lk(m_);
    return map_.size();
  }

  static GroundStateCache& global() {
    static GroundStateCache c;
    return c;
  }

 private:
  using Key = std::tuple<double, int, double, double>;
  struct Entry {
    std::once_flag once;
    double k = 0.0;
  };
  mutable std::mutex m_;
  std::map<Key, std::shared_ptr<Entry>> map_;
};

/// K*_CKN(vt, Lambda_FS(p, vt), p), the symmetric constant at the bifurcation.
inline double k_star_at_fs(double p, int d) {
  const double vt = vartheta(p, d);
  return k_star_ckn(vt, lambda_fs(p, vt, d), p);
}

/// 1/K_GN - J^vt(mu_FS): negative in Scenario 2.
inline double gn_margin(double p, int d, double K_GN) { return 1.0 / K_GN - 1.0 / k_star_at_fs(p, d); }

struct GnThreshold {
  double Lambda_GN_star;
  double mu_GN;
};

/// Crossing K*_CKN(vt, Lambda, p) = K_GN. K* decreases from +inf to 0, so the
/// crossing exists and is unique; it is reported only when it lies below
/// Lambda_FS(p, vt).
inline std::optional<GnThreshold> gn_threshold(double p, int d, double K_GN) {
  detail::require(K_GN > 0.0, "K_GN must be positive");
  const double vt = vartheta(p, d);
  const double lfs = lambda_fs(p, vt, d);
  auto f = [&](double L) { return std::log(k_star_ckn(vt, L, p)) - std::log(K_GN); };
  if (!(f(lfs) < 0.0)) return std::nullopt;
  double lo = lfs;
  int k = 0;
  while (!(f(lo) > 0.0)) {
    lo *= 0.5;
    if (++k > 200) throw solver_error("gn_threshold: bracketing failed below Lambda_FS");
  }
  std::uintmax_t it = 200;
  const auto r = boost::math::tools::toms748_solve(
      f, lo, lfs, [](double a, double b) { return std::abs(b - a) <= 1e-10; }, it);
  if (it >= 200) throw solver_error("gn_threshold: root finder did not converge");
  const double L = 0.5 * (r.first + r.second);
  return GnThreshold{L, symmetric_mu_from_lambda(vt, L, p)};
}

struct PStarResult {
  std::optional<double> p_star;
  std::optional<std::pair<double, double>> bracket;
  std::string diagnostic;
};

/// Root in p of K_GN(p,d) - K*_CKN(vt, Lambda_FS, p), bisection to tol.
inline PStarResult p_star(int d, double tol = 1e-4, const ShootOptions& opt = {}) {
  detail::require(d >= 3, "dimension d must be >= 3");
  auto& cache = GroundStateCache::global();
  auto g = [&](double p) { return cache.k_gn(p, d, opt) - k_star_at_fs(p, d); };
  const double pc = critical_exponent(d);
  // coarse scan away from both ends, where the shoot is ill-conditioned
  const int n = 16;
  std::optional<std::pair<double, double>> br;
  double a = 2.0 + 0.5 * (pc - 2.0) / n, ga = g(a);
  for (int i = 1; i < n && !br; ++i) {
    const double b = 2.0 + (i + 0.5) * (pc - 2.0) / n, gb = g(b);
    if ((ga > 0.0) != (gb > 0.0)) br = std::make_pair(a, b);
    a = b;
    ga = gb;
  }
  PStarResult out;
  if (!br) {
    out.diagnostic = "no sign change of K_GN - K*_CKN at Lambda_FS in (2, 2*)";
    return out;
  }
  double lo = br->first, hi = br->second;
  const bool lo_positive = g(lo) > 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    ((g(mid) > 0.0) == lo_positive ? lo : hi) = mid;
  }
  out.p_star = 0.5 * (lo + hi);
  out.bracket = std::make_pair(lo, hi);
  return out;
}

/// Root in p of theta2(p,d) - vartheta(p,d), the local criterion at the
/// bifurcation point (where Lambda^vartheta changes direction at mu_FS).
inline PStarResult p_local_criterion(int d, double tol = 1e-4) {
  detail::require(d >= 3, "dimension d must be >= 3");
  auto g = [&](double p) {
    const auto e = compute_expansion(p, d);
    if (!e.theta2) throw solver_error("theta2 undefined at p = " + std::to_string(p));
    return *e.theta2 - vartheta(p, d);
  };
  const double pc = critical_exponent(d);
  const int n = 16;
  PStarResult out;
  double a = 2.0 + 0.5 * (pc - 2.0) / n, ga = g(a);
  for (int i = 1; i < n; ++i) {
    const double b = 2.0 + (i + 0.5) * (pc - 2.0) / n, gb = g(b);
    if ((ga > 0.0) != (gb > 0.0)) {
      double lo = a, hi = b;
      const bool lo_positive = ga > 0.0;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        ((g(mid) > 0.0) == lo_positive ? lo : hi) = mid;
      }
      out.p_star = 0.5 * (lo + hi);
      out.bracket = std::make_pair(lo, hi);
      return out;
    }
    a = b;
    ga = gb;
  }
  out.diagnostic = "theta2 - vartheta keeps its sign in (2, 2*)";
  return out;
}

enum class Scenario { one, two };

inline std::string to_string(Scenario s) { return s == Scenario::one ? "one" : "two"; }

struct ScenarioReport {
  double p = 0.0;
  int d = 0;
  double K_GN = 0.0;
  double K_star_at_FS = 0.0;
  Scenario scenario = Scenario::one;
  bool tie = false;  // |K_GN - K*| within the tolerance window
  std::optional<double> Lambda_GN_star;
  std::optional<double> mu_GN;
  std::optional<std::pair<double, double>> p_star_bracket;
  std::optional<double> theta2;  // vartheta_1 (observed equal, per the numerics)
  std::string note;
};

struct ClassifyOptions {
  ShootOptions shoot;
  double tie_window = 1e-7;  // relative
  bool with_p_star = true;
};

inline ScenarioReport classify_scenario(double p, int d, const ClassifyOptions& opt = {}) {
  detail::require(d >= 3, "dimension d must be >= 3");
  detail::require(p > 2.0 && p < critical_exponent(d), "classify requires 2 < p < 2*");
  ScenarioReport r;
  r.p = p;
  r.d = d;
  r.K_GN = GroundStateCache::global().k_gn(p, d, opt.shoot);
  r.K_star_at_FS = k_star_at_fs(p, d);
  r.scenario = r.K_GN > r.K_star_at_FS ? Scenario::two : Scenario::one;
  r.tie = std::abs(r.K_GN - r.K_star_at_FS) <= opt.tie_window * r.K_star_at_FS;
  if (r.scenario == Scenario::two) {
    const auto t = gn_threshold(p, d, r.K_GN);
    if (!t) throw solver_error("scenario two without a crossing below Lambda_FS");
    r.Lambda_GN_star = t->Lambda_GN_star;
    r.mu_GN = t->mu_GN;
    r.note = "K_CKN(vartheta, Lambda, p) = K_GN for Lambda > Lambda_GN_star (mu > mu_GN): no optimal function there";
  } else {
    r.note = "symmetric optimal functions up to Lambda_FS(p, theta), branch optimal beyond";
  }
  if (r.tie) r.note += "; K_GN and K*_CKN(Lambda_FS) agree within the tie window (p at p_star)";
  const auto e = compute_expansion(p, d);
  r.theta2 = e.theta2;
  if (opt.with_p_star) {
    const auto ps = p_star(d, 1e-4, opt.shoot);
    r.p_star_bracket = ps.bracket;
  }
  return r;
}

inline nlohmann::json to_json(const ScenarioReport& r) {
  using nlohmann::json;
  json j;
  j["p"] = r.p;
  j["d"] = r.d;
  j["K_GN"] = r.K_GN;
  j["K_star_at_FS"] = r.K_star_at_FS;
  j["scenario"] = to_string(r.scenario);
  j["tie"] = r.tie;
  j["Lambda_GN_star"] = r.Lambda_GN_star ? json(*r.Lambda_GN_star) : json(nullptr);
  j["mu_GN"] = r.mu_GN ? json(*r.mu_GN) : json(nullptr);
  j["p_star_bracket"] =
      r.p_star_bracket ? json::array({r.p_star_bracket->first, r.p_star_bracket->second}) : json(nullptr);
  j["theta2"] = r.theta2 ? json(*r.theta2) : json(nullptr);
  j["vartheta1_observed"] = j["theta2"];
  j["note"] = r.note;
  return j;
}

}  // namespace ckn
