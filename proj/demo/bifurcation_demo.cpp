// Follows the non-symmetric branch a little past the bifurcation point and
// compares the computed energy ratio with the second-order expansion.
//
//   ckn_demo [p] [d]     (defaults 2.8 5)

#include <cstdio>
#include <cstdlib>

#include "ckn/classify.hpp"
#include "ckn/continuation.hpp"
#include "ckn/expansion.hpp"

int main(int argc, char** argv) {
  const double p = argc > 1 ? std::atof(argv[1]) : 2.8;
  const int d = argc > 2 ? std::atoi(argv[2]) : 5;
  try {
    const double m = ckn::mu_fs(p, d);
    const auto e = ckn::compute_expansion(p, d);
    std::printf("p = %g, d = %d: mu_FS = %.6f, c = %.6f, theta2 = %.6f, vartheta = %.6f\n", p, d, m,
                e.c_pd ? *e.c_pd : 0.0, e.theta2 ? *e.theta2 : 0.0, ckn::vartheta(p, d));

    ckn::StepPolicy pol;
    pol.step = 0.05;
    pol.geometric = true;
    pol.first_offset = 0.01 * m;
    const auto br = ckn::continue_branch(0.9 * m, 1.5 * m, pol, p, d);
    std::printf("bifurcation estimate %.6f\n\n", br.mu_bifurcation_estimate);

    std::printf("%10s %12s %12s %14s %14s\n", "mu", "tau", "J^1", "Q/Q* solver", "Q/Q* expansion");
    for (const auto& q : br.points) {
      const double qs = ckn::nu_star(q.mu, p) * (q.mu + ckn::tau_star(q.mu, p));
      const double pred = e.c_pd && q.mu > m ? ckn::energy_ratio_prediction(q.mu, p, d, *e.c_pd) : 1.0;
      std::printf("%10.5f %12.6f %12.6f %14.8f %14.8f%s\n", q.mu, q.tau, q.nu * (q.mu + q.tau), q.q / qs, pred,
                  q.symmetric ? "  symmetric" : "");
    }

    const auto s = ckn::classify_scenario(p, d, {{}, 1e-7, false});
    std::printf("\nK_GN = %.8f, K*_CKN(vartheta, Lambda_FS) = %.8f: scenario %s\n", s.K_GN, s.K_star_at_FS,
                ckn::to_string(s.scenario).c_str());
    if (br.truncated) {
      std::fprintf(stderr, "branch truncated: %s\n", br.diagnostic.c_str());
      return 2;
    }
  } catch (const ckn::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "failure: %s\n", e.what());
    return 2;
  }
  return 0;
}
