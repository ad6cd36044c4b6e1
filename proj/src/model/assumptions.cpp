#include <algorithm>
#include <cmath>
#include <limits>

#include "chj/error.hpp"
#include "chj/model.hpp"

namespace chj {

AssumptionReport check_assumptions(const HamiltonianModel& model, const SamplingSpec& samples) {
  AssumptionReport report;
  report.sample_count = samples.count();
  const SearchBounds& w = samples.bounds;

  double min_dpp = std::numeric_limits<double>::infinity();
  double min_neg_du = std::numeric_limits<double>::infinity();
  double max_neg_du = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples.nx; ++i) {
    const double x = static_cast<double>(i) / samples.nx;
    for (int j = 0; j < samples.np; ++j) {
      const double p = -w.p_max + 2.0 * w.p_max * j / std::max(1, samples.np - 1);
      for (int k = 0; k < samples.nu; ++k) {
        const double u = -w.u_max + 2.0 * w.u_max * k / std::max(1, samples.nu - 1);
        min_dpp = std::min(min_dpp, model.d_pp(x, p, u));
        const double neg_du = -model.d_u(x, p, u);
        min_neg_du = std::min(min_neg_du, neg_du);
        max_neg_du = std::max(max_neg_du, neg_du);
      }
    }
  }
  report.h1_margin = min_dpp;
  report.h1_ok = min_dpp > 0.0;
  report.h4_delta_margin = min_neg_du;
  report.h4_kappa_observed = max_neg_du;
  const double slack = 1e-12;
  report.h4_ok = min_neg_du > 0.0 && min_neg_du >= model.delta - slack &&
                 max_neg_du <= model.kappa + slack;

  // min_p H(x, p, 0) = -L(x, 0, 0), attained at the p solving d_p = 0.
  double worst = -std::numeric_limits<double>::infinity();
  double worst_x = 0.0;
  bool c_ok = report.h1_ok;
  for (int i = 0; i < samples.nx && report.h1_ok; ++i) {
    const double x = static_cast<double>(i) / samples.nx;
    try {
      const LagrangePoint lp = legendre_transform(model, x, 0.0, 0.0, w);
      const double min_h = -lp.value;
      if (std::abs(lp.p_star) >= w.p_max * (1.0 - 1e-9)) report.c_hit_boundary = true;
      if (min_h > worst) {
        worst = min_h;
        worst_x = x;
      }
    } catch (const Error&) {
      c_ok = false;
      report.c_hit_boundary = true;
    }
  }
  report.condition_C_margin = worst;
  report.condition_C_worst_x = worst_x;
  report.condition_C_ok = c_ok && worst < 0.0;
  return report;
}

}  // namespace chj
