#include <cmath>

#include "chj/error.hpp"
#include "chj/model.hpp"

namespace chj {

namespace {
constexpr double kNewtonTol = 1e-12;
constexpr int kMaxNewton = 50;
}  // namespace

LagrangePoint legendre_transform(const HamiltonianModel& model, double x, double v, double u,
                                 const SearchBounds& bounds) {
  // d_p is strictly increasing in p under (H1), so the root is bracketed iff
  // the residual changes sign across the window.
  auto residual = [&](double p) { return model.d_p(x, p, u) - v; };
  double lo = -bounds.p_max;
  double hi = bounds.p_max;
  const double r_lo = residual(lo);
  const double r_hi = residual(hi);
  if (r_lo > 0.0 || r_hi < 0.0) {
    throw Error(ErrorCode::NoBracket, "d_p(x, p, u) = " + std::to_string(v) +
                                          " has no root in [-P_max, P_max] at x = " +
                                          std::to_string(x));
  }

  double p = 0.0;
  if (p <= lo || p >= hi) p = 0.5 * (lo + hi);
  bool converged = false;
  for (int it = 0; it < 4 * kMaxNewton; ++it) {
    const double r = residual(p);
    if (std::abs(r) <= kNewtonTol * std::max(1.0, std::abs(v))) {
      converged = true;
      break;
    }
    if (r > 0.0) {
      hi = p;
    } else {
      lo = p;
    }
    const double slope = model.d_pp(x, p, u);
    double next = p - r / slope;
    // Bisection fallback when Newton leaves the bracket or stalls.
    if (!(next > lo && next < hi) || it >= kMaxNewton) next = 0.5 * (lo + hi);
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(p))) {
      p = next;
      converged = true;
      break;
    }
    p = next;
  }
  if (!converged) {
    throw Error(ErrorCode::NotConverged, "Legendre transform did not converge at x = " + std::to_string(x));
  }
  return {v * p - model.eval_H(x, p, u), p};
}

double lagrangian(const HamiltonianModel& model, double x, double v, double u,
                  const SearchBounds& bounds) {
  if (auto closed = model.closed_form_L(x, v, u)) return closed->value;
  return legendre_transform(model, x, v, u, bounds).value;
}

}  // namespace chj
