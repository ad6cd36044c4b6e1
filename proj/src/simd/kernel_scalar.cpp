#include <algorithm>
#include <cmath>

#include "chj/simd/lax_oleinik_kernel.hpp"

namespace chj::simd {

namespace {

struct Foot {
  double m;
  double theta;
};

inline Foot locate(double v, double cells_per_velocity) {
  const double s = v * cells_per_velocity;
  const double r = std::nearbyint(s);
  if (std::fabs(s - r) < kSnapCells) return {r, 0.0};
  const double f = std::floor(s);
  return {f, s - f};
}

inline double interpolate(const double* base, int i, Foot foot) {
  const int m = static_cast<int>(foot.m);
  const double a = base[i - m];
  const double b = base[i - m - 1];
  return a + foot.theta * (b - a);
}

inline double running_cost(double dt, double v, double drift, double hia, double pot) {
  const double diff = v - drift;
  return dt * (diff * diff * hia - pot);
}

}  // namespace

void minimize_scalar(const MinimizeRequest& req, const MinimizeOutput& out) {
  const double* base = req.phi_ext + req.pad;
  const QuadraticNodeTable& t = *req.table;
  for (int i = 0; i < req.n; ++i) {
    const double drift = t.drift[i];
    const double hia = t.half_inv_a[i];
    const double pot = t.potential[i];
    auto cost_at = [&](double v, double* foot_value) {
      const double interp = interpolate(base, i, locate(v, req.cells_per_velocity));
      if (foot_value) *foot_value = interp;
      return interp + running_cost(req.dt, v, drift, hia, pot);
    };

    double best = INFINITY;
    double best_v = 0.0;
    double best_foot = 0.0;
    for (int k = 0; k < req.n_velocities; ++k) {
      const double v = req.velocities[k];
      double foot;
      const double c = cost_at(v, &foot);
      if (c < best) {
        best = c;
        best_v = v;
        best_foot = foot;
      }
    }

    double lo = std::max(-req.v_max, best_v - req.spacing);
    double hi = std::min(req.v_max, best_v + req.spacing);
    double c = hi - kGoldenRatio * (hi - lo);
    double d = lo + kGoldenRatio * (hi - lo);
    double fc = cost_at(c, nullptr);
    double fd = cost_at(d, nullptr);
    for (int it = 0; it < req.golden_iterations; ++it) {
      if (fc < fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - kGoldenRatio * (hi - lo);
        fc = cost_at(c, nullptr);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + kGoldenRatio * (hi - lo);
        fd = cost_at(d, nullptr);
      }
    }
    const double vm = 0.5 * (lo + hi);
    double foot_m;
    const double fm = cost_at(vm, &foot_m);
    if (fm < best) {
      best = fm;
      best_v = vm;
      best_foot = foot_m;
    }
    out.min_cost[i] = best;
    out.argmin[i] = best_v;
    out.foot_value[i] = best_foot;
  }
}

}  // namespace chj::simd
