#include <algorithm>
#include <cmath>
#include <string>

#include "chj/error.hpp"
#include "chj/periodic.hpp"

namespace chj {

const char* to_string(TrichotomyClass c) noexcept {
  switch (c) {
    case TrichotomyClass::D1_bounded: return "D1_bounded";
    case TrichotomyClass::D2_minus_infinity: return "D2_minus_infinity";
    case TrichotomyClass::D3_plus_infinity: return "D3_plus_infinity";
  }
  return "unknown";
}

TrichotomyReport classify_trichotomy(const HamiltonianModel& model, const Field& phi, const Field& u_plus,
                                     const TrichotomyOptions& options) {
  const Grid grid = phi.grid;
  TrichotomyReport rep;
  rep.touch_tol = touch_tolerance(phi);
  rep.min_diff = INFINITY;
  rep.max_diff = -INFINITY;
  for (int i = 0; i < grid.n; ++i) {
    const double d = phi.values[i] - u_plus.values[i];
    rep.min_diff = std::min(rep.min_diff, d);
    rep.max_diff = std::max(rep.max_diff, d);
  }
  if (rep.min_diff < -rep.touch_tol) {
    rep.static_class = TrichotomyClass::D2_minus_infinity;
  } else if (rep.min_diff > rep.touch_tol) {
    rep.static_class = TrichotomyClass::D3_plus_infinity;
  } else {
    rep.static_class = TrichotomyClass::D1_bounded;
  }

  SchemeOptions so = options.scheme;
  if (options.period_T > 0.0) {
    PeriodicOptions po;
    po.scheme = options.scheme;
    po.slices = 1;
    po.steps_per_period = options.steps_per_period;
    so = period_aligned_scheme(model, grid, options.period_T, po);
  }
  const LaxOleinikScheme scheme(model, grid, so);
  const double T = std::lround(options.T_budget / so.dt) * so.dt;
  const EvolutionTrace tr = evolve(scheme, phi, T, options.snapshot_every);

  bool dynamic = false;
  for (std::size_t k = 0; k < tr.times.size() && !dynamic; ++k) {
    const Field& s = tr.snapshots[k];
    if (s.min() >= options.escape_level) {
      rep.dynamic_class = TrichotomyClass::D3_plus_infinity;
      rep.escape_time = tr.times[k];
      dynamic = true;
    } else if (s.max() <= -options.escape_level) {
      rep.dynamic_class = TrichotomyClass::D2_minus_infinity;
      rep.escape_time = tr.times[k];
      dynamic = true;
    }
  }
  if (!dynamic && !tr.diverged) {
    // Bounded: the sup-norm over the second half does not grow and stays below the escape level.
    double K = 0.0;
    double third_quarter = 0.0;
    double last_quarter = 0.0;
    for (std::size_t k = 0; k < tr.times.size(); ++k) {
      const double t = tr.times[k];
      const double s = tr.snapshots[k].sup_norm();
      if (t >= 0.5 * T) K = std::max(K, s);
      if (t >= 0.5 * T && t < 0.75 * T) third_quarter = std::max(third_quarter, s);
      if (t >= 0.75 * T) last_quarter = std::max(last_quarter, s);
    }
    const bool not_growing = last_quarter <= third_quarter * (1.0 + 1e-2) + 1e-6;
    if (K <= options.escape_level && not_growing) {
      rep.dynamic_class = TrichotomyClass::D1_bounded;
      rep.bound_K = K;
      rep.onset_T_phi = 0.0;
      for (std::size_t k = tr.times.size(); k-- > 0;) {
        if (tr.snapshots[k].sup_norm() > K) {
          rep.onset_T_phi = tr.times[std::min(k + 1, tr.times.size() - 1)];
          break;
        }
      }
      dynamic = true;
    }
  }
  rep.confirmed = dynamic && rep.dynamic_class == rep.static_class;
  if (!dynamic) rep.dynamic_class = rep.static_class;
  return rep;
}

}  // namespace chj
