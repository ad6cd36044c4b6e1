#include <algorithm>
#include <cmath>
#include <string>

#include "chj/error.hpp"
#include "chj/periodic.hpp"

namespace chj {

namespace {

/// Sup distance between successive period-map iterates; masks that differ
/// mean the iterates are not yet comparable.
double cauchy_distance(const Field& a, const Field& b) {
  if (a.has_mask() || b.has_mask()) {
    for (int i = 0; i < a.grid.n; ++i) {
      if (a.capped(i) != b.capped(i)) return INFINITY;
    }
  }
  return sup_distance(a, b);
}

/// Smallest H(x, ., u) over [lo, hi] for convex H.
double min_on_interval(const HamiltonianModel& model, double x, double u, double lo, double hi) {
  double p_star;
  if (model.quadratic) {
    p_star = -model.quadratic->b.value(x);
  } else {
    p_star = legendre_transform(model, x, 0.0, u).p_star;
  }
  return model.eval_H(x, std::clamp(p_star, lo, hi), u);
}

double godunov(const HamiltonianModel& model, double x, double u, double p_minus, double p_plus) {
  if (p_minus <= p_plus) return min_on_interval(model, x, u, p_minus, p_plus);
  return std::max(model.eval_H(x, p_minus, u), model.eval_H(x, p_plus, u));
}

/// Iterates the period map until successive iterates are within tol.
Field iterate_period_map(const LaxOleinikScheme& scheme, Field current, double period, const Field& reference,
                         const PeriodicOptions& o, PeriodicSolution& out) {
  for (int k = 1; k <= o.n_max; ++k) {
    EvolutionTrace tr = evolve(scheme, current, period, 0.0);
    if (tr.diverged) {
      throw Error(ErrorCode::NotConverged,
                  "period map escaped the cap after " + std::to_string(k) + " periods");
    }
    Field next = tr.final();
    if (o.renormalize && !next.has_mask()) {
      double shift = INFINITY;
      for (int i = 0; i < next.grid.n; ++i) shift = std::min(shift, next.values[i] - reference.values[i]);
      for (double& v : next.values) v -= shift;
      out.renormalization_shifts.push_back(shift);
    }
    const double d = cauchy_distance(next, current);
    out.cauchy_history.push_back(d);
    current = std::move(next);
    out.periods_used = k;
    if (d <= o.tol) return current;
  }
  throw Error(ErrorCode::NotConverged, "period map not Cauchy within " + std::to_string(o.n_max) +
                                           " periods (last step " + std::to_string(out.cauchy_history.back()) +
                                           ")");
}

void record_period(const LaxOleinikScheme& scheme, const Field& start, double period, const PeriodicOptions& o,
                   PeriodicSolution& out) {
  const double tau = period / o.slices;
  const EvolutionTrace tr = evolve(scheme, start, period + tau, tau);
  if (static_cast<int>(tr.snapshots.size()) != o.slices + 2) {
    throw Error(ErrorCode::InvalidArgument, "steps per period must be a multiple of the slice count");
  }
  out.before = tr.snapshots.front();
  out.slices.assign(tr.snapshots.begin() + 1, tr.snapshots.end() - 1);
  out.closing = tr.snapshots.back();
  out.period_T = period;
  out.scheme_options = scheme.options();
  if (o.detect) {
    const EvolutionTrace long_tr = evolve(scheme, out.closing, o.detect_periods * period, period / o.slices);
    const PeriodEstimate est = detect_period(long_tr, period);
    out.detected_period = est.period;
    out.detected_residual = est.residual;
  }
}

}  // namespace

SchemeOptions period_aligned_scheme(const HamiltonianModel& model, const Grid& grid, double period,
                                    const PeriodicOptions& options) {
  SchemeOptions so = options.scheme;
  long steps = options.steps_per_period > 0 ? options.steps_per_period : grid.n;
  const double dt_max = max_time_step(model, grid, so);
  while (period / steps > dt_max) steps *= 2;
  if (steps % options.slices != 0) {
    throw Error(ErrorCode::InvalidArgument, "steps per period (" + std::to_string(steps) +
                                                ") must be a multiple of the slice count");
  }
  so.dt = period / steps;
  return so;
}

std::pair<double, int> upwind_pde_residual(const HamiltonianModel& model, const PeriodicSolution& w) {
  const int m = static_cast<int>(w.slices.size());
  if (m < 2) return {0.0, 0};
  const Grid g = w.slices[0].grid;
  const double h = g.h();
  const double tau = w.period_T / m;
  auto slice = [&](int k) -> const Field& {
    if (k < 0) return w.before.values.empty() ? w.slices[m - 1] : w.before;
    if (k >= m) return w.closing;
    return w.slices[k];
  };
  // Kinks in x or t are where viscosity solutions are not classical; a node
  // counts as smooth when its slope jumps are below 5 steps, and is used only
  // if its four stencil neighbours are smooth too (a kink crossing a cell
  // between two slices shows up as a partial jump).
  std::vector<std::uint8_t> smooth(static_cast<std::size_t>(m) * g.n, 0);
  std::vector<double> residual(static_cast<std::size_t>(m) * g.n, 0.0);
  for (int k = 0; k < m; ++k) {
    const Field& prev = slice(k - 1);
    const Field& cur = slice(k);
    const Field& next = slice(k + 1);
    for (int i = 0; i < g.n; ++i) {
      const int il = g.wrap(i - 1);
      const int ir = g.wrap(i + 1);
      if (cur.capped(i) || cur.capped(il) || cur.capped(ir) || prev.capped(i) || next.capped(i)) continue;
      const double p_minus = (cur.values[i] - cur.values[il]) / h;
      const double p_plus = (cur.values[ir] - cur.values[i]) / h;
      const double wt_minus = (cur.values[i] - prev.values[i]) / tau;
      const double wt_plus = (next.values[i] - cur.values[i]) / tau;
      if (std::fabs(p_plus - p_minus) >= 5.0 * h || std::fabs(wt_plus - wt_minus) >= 5.0 * tau) continue;
      const double w_t = 0.5 * (wt_minus + wt_plus);
      smooth[static_cast<std::size_t>(k) * g.n + i] = 1;
      residual[static_cast<std::size_t>(k) * g.n + i] = w_t + godunov(model, g.x(i), cur.values[i], p_minus, p_plus);
    }
  }
  auto is_smooth = [&](int k, int i) {
    if (k < 0 || k >= m) return true;
    return smooth[static_cast<std::size_t>(k) * g.n + g.wrap(i)] != 0;
  };
  double worst = 0.0;
  int used = 0;
  for (int k = 0; k < m; ++k) {
    for (int i = 0; i < g.n; ++i) {
      if (!is_smooth(k, i) || !is_smooth(k, i - 1) || !is_smooth(k, i + 1) || !is_smooth(k - 1, i) ||
          !is_smooth(k + 1, i)) {
        continue;
      }
      worst = std::max(worst, std::fabs(residual[static_cast<std::size_t>(k) * g.n + i]));
      ++used;
    }
  }
  return {worst, used};
}

void refresh_diagnostics(PeriodicSolution& w) {
  const int m = static_cast<int>(w.slices.size());
  const Grid g = w.slices.at(0).grid;
  w.amplitude = 0.0;
  const int i0 = g.nearest(w.x0);
  for (int i = 0; i < g.n; ++i) {
    double lo = w.closing.values[i];
    double hi = lo;
    bool skip = w.closing.capped(i);
    for (int k = 0; k < m; ++k) {
      skip = skip || w.slices[k].capped(i);
      lo = std::min(lo, w.slices[k].values[i]);
      hi = std::max(hi, w.slices[k].values[i]);
    }
    if (skip) continue;
    w.amplitude = std::max(w.amplitude, hi - lo);
    if (i == i0) w.amplitude_at_x0 = hi - lo;
  }
  w.period_residual = sup_distance(w.closing, w.slices[0]);
  if (w.model) {
    const auto [r, used] = upwind_pde_residual(*w.model, w);
    w.pde_residual = r;
    w.pde_nodes = used;
  }
}

PeriodicSolution pinned_periodic_limit(const HamiltonianModel& model, const OrbitResult& orbit, double x0,
                                       const PeriodicOptions& options) {
  const Grid grid = Grid::make(options.n);
  const double period = orbit.period_T;
  const SubsolutionSpec spec = build_subsolution(model, orbit, x0);
  const LaxOleinikScheme scheme(model, grid, period_aligned_scheme(model, grid, period, options));

  PeriodicSolution out;
  out.x0 = grid.x(grid.nearest(x0));
  out.epsilon = spec.epsilon;
  out.model = std::make_shared<const HamiltonianModel>(model);
  const Field pinned = Field::pinned(grid, out.x0, orbit.u0_at(out.x0), scheme.options().u_cap);
  const Field reference = Field::from_function(grid, [&](double x) { return orbit.u0_at(x); });
  const Field limit = iterate_period_map(scheme, pinned, period, reference, options, out);
  record_period(scheme, limit, period, options, out);
  refresh_diagnostics(out);
  if (out.amplitude_at_x0 < 0.5 * spec.epsilon) {
    throw Error(ErrorCode::NotNontrivial, "oscillation at x0 is " + std::to_string(out.amplitude_at_x0) +
                                              ", below half the subsolution amplitude " +
                                              std::to_string(spec.epsilon));
  }
  return out;
}

double touch_tolerance(const Field& phi) {
  const Grid g = phi.grid;
  double lip_step = 0.0;
  for (int i = 0; i < g.n; ++i) lip_step = std::max(lip_step, std::fabs(phi.values[g.wrap(i + 1)] - phi.values[i]));
  // 3 h Lip(phi), floored at the accuracy u_+ is computed to.
  return std::max(3.0 * lip_step, 1e-6);
}

PeriodicSolution long_time_periodic_limit(const HamiltonianModel& model, const Field& phi, const Field& u_plus,
                                          const OrbitResult& orbit, const PeriodicOptions& options) {
  const Grid grid = phi.grid;
  const double period = orbit.period_T;
  const double tol_touch = touch_tolerance(phi);
  double min_diff = INFINITY;
  for (int i = 0; i < grid.n; ++i) min_diff = std::min(min_diff, phi.values[i] - u_plus.values[i]);
  if (std::fabs(min_diff) > tol_touch) {
    throw Error(ErrorCode::TouchingViolated, "min(phi - u_+) = " + std::to_string(min_diff) +
                                                 " exceeds the touching tolerance " + std::to_string(tol_touch));
  }
  Field start = phi;
  for (double& v : start.values) v -= min_diff;

  PeriodicSolution out;
  out.touch_shift = -min_diff;
  out.model = std::make_shared<const HamiltonianModel>(model);
  PeriodicOptions o = options;
  o.n = grid.n;
  const LaxOleinikScheme scheme(model, grid, period_aligned_scheme(model, grid, period, o));

  std::vector<std::uint8_t> touching(grid.n, 0);
  int first_touch = -1;
  for (int i = 0; i < grid.n; ++i) {
    if (start.values[i] - u_plus.values[i] <= tol_touch) {
      touching[i] = 1;
      ++out.touching_nodes;
      if (first_touch < 0 || start.values[i] - u_plus.values[i] < start.values[first_touch] - u_plus.values[first_touch]) {
        first_touch = i;
      }
    }
  }
  out.x0 = grid.x(first_touch);

  // Localization: the same datum kept only on a neighbourhood of the touching set.
  Field localized{grid, std::vector<double>(grid.n, scheme.options().u_cap), std::vector<std::uint8_t>(grid.n, 1)};
  const int r = options.localization_radius_cells;
  for (int i = 0; i < grid.n; ++i) {
    if (!touching[i]) continue;
    for (int j = -r; j <= r; ++j) {
      const int k = grid.wrap(i + j);
      localized.values[k] = start.values[k];
      localized.cap_mask[k] = 0;
    }
  }
  const long loc_periods = std::max(1L, std::lround(options.localization_time / period));
  const EvolutionTrace full = evolve(scheme, start, loc_periods * period, 0.0);
  const EvolutionTrace local = evolve(scheme, localized, loc_periods * period, 0.0);
  if (!full.diverged && !local.diverged) out.localization_error = sup_distance(full.final(), local.final());

  const Field limit = iterate_period_map(scheme, start, period, u_plus, o, out);
  record_period(scheme, limit, period, o, out);
  refresh_diagnostics(out);
  return out;
}

PeriodicSolution shift_slices(const PeriodicSolution& w, int k) {
  const int m = static_cast<int>(w.slices.size());
  const int s = ((k % m) + m) % m;
  if (s == 0) return w;
  if (!w.model) throw Error(ErrorCode::InvalidArgument, "shifting slices needs the model they were computed with");
  PeriodicSolution out = w;
  for (int j = 0; j < m; ++j) out.slices[j] = w.slices[(j + s) % m];
  const LaxOleinikScheme scheme(*w.model, w.closing.grid, w.scheme_options);
  out.closing = evolve(scheme, w.closing, s * w.period_T / m, 0.0).final();
  out.before = w.slices[s - 1];
  out.detected_period.reset();
  out.detected_residual.reset();
  refresh_diagnostics(out);
  return out;
}

}  // namespace chj
