#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

#include "chj/error.hpp"
#include "chj/periodic.hpp"

namespace chj {

const char* to_string(BifurcationClass c) noexcept {
  switch (c) {
    case BifurcationClass::fixed_point: return "fixed_point";
    case BifurcationClass::periodic: return "periodic";
    case BifurcationClass::degenerate: return "degenerate";
  }
  return "unknown";
}

namespace {

/// Increasing-in-u members: T_t contracts to its unique fixed point.
void fixed_point_row(const HamiltonianModel& model, const BifurcationOptions& o, BifurcationRow& row) {
  const Grid grid = Grid::make(o.periodic.n);
  SchemeOptions so = o.periodic.scheme;
  so.dt = std::min(so.dt, max_time_step(model, grid, so));
  so.dt = 1.0 / std::ceil(1.0 / so.dt - 1e-9);
  const LaxOleinikScheme scheme(model, grid, so);
  Field current = Field::from_function(grid, [](double x) { return 0.1 * std::cos(2.0 * std::numbers::pi * x); });
  for (double t = 0.0; t < o.fixed_point_T_max; t += 1.0) {
    const EvolutionTrace tr = evolve(scheme, current, 1.0, 1.0 / 16.0);
    double amp = 0.0;
    for (int i = 0; i < grid.n; ++i) {
      double lo = INFINITY;
      double hi = -INFINITY;
      for (const Field& s : tr.snapshots) {
        lo = std::min(lo, s.values[i]);
        hi = std::max(hi, s.values[i]);
      }
      amp = std::max(amp, hi - lo);
    }
    row.stationarity_residual = sup_distance(tr.final(), current);
    row.amplitude = amp;
    current = tr.final();
    if (row.stationarity_residual <= o.fixed_point_tol) {
      row.cls = BifurcationClass::fixed_point;
      return;
    }
  }
  row.cls = BifurcationClass::degenerate;
  row.note = "no stationarity within the time limit";
}

void periodic_row(const HamiltonianModel& model, const BifurcationOptions& o, BifurcationRow& row) {
  const Grid grid = Grid::make(o.periodic.n);
  const WeakKamResult up = weak_kam_forward(model, grid, o.periodic.scheme, o.weak_kam);
  row.stationarity_residual = up.residual;
  OrbitResult orbit;
  try {
    orbit = shoot_stationary_orbit(model, 0.0, 0.0);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TurningPoint) throw;
    row.min_abs_B = 0.0;
    row.cls = BifurcationClass::degenerate;
    row.note = "H_p vanishes on the stationary graph";
    return;
  }
  row.min_abs_B = orbit.min_abs_B();
  if (!(row.min_abs_B > o.b_min_tol)) {
    row.cls = BifurcationClass::degenerate;
    row.note = "condition (A) fails";
    return;
  }
  const PeriodicSolution w = pinned_periodic_limit(model, orbit, o.x0, o.periodic);
  row.amplitude = w.amplitude_at_x0;
  row.period = w.detected_period.value_or(w.period_T);
  row.epsilon = w.epsilon;
  row.cls = BifurcationClass::periodic;
}

}  // namespace

BifurcationDiagram bifurcation_sweep(const std::function<HamiltonianModel(double)>& family,
                                     std::vector<double> lambdas, const BifurcationOptions& options) {
  std::sort(lambdas.begin(), lambdas.end());
  BifurcationDiagram diagram;
  diagram.rows.resize(lambdas.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < lambdas.size(); k = next++) {
      BifurcationRow& row = diagram.rows[k];
      row.lambda = lambdas[k];
      try {
        if (row.lambda == 0.0) {
          row.cls = BifurcationClass::degenerate;
          row.note = "classical case";
          continue;
        }
        const HamiltonianModel model = family(row.lambda);
        if (row.lambda < 0.0) {
          try {
            row.min_abs_B = shoot_stationary_orbit(model, 0.0, 0.0).min_abs_B();
          } catch (const Error& e) {
            if (e.code() != ErrorCode::TurningPoint && e.code() != ErrorCode::NotConverged) throw;
          }
          fixed_point_row(model, options, row);
        } else {
          periodic_row(model, options, row);
        }
      } catch (const std::exception& e) {
        row.cls = BifurcationClass::degenerate;
        row.note = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(lambdas.size())));
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  double last_ok = 0.0;
  for (const BifurcationRow& row : diagram.rows) {
    if (row.lambda <= 0.0) continue;
    if (row.min_abs_B > options.b_min_tol) {
      last_ok = row.lambda;
    } else if (!std::isnan(row.min_abs_B)) {
      diagram.lambda0_estimate = 0.5 * (last_ok + row.lambda);
      break;
    }
  }
  return diagram;
}

}  // namespace chj
