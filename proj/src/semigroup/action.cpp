#include <algorithm>
#include <cmath>
#include <string>

#include "chj/error.hpp"
#include "chj/semigroup.hpp"

namespace chj {

namespace {

/// The flow of -H is the contact flow of H run backwards in time.
HamiltonianModel reversed(const HamiltonianModel& m) {
  HamiltonianModel r = m;
  r.name = "reversed(" + m.name + ")";
  r.eval_H = [h = m.eval_H](double x, double p, double u) { return -h(x, p, u); };
  r.d_p = [f = m.d_p](double x, double p, double u) { return -f(x, p, u); };
  r.d_x = [f = m.d_x](double x, double p, double u) { return -f(x, p, u); };
  r.d_u = [f = m.d_u](double x, double p, double u) { return -f(x, p, u); };
  r.d_pp = [f = m.d_pp](double x, double p, double u) { return -f(x, p, u); };
  r.quadratic.reset();
  return r;
}

struct Landing {
  bool valid = false;
  double offset = 0.0;  ///< lifted final position minus the target
  double u = 0.0;
};

}  // namespace

Field action_field(const HamiltonianModel& model, const Grid& grid, double x0, double u0, double t,
                   ActionDirection direction, const SchemeOptions& options) {
  if (!(t >= 10.0 * options.dt * (1.0 - 1e-12))) {
    throw Error(ErrorCode::InvalidArgument, "action functions need t >= 10 dt on the grid");
  }
  if (direction == ActionDirection::forward) {
    const EvolutionTrace tr = evolve(model, Field::pinned(grid, x0, u0, options.u_cap), t, 0.0, options);
    if (tr.diverged) throw Error(ErrorCode::CapTooSmall, "pinned evolution reached the cap");
    return tr.final();
  }
  // h^{x0,u0} = T^+_t of data pinned at -infinity, i.e. minus the conjugate
  // backward evolution of data pinned at +infinity.
  const EvolutionTrace tr =
      evolve(model.conjugate(), Field::pinned(grid, x0, -u0, options.u_cap), t, 0.0, options);
  if (tr.diverged) throw Error(ErrorCode::CapTooSmall, "pinned evolution reached the cap");
  return -tr.final();
}

ActionResult action_function(const HamiltonianModel& model, const Grid& grid, double x0, double u0, double x,
                             double t, ActionDirection direction, const SchemeOptions& options, bool with_shooting,
                             const ShootingOptions& shooting) {
  const Field f = action_field(model, grid, x0, u0, t, direction, options);
  const int i = grid.nearest(x);
  const double value = f.values[i];
  if (f.capped(i) || std::fabs(value) >= 0.99 * options.u_cap) {
    throw Error(ErrorCode::CapTooSmall, "action value is at the cap; raise the cap or the time");
  }
  ActionResult r;
  r.x0 = grid.x(grid.nearest(x0));
  r.u0 = u0;
  r.x = grid.x(i);
  r.t = t;
  r.value = value;
  r.method = ActionMethod::grid;
  r.cap_used = options.u_cap;
  if (with_shooting) {
    r.shooting_value = action_by_shooting(model, r.x0, u0, r.x, t, direction, shooting, options.bounds);
  }
  return r;
}

double action_by_shooting(const HamiltonianModel& model, double x0, double u0, double x, double t,
                          ActionDirection direction, const ShootingOptions& options, const SearchBounds& bounds) {
  if (options.p_samples < 2) throw Error(ErrorCode::InvalidArgument, "need at least two p samples");
  const HamiltonianModel flow_model = direction == ActionDirection::forward ? model : reversed(model);
  const double target = x - std::floor(x);

  auto shoot = [&](double p) -> Landing {
    try {
      const auto traj = integrate_contact(flow_model, {x0, p, u0}, 0.0, t, options.dt, bounds);
      return {true, traj.back().lifted_x() - target, traj.back().state.u};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::BlowUp) return {};
      throw;
    }
  };

  std::vector<double> ps(options.p_samples);
  std::vector<Landing> land(options.p_samples);
  for (int k = 0; k < options.p_samples; ++k) {
    ps[k] = -bounds.p_max + 2.0 * bounds.p_max * k / (options.p_samples - 1);
    land[k] = shoot(ps[k]);
  }

  bool found = false;
  double best = direction == ActionDirection::forward ? INFINITY : -INFINITY;
  auto consider = [&](double u) {
    found = true;
    best = direction == ActionDirection::forward ? std::min(best, u) : std::max(best, u);
  };
  for (int k = 0; k + 1 < options.p_samples; ++k) {
    if (!land[k].valid || !land[k + 1].valid) continue;
    const double a = land[k].offset;
    const double b = land[k + 1].offset;
    const long lo = static_cast<long>(std::ceil(std::min(a, b)));
    const long hi = static_cast<long>(std::floor(std::max(a, b)));
    for (long w = lo; w <= hi; ++w) {
      // Bisection on offset(p) = w between the two samples.
      double pa = ps[k];
      double pb = ps[k + 1];
      double fa = a - w;
      Landing mid = land[k];
      if (fa == 0.0) {
        consider(land[k].u);
        continue;
      }
      bool ok = true;
      for (int it = 0; it < options.refine_iterations; ++it) {
        const double pm = 0.5 * (pa + pb);
        mid = shoot(pm);
        if (!mid.valid) {
          ok = false;
          break;
        }
        const double fm = mid.offset - w;
        if ((fm < 0.0) == (fa < 0.0)) {
          pa = pm;
          fa = fm;
        } else {
          pb = pm;
        }
      }
      if (ok) consider(mid.u);
    }
  }
  if (!found) throw Error(ErrorCode::NoTrajectoryLanded, "no characteristic reached the target; refine p sampling");
  return best;
}

double solve_reversibility(const HamiltonianModel& model, const Grid& grid, double x0, double x, double t,
                           double target_u, const SchemeOptions& options, double tol) {
  const double u_max = options.bounds.u_max;
  // residual(u0) = h_{x0,u0}(x,t) - target; +inf when the cap binds.
  auto residual = [&](double u0) -> double {
    try {
      return action_function(model, grid, x0, u0, x, t, ActionDirection::forward, options).value - target_u;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::CapTooSmall) return u0 > target_u ? INFINITY : -INFINITY;
      throw;
    }
  };
  double lo = target_u - 1.0;
  double hi = target_u + 1.0;
  double f_lo = residual(lo);
  while (f_lo > 0.0) {
    if (lo <= -u_max) throw Error(ErrorCode::BracketFail, "no lower bracket for the reversibility solve");
    lo = std::max(-u_max, target_u - 2.0 * (target_u - lo));
    f_lo = residual(lo);
  }
  double f_hi = residual(hi);
  while (f_hi < 0.0) {
    if (hi >= u_max) throw Error(ErrorCode::BracketFail, "no upper bracket for the reversibility solve");
    hi = std::min(u_max, target_u + 2.0 * (hi - target_u));
    f_hi = residual(hi);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f = residual(mid);
    if (std::fabs(f) <= tol || hi - lo < 1e-14) return mid;
    if (f < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace chj
