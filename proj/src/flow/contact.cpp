#include <array>
#include <cmath>
#include <string>

#include "chj/error.hpp"
#include "chj/flow.hpp"

namespace chj {

namespace {

using Vec3 = std::array<double, 3>;

Vec3 axpy(const Vec3& y, double h, const Vec3& k) { return {y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2]}; }

Vec3 rk4_step(const Vec3& y, double h, auto&& rhs) {
  const Vec3 k1 = rhs(y);
  const Vec3 k2 = rhs(axpy(y, 0.5 * h, k1));
  const Vec3 k3 = rhs(axpy(y, 0.5 * h, k2));
  const Vec3 k4 = rhs(axpy(y, h, k3));
  Vec3 out;
  for (int i = 0; i < 3; ++i) out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return out;
}

}  // namespace

std::vector<TrajectoryPoint> integrate_contact(const HamiltonianModel& model, ContactState s0, double t0,
                                               double t1, double dt, const SearchBounds& bounds) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "integrate_contact needs dt > 0");
  if (!(t1 >= t0)) throw Error(ErrorCode::InvalidArgument, "integrate_contact needs t1 >= t0");

  auto rhs = [&](const Vec3& y) -> Vec3 {
    const double hp = model.d_p(y[0], y[1], y[2]);
    return {hp, -model.d_x(y[0], y[1], y[2]) - model.d_u(y[0], y[1], y[2]) * y[1],
            hp * y[1] - model.eval_H(y[0], y[1], y[2])};
  };

  const double limit = 10.0 * bounds.u_max;
  std::vector<TrajectoryPoint> out;
  const double x0 = s0.x - std::floor(s0.x);
  Vec3 y{x0, s0.p, s0.u};
  out.push_back({t0, {x0, s0.p, s0.u}, 0});
  const long steps = std::max(1L, static_cast<long>(std::ceil((t1 - t0) / dt - 1e-9)));
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (long k = 1; k <= steps; ++k) {
    const double ta = t0 + static_cast<double>(k - 1) * dt;
    const double tb = (k == steps) ? t1 : t0 + static_cast<double>(k) * dt;
    y = rk4_step(y, tb - ta, rhs);
    if (!(std::fabs(y[1]) <= limit && std::fabs(y[2]) <= limit)) {
      throw Error(ErrorCode::BlowUp, "contact trajectory left the window at t = " + std::to_string(tb));
    }
    const double w = std::floor(y[0]);
    out.push_back({tb, {y[0] - w, y[1], y[2]}, static_cast<long>(w)});
  }
  return out;
}

ReducedSweep integrate_reduced(const HamiltonianModel& model, double p_start, double u_start, int steps,
                               double b_min_tol) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "integrate_reduced needs steps >= 1");
  // State (t, p, u) as functions of x.
  double x_now = 0.0;
  auto rhs = [&](const Vec3& y) -> Vec3 {
    const double hp = model.d_p(x_now, y[1], y[2]);
    if (!(std::fabs(hp) >= b_min_tol)) {
      throw Error(ErrorCode::TurningPoint, "|H_p| = " + std::to_string(std::fabs(hp)) +
                                               " below tolerance at x = " + std::to_string(x_now));
    }
    const double inv = 1.0 / hp;
    return {inv, inv * (-model.d_x(x_now, y[1], y[2]) - model.d_u(x_now, y[1], y[2]) * y[1]),
            inv * (hp * y[1] - model.eval_H(x_now, y[1], y[2]))};
  };

  ReducedSweep sweep;
  sweep.x.resize(steps + 1);
  sweep.t.resize(steps + 1);
  sweep.p.resize(steps + 1);
  sweep.u.resize(steps + 1);
  const double h = 1.0 / steps;
  Vec3 y{0.0, p_start, u_start};
  sweep.x[0] = 0.0;
  sweep.t[0] = 0.0;
  sweep.p[0] = p_start;
  sweep.u[0] = u_start;
  for (int k = 0; k < steps; ++k) {
    const double xa = k * h;
    // RK4 with the x-dependence routed through x_now.
    x_now = xa;
    const Vec3 k1 = rhs(y);
    x_now = xa + 0.5 * h;
    const Vec3 k2 = rhs(axpy(y, 0.5 * h, k1));
    const Vec3 k3 = rhs(axpy(y, 0.5 * h, k2));
    x_now = xa + h;
    const Vec3 k4 = rhs(axpy(y, h, k3));
    for (int i = 0; i < 3; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    if (!std::isfinite(y[1]) || !std::isfinite(y[2])) {
      throw Error(ErrorCode::BlowUp, "reduced sweep produced a non-finite state");
    }
    sweep.x[k + 1] = (k + 1 == steps) ? 1.0 : (k + 1) * h;
    sweep.t[k + 1] = y[0];
    sweep.p[k + 1] = y[1];
    sweep.u[k + 1] = y[2];
  }
  // Final check at x = 1 where the closing value is read.
  x_now = 1.0;
  (void)rhs(y);
  return sweep;
}

}  // namespace chj
