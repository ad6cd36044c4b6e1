#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chj/error.hpp"
#include "chj/flow.hpp"

namespace chj {

namespace {

struct Residual {
  double rp;
  double ru;
  double norm() const { return std::hypot(rp, ru); }
};

Residual closing_residual(const HamiltonianModel& model, double p, double u, const OrbitOptions& o) {
  const ReducedSweep s = integrate_reduced(model, p, u, o.steps, o.b_min_tol);
  return {s.p.back() - p, s.u.back() - u};
}

struct Cell {
  int k;
  double s;
  double h;
};

Cell locate(const std::vector<double>& table, double x) {
  const int n = static_cast<int>(table.size()) - 1;
  const double pos = x * n;
  int k = static_cast<int>(std::floor(pos));
  k = std::clamp(k, 0, n - 1);
  return {k, pos - k, 1.0 / n};
}

double hermite(const std::vector<double>& y, const std::vector<double>& slope, double x) {
  const Cell c = locate(y, x);
  const double s = c.s;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1;
  const double h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2;
  const double h11 = s3 - s2;
  return h00 * y[c.k] + h10 * c.h * slope[c.k] + h01 * y[c.k + 1] + h11 * c.h * slope[c.k + 1];
}

double wrap(double x) {
  const double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

}  // namespace

double OrbitResult::u0_at(double xq) const { return hermite(u0, p0, wrap(xq)); }
double OrbitResult::p0_at(double xq) const { return hermite(p0, dp0, wrap(xq)); }

double OrbitResult::t_at(double xq) const {
  return f_at(std::clamp(xq, 0.0, 1.0)) * t.back() / (2.0 * std::numbers::pi);
}

double OrbitResult::f_at(double xq) const {
  const double w = std::floor(xq);
  const double r = xq - w;
  const Cell c = locate(f, r);
  const double s = c.s;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double scale = 2.0 * std::numbers::pi / t.back();
  const double m0 = scale / B[c.k];
  const double m1 = scale / B[c.k + 1];
  const double v = (2 * s3 - 3 * s2 + 1) * f[c.k] + (s3 - 2 * s2 + s) * c.h * m0 + (-2 * s3 + 3 * s2) * f[c.k + 1] +
                   (s3 - s2) * c.h * m1;
  return v + 2.0 * std::numbers::pi * w;
}

double OrbitResult::B_at(double xq) const {
  const Cell c = locate(B, wrap(xq));
  return B[c.k] + c.s * (B[c.k + 1] - B[c.k]);
}

double OrbitResult::min_abs_B() const {
  double m = INFINITY;
  for (double b : B) m = std::min(m, std::fabs(b));
  return m;
}

OrbitResult shoot_stationary_orbit(const HamiltonianModel& model, double p_guess, double u_guess,
                                   const OrbitOptions& o) {
  double p = p_guess;
  double u = u_guess;
  Residual r = closing_residual(model, p, u, o);
  int iterations = 0;
  // A stall below this level is round-off in the sweep, not a failure.
  constexpr double stall_accept = 1e-10;
  while (r.norm() > o.residual_tol) {
    if (iterations >= o.max_newton) {
      throw Error(ErrorCode::NotConverged, "orbit shooting did not converge in " + std::to_string(o.max_newton) +
                                               " Newton steps (residual " + std::to_string(r.norm()) + ")");
    }
    ++iterations;
    const double hp = o.fd_step * std::max(1.0, std::fabs(p));
    const double hu = o.fd_step * std::max(1.0, std::fabs(u));
    const Residual rp = closing_residual(model, p + hp, u, o);
    const Residual ru = closing_residual(model, p, u + hu, o);
    const double j11 = (rp.rp - r.rp) / hp;
    const double j21 = (rp.ru - r.ru) / hp;
    const double j12 = (ru.rp - r.rp) / hu;
    const double j22 = (ru.ru - r.ru) / hu;
    const double det = j11 * j22 - j12 * j21;
    if (!(std::fabs(det) > 0.0) || !std::isfinite(det)) {
      throw Error(ErrorCode::NotConverged, "singular Jacobian in orbit shooting");
    }
    const double dp = -(j22 * r.rp - j12 * r.ru) / det;
    const double du = -(-j21 * r.rp + j11 * r.ru) / det;

    double step = 1.0;
    bool accepted = false;
    for (int halving = 0; halving <= o.max_halvings; ++halving, step *= 0.5) {
      try {
        const Residual trial = closing_residual(model, p + step * dp, u + step * du, o);
        if (trial.norm() < r.norm()) {
          p += step * dp;
          u += step * du;
          r = trial;
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TurningPoint && e.code() != ErrorCode::BlowUp) throw;
      }
    }
    if (!accepted) {
      if (r.norm() <= stall_accept) break;
      throw Error(ErrorCode::NotConverged, "orbit shooting stalled at residual " + std::to_string(r.norm()));
    }
  }

  const ReducedSweep s = integrate_reduced(model, p, u, o.steps, o.b_min_tol);
  OrbitResult orbit;
  orbit.x = s.x;
  orbit.t = s.t;
  orbit.u0 = s.u;
  orbit.p0 = s.p;
  const std::size_t n = s.x.size();
  orbit.dp0.resize(n);
  orbit.B.resize(n);
  orbit.f.resize(n);
  const double t1 = s.t.back();
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = s.x[i];
    const double bi = model.d_p(xi, s.p[i], s.u[i]);
    orbit.B[i] = bi;
    orbit.dp0[i] = (-model.d_x(xi, s.p[i], s.u[i]) - model.d_u(xi, s.p[i], s.u[i]) * s.p[i]) / bi;
    orbit.f[i] = 2.0 * std::numbers::pi * s.t[i] / t1;
    orbit.h_residual = std::max(orbit.h_residual, std::fabs(model.eval_H(xi, s.p[i], s.u[i])));
  }
  orbit.f.back() = 2.0 * std::numbers::pi;
  orbit.period_T = std::fabs(t1);
  orbit.Z = -t1;
  orbit.p_start = p;
  orbit.u_start = u;
  orbit.closing_residual = r.norm();
  orbit.newton_iterations = iterations;
  return orbit;
}

ConditionA check_condition_A(const OrbitResult& orbit, double b_min_tol) {
  const double m = orbit.min_abs_B();
  return {m > b_min_tol, m};
}

}  // namespace chj
