#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "chj/error.hpp"
#include "chj/periodic.hpp"

namespace chj {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double SubsolutionSpec::phase(double x, double t) const {
  return -0.5 * std::numbers::pi + orbit->f_at(x) - orbit->f_at(x0) + kTwoPi * t / Z;
}

double SubsolutionSpec::operator()(double x, double t) const {
  return orbit->u0_at(x) + epsilon + epsilon * std::sin(phase(x, t));
}

SubsolutionSpec build_subsolution(const HamiltonianModel& model, const OrbitResult& orbit, double x0,
                                  const SubsolutionOptions& options) {
  const ConditionA a = check_condition_A(orbit);
  if (!a.holds) {
    throw Error(ErrorCode::AssumptionViolated,
                "condition (A) fails on the orbit: min |B| = " + std::to_string(a.min_abs_B));
  }
  // The p-arguments of the averaged Hessian stay within u0' +- eps |F_x|,
  // and eps <= 1, |F_x| = |f'| <= 2 pi / (|t(1)| min |B|).
  const double max_fprime = kTwoPi / (orbit.period_T * a.min_abs_B);
  const double s_range = kTwoPi * max_fprime;
  double hess_max = -INFINITY;
  double hess_min = INFINITY;
  for (int i = 0; i < options.x_samples; ++i) {
    const double x = static_cast<double>(i) / options.x_samples;
    const double p0 = orbit.p0_at(x);
    const double u0 = orbit.u0_at(x);
    for (int j = 0; j < options.s_samples; ++j) {
      const double s = -s_range + 2.0 * s_range * j / (options.s_samples - 1);
      const double d = model.d_pp(x, p0 + s, u0);
      hess_max = std::max(hess_max, d);
      hess_min = std::min(hess_min, d);
    }
  }
  // Exact factor int_0^1 s ds = 1/2 of the averaged Hessian.
  double M0 = 0.5 * std::fabs(hess_max);
  if (hess_max - hess_min > 1e-12 * std::fabs(hess_max)) M0 *= options.safety;

  double min_B2 = INFINITY;
  for (double b : orbit.B) min_B2 = std::min(min_B2, b * b);

  SubsolutionSpec spec;
  spec.x0 = x0 - std::floor(x0);
  spec.M0 = M0;
  spec.Z = orbit.Z;
  spec.delta = model.delta;
  spec.min_B_squared = min_B2;
  spec.epsilon = std::min(0.5 * model.delta * orbit.Z * orbit.Z / (kTwoPi * kTwoPi * M0) * min_B2, 1.0);
  spec.orbit = std::make_shared<const OrbitResult>(orbit);
  if (!(spec.epsilon >= 1e-10)) {
    throw Error(ErrorCode::EpsilonUnderflow, "subsolution amplitude " + std::to_string(spec.epsilon) + " too small");
  }
  return spec;
}

double subsolution_residual(const HamiltonianModel& model, const SubsolutionSpec& spec, double x, double t,
                            double fd_step) {
  const double w = spec(x, t);
  const double w_t = (spec(x, t + fd_step) - spec(x, t - fd_step)) / (2.0 * fd_step);
  const double w_x = (spec(x + fd_step, t) - spec(x - fd_step, t)) / (2.0 * fd_step);
  return w_t + model.eval_H(x, w_x, w);
}

double verify_subsolution(const HamiltonianModel& model, const SubsolutionSpec& spec, const Grid& grid,
                          int t_samples, double fd_step) {
  const double period = std::fabs(spec.Z);
  double worst = -INFINITY;
  for (int k = 0; k < t_samples; ++k) {
    const double t = period * k / t_samples;
    for (int i = 0; i < grid.n; ++i) worst = std::max(worst, subsolution_residual(model, spec, grid.x(i), t, fd_step));
  }
  return worst;
}

}  // namespace chj
