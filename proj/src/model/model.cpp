#include <cmath>
#include <numbers>

#include "chj/error.hpp"
#include "chj/model.hpp"

namespace chj {

namespace {

double wrap01(double x) {
  const double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

}  // namespace

Coefficient Coefficient::constant(double c) {
  return {[c](double) { return c; }, [](double) { return 0.0; }};
}

Coefficient Coefficient::cosine(double amplitude, double phase) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  return {[=](double x) { return amplitude * std::cos(two_pi * x + phase); },
          [=](double x) { return -two_pi * amplitude * std::sin(two_pi * x + phase); }};
}

Coefficient Coefficient::from_expression(const Expression& expr) {
  return {[expr](double x) { return expr(wrap01(x)); },
          [expr](double x) { return expr.derivative(wrap01(x)); }};
}

std::optional<LagrangePoint> HamiltonianModel::closed_form_L(double x, double v, double u) const {
  if (!quadratic) return std::nullopt;
  const double a = quadratic->a.value(x);
  const double b = quadratic->b.value(x);
  const double drift = v - a * b;
  return LagrangePoint{drift * drift / (2.0 * a) - quadratic->potential.value(x) + quadratic->lambda * u,
                       v / a - b};
}

HamiltonianModel make_quadratic_model(const Coefficient& a, const Coefficient& b,
                                      const Coefficient& potential, double lambda,
                                      std::optional<double> kappa, std::optional<double> delta,
                                      std::string name, int a_samples) {
  for (int i = 0; i < a_samples; ++i) {
    const double x = static_cast<double>(i) / a_samples;
    const double ax = a.value(x);
    if (!(ax > 0.0)) {
      throw Error(ErrorCode::NonPositiveA,
                  "a(x) = " + std::to_string(ax) + " at x = " + std::to_string(x));
    }
  }

  HamiltonianModel m;
  m.name = std::move(name);
  m.eval_H = [=](double x, double p, double u) {
    const double ax = a.value(x);
    const double bx = b.value(x);
    const double q = p + bx;
    return 0.5 * ax * q * q + potential.value(x) - 0.5 * ax * bx * bx - lambda * u;
  };
  m.d_p = [=](double x, double p, double) { return a.value(x) * (p + b.value(x)); };
  m.d_pp = [=](double x, double, double) { return a.value(x); };
  m.d_u = [=](double, double, double) { return -lambda; };
  m.d_x = [=](double x, double p, double) {
    const double ax = a.value(x);
    const double dax = a.derivative(x);
    const double bx = b.value(x);
    const double dbx = b.derivative(x);
    const double q = p + bx;
    return 0.5 * dax * q * q + ax * q * dbx + potential.derivative(x) - 0.5 * dax * bx * bx -
           ax * bx * dbx;
  };
  m.kappa = kappa.value_or(std::abs(lambda));
  m.delta = delta.value_or(std::abs(lambda));
  m.lambda_param = lambda;
  m.quadratic = QuadraticCoefficients{a, b, potential, lambda};
  return m;
}

HamiltonianModel make_constant_drift(double b, double lambda) {
  return make_quadratic_model(Coefficient::constant(1.0), Coefficient::constant(b),
                              Coefficient::constant(0.0), lambda, std::nullopt, std::nullopt,
                              "CD(" + std::to_string(b) + "," + std::to_string(lambda) + ")");
}

HamiltonianModel make_constant_drift_with_potential(double b, double v0, double lambda) {
  return make_quadratic_model(Coefficient::constant(1.0), Coefficient::constant(b),
                              Coefficient::cosine(v0), lambda, std::nullopt, std::nullopt,
                              "CDV(" + std::to_string(b) + "," + std::to_string(v0) + "," +
                                  std::to_string(lambda) + ")");
}

HamiltonianModel HamiltonianModel::conjugate() const {
  if (quadratic) {
    const Coefficient b = quadratic->b;
    Coefficient neg_b{[b](double x) { return -b.value(x); }, [b](double x) { return -b.derivative(x); }};
    return make_quadratic_model(quadratic->a, neg_b, quadratic->potential, -quadratic->lambda, kappa,
                                delta, "conj(" + name + ")");
  }
  HamiltonianModel m = *this;
  const HamiltonianModel base = *this;
  m.name = "conj(" + name + ")";
  m.eval_H = [base](double x, double p, double u) { return base.eval_H(x, -p, -u); };
  m.d_p = [base](double x, double p, double u) { return -base.d_p(x, -p, -u); };
  m.d_x = [base](double x, double p, double u) { return base.d_x(x, -p, -u); };
  m.d_u = [base](double x, double p, double u) { return -base.d_u(x, -p, -u); };
  m.d_pp = [base](double x, double p, double u) { return base.d_pp(x, -p, -u); };
  m.lambda_param = -lambda_param;
  return m;
}

HamiltonianModel HamiltonianModel::frozen() const {
  if (quadratic) {
    return make_quadratic_model(quadratic->a, quadratic->b, quadratic->potential, 0.0, kappa, delta,
                                "frozen(" + name + ")");
  }
  HamiltonianModel m = *this;
  const HamiltonianModel base = *this;
  m.name = "frozen(" + name + ")";
  m.eval_H = [base](double x, double p, double) { return base.eval_H(x, p, 0.0); };
  m.d_p = [base](double x, double p, double) { return base.d_p(x, p, 0.0); };
  m.d_x = [base](double x, double p, double) { return base.d_x(x, p, 0.0); };
  m.d_u = [](double, double, double) { return 0.0; };
  m.d_pp = [base](double x, double p, double) { return base.d_pp(x, p, 0.0); };
  m.lambda_param = 0.0;
  return m;
}

HamiltonianModel HamiltonianModel::shifted(double c) const {
  if (quadratic) {
    const Coefficient v = quadratic->potential;
    Coefficient shifted_v{[v, c](double x) { return v.value(x) - c; }, v.derivative};
    return make_quadratic_model(quadratic->a, quadratic->b, shifted_v, quadratic->lambda, kappa, delta,
                                name);
  }
  HamiltonianModel m = *this;
  const PhaseFunction h = eval_H;
  m.eval_H = [h, c](double x, double p, double u) { return h(x, p, u) - c; };
  return m;
}

}  // namespace chj
