#pragma once

#include <functional>
#include <optional>
#include <string>

#include "chj/expression.hpp"

namespace chj {

/// Compact search window standing in for the whole real line.
struct SearchBounds {
  double p_max = 10.0;
  double v_max = 10.0;
  double u_max = 50.0;
};

/// A periodic coefficient with its exact x-derivative.
struct Coefficient {
  std::function<double(double)> value;
  std::function<double(double)> derivative;

  static Coefficient constant(double c);
  static Coefficient cosine(double amplitude, double phase = 0.0);
  static Coefficient from_expression(const Expression& expr);
};

/// Coefficients of the built-in family
///   H = 1/2 a(x) (p + b(x))^2 + V(x) - 1/2 a(x) b(x)^2 - lambda u,
/// whose Lagrangian is (v - a b)^2 / (2a) - V + lambda u.
struct QuadraticCoefficients {
  Coefficient a;
  Coefficient b;
  Coefficient potential;
  double lambda = 0.0;
};

struct LagrangePoint {
  double value;
  double p_star;
};

using PhaseFunction = std::function<double(double x, double p, double u)>;

/// A contact Hamiltonian H(x, p, u) on the circle (x taken mod 1) with its
/// partial derivatives and the (H4) bounds. All callables are pure.
struct HamiltonianModel {
  std::string name;
  PhaseFunction eval_H;
  PhaseFunction d_p;
  PhaseFunction d_x;
  PhaseFunction d_u;
  PhaseFunction d_pp;
  double kappa = 1.0;
  double delta = 1.0;
  double lambda_param = 0.0;
  std::optional<QuadraticCoefficients> quadratic;

  /// Closed-form Legendre dual, only for the quadratic family.
  std::optional<LagrangePoint> closed_form_L(double x, double v, double u) const;

  /// H(x, -p, -u): the conjugate used to realise the forward semigroup.
  /// Increasing in u whenever this model is decreasing.
  HamiltonianModel conjugate() const;

  /// H(x, p, 0) with the u-dependence removed (classical Hamiltonian).
  HamiltonianModel frozen() const;

  /// Same model with a constant subtracted from H.
  HamiltonianModel shifted(double c) const;
};

/// Builds the quadratic family member. Derivatives are analytic.
/// Throws NonPositiveA if a(x) <= 0 at any of `a_samples` sample points.
HamiltonianModel make_quadratic_model(const Coefficient& a, const Coefficient& b,
                                      const Coefficient& potential, double lambda,
                                      std::optional<double> kappa = std::nullopt,
                                      std::optional<double> delta = std::nullopt,
                                      std::string name = "quadratic", int a_samples = 1024);

/// CD(b, lambda): a = 1, constant drift b, no potential.
HamiltonianModel make_constant_drift(double b, double lambda);
/// CDV(b, v0, lambda): CD plus V = v0 cos(2 pi x).
HamiltonianModel make_constant_drift_with_potential(double b, double v0, double lambda);

/// sup_p { v p - H(x, p, u) } by safeguarded Newton on d_p(x, p, u) = v.
/// Throws NoBracket when the root is not enclosed in [-p_max, p_max].
LagrangePoint legendre_transform(const HamiltonianModel& model, double x, double v, double u,
                                 const SearchBounds& bounds = {});

/// L(x, v, u): closed form when available, numeric transform otherwise.
double lagrangian(const HamiltonianModel& model, double x, double v, double u,
                  const SearchBounds& bounds = {});

struct SamplingSpec {
  int nx = 16;
  int np = 16;
  int nu = 8;
  SearchBounds bounds;

  int count() const { return nx * np * nu; }
};

struct AssumptionReport {
  bool h1_ok = false;
  bool h4_ok = false;
  bool condition_C_ok = false;
  /// min sampled d_pp
  double h1_margin = 0.0;
  /// min sampled -d_u (the effective delta)
  double h4_delta_margin = 0.0;
  /// max sampled -d_u (the effective kappa)
  double h4_kappa_observed = 0.0;
  /// max over x of min_p H(x, p, 0); condition (C) needs it negative
  double condition_C_margin = 0.0;
  /// x where condition_C_margin is attained
  double condition_C_worst_x = 0.0;
  /// the minimiser of H(x, ., 0) hit the p window boundary somewhere
  bool c_hit_boundary = false;
  int sample_count = 0;

  bool all_ok() const { return h1_ok && h4_ok && condition_C_ok; }
};

/// Runtime check of (H1), (H4) and (C) on a sample grid. Never throws for a
/// failed assumption; the report says which one failed.
AssumptionReport check_assumptions(const HamiltonianModel& model, const SamplingSpec& samples = {});

struct CriticalValueOptions {
  int n = 256;
  double T = 40.0;
  double dt = 0.0;  ///< 0 selects the largest admissible step
  double slope_tol = 1e-3;
  SearchBounds bounds;
};

struct CriticalValueEstimate {
  double c = 0.0;
  double c_short_window = 0.0;
  double disagreement = 0.0;
};

/// Critical value of the frozen Hamiltonian H(x, p, 0) from the long-time
/// slope of min_x of the classical Lax-Oleinik evolution of 0.
/// Throws NotConverged if the two window estimates disagree beyond slope_tol.
CriticalValueEstimate estimate_critical_value(const HamiltonianModel& model,
                                              const CriticalValueOptions& options = {});

}  // namespace chj
