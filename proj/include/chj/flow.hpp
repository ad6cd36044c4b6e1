#pragma once

#include <vector>

#include "chj/model.hpp"

namespace chj {

/// A point of the contact phase space. `x` is reduced mod 1; the number of
/// windings is carried next to it in trajectories.
struct ContactState {
  double x = 0.0;
  double p = 0.0;
  double u = 0.0;
};

struct TrajectoryPoint {
  double t = 0.0;
  ContactState state;
  long winding = 0;  ///< lifted position is state.x + winding

  double lifted_x() const { return state.x + static_cast<double>(winding); }
};

/// Classical RK4 on  x' = H_p,  p' = -H_x - H_u p,  u' = H_p p - H.
/// One point per step (the last step is shortened to land on t1).
/// Throws BlowUp when |p| or |u| exceeds 10 * bounds.u_max.
std::vector<TrajectoryPoint> integrate_contact(const HamiltonianModel& model, ContactState s0, double t0,
                                               double t1, double dt, const SearchBounds& bounds = {});

/// Contact system reparametrised by x on [0, 1] (valid while H_p != 0).
struct ReducedSweep {
  std::vector<double> x;
  std::vector<double> t;
  std::vector<double> p;
  std::vector<double> u;
};

inline constexpr double kBMinTol = 1e-6;

/// RK4 in x with `steps` uniform steps. Throws TurningPoint if |H_p| drops
/// below `b_min_tol` at any stage.
ReducedSweep integrate_reduced(const HamiltonianModel& model, double p_start, double u_start, int steps,
                               double b_min_tol = kBMinTol);

struct OrbitOptions {
  int steps = 4096;          ///< RK4 steps of the x-sweep
  int max_newton = 100;
  int max_halvings = 8;
  double residual_tol = 1e-13;
  double fd_step = 1e-7;
  double b_min_tol = kBMinTol;
};

/// The stationary orbit as a graph over the circle, tabulated on a uniform
/// x-grid of `steps + 1` nodes (the last node is x = 1).
struct OrbitResult {
  std::vector<double> x;
  std::vector<double> t;   ///< time along the orbit, t(0) = 0
  std::vector<double> u0;
  std::vector<double> p0;  ///< u0'
  std::vector<double> dp0; ///< u0''
  std::vector<double> B;   ///< H_p along the graph
  std::vector<double> f;   ///< normalised phase, f(0) = 0, f(1) = 2 pi
  double period_T = 0.0;
  double Z = 0.0;
  double h_residual = 0.0;
  double p_start = 0.0;
  double u_start = 0.0;
  double closing_residual = 0.0;
  int newton_iterations = 0;

  int steps() const { return static_cast<int>(x.size()) - 1; }
  /// Piecewise cubic Hermite evaluation; x is taken mod 1 (f is lifted so that
  /// f(x + 1) = f(x) + 2 pi).
  double u0_at(double x) const;
  double p0_at(double x) const;
  double f_at(double x) const;
  double B_at(double x) const;
  /// Time along the orbit at position x in [0, 1].
  double t_at(double x) const;
  double min_abs_B() const;
};

/// Damped Newton on (p(1) - p(0), u(1) - u(0)) with a finite-difference
/// Jacobian. Throws NotConverged or TurningPoint.
OrbitResult shoot_stationary_orbit(const HamiltonianModel& model, double p_guess = 0.0, double u_guess = 0.0,
                                   const OrbitOptions& options = {});

struct ConditionA {
  bool holds = false;
  double min_abs_B = 0.0;
};

ConditionA check_condition_A(const OrbitResult& orbit, double b_min_tol = kBMinTol);

}  // namespace chj
