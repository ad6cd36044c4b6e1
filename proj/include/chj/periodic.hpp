#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chj/flow.hpp"
#include "chj/model.hpp"
#include "chj/semigroup.hpp"

namespace chj {

/// The explicit subsolution
///   w(x, t) = u0(x) + eps + eps sin(-pi/2 + f(x) - f(x0) + 2 pi t / Z).
struct SubsolutionSpec {
  double x0 = 0.0;
  double epsilon = 0.0;
  double M0 = 0.0;
  double Z = 0.0;
  double delta = 0.0;
  double min_B_squared = 0.0;
  std::shared_ptr<const OrbitResult> orbit;

  double phase(double x, double t) const;
  double operator()(double x, double t) const;
};

struct SubsolutionOptions {
  int x_samples = 256;
  int s_samples = 33;
  /// Inflation applied to the sampled Hessian bound unless d_pp is constant on the samples.
  double safety = 1.1;
};

/// Throws AssumptionViolated if condition (A) fails, EpsilonUnderflow if eps < 1e-10.
SubsolutionSpec build_subsolution(const HamiltonianModel& model, const OrbitResult& orbit, double x0,
                                  const SubsolutionOptions& options = {});

/// d_t w + H(x, d_x w, w) at one point, derivatives by centred differences.
double subsolution_residual(const HamiltonianModel& model, const SubsolutionSpec& spec, double x, double t,
                            double fd_step = 1e-5);

/// Max of the residual over the grid nodes and `t_samples` times in [0, |Z|).
double verify_subsolution(const HamiltonianModel& model, const SubsolutionSpec& spec, const Grid& grid,
                          int t_samples, double fd_step = 1e-5);

/// One period of a time-periodic grid solution: slices at k T / m for
/// k = 0..m-1, the closing slice at t = T and the slice one step before
/// t = 0 (for centred time differences at the seam).
struct PeriodicSolution {
  std::vector<Field> slices;
  Field closing;
  Field before;
  double period_T = 0.0;
  double amplitude = 0.0;
  double amplitude_at_x0 = 0.0;
  double period_residual = 0.0;
  double pde_residual = 0.0;
  int pde_nodes = 0;  ///< nodes that passed the smoothness filter
  double x0 = 0.0;
  int periods_used = 0;
  std::vector<double> cauchy_history;
  /// Vertical shifts applied by the touching renormalization, one per period.
  std::vector<double> renormalization_shifts;
  std::optional<double> detected_period;
  std::optional<double> detected_residual;
  double epsilon = 0.0;
  /// Long-time limit only: the shift applied to reach touching, the touching
  /// set size and the localization diagnostic.
  double touch_shift = 0.0;
  int touching_nodes = 0;
  std::optional<double> localization_error;
  std::shared_ptr<const HamiltonianModel> model;
  /// Scheme the slices were computed with (used to continue the evolution).
  SchemeOptions scheme_options;

  double slice_time(int k) const { return period_T * k / static_cast<double>(slices.size()); }
};

struct PeriodicOptions {
  int n = 256;
  int slices = 64;
  /// 0 selects n steps per period (then raised until the step is admissible).
  int steps_per_period = 0;
  int n_max = 200;
  double tol = 5e-3;
  bool detect = true;
  /// After each period, shift the iterate so that min(P^n - u_ref) = 0. The
  /// exact limit touches u_0 at every time; the grid drifts off it by O(h)
  /// per period along the unstable constant mode unless feet land on nodes.
  bool renormalize = true;
  int detect_periods = 4;
  /// Localization diagnostic (long-time limit only).
  double localization_time = 5.0;
  int localization_radius_cells = 3;
  SchemeOptions scheme;
};

/// Time step dt = period / steps so that one period is a whole number of steps.
SchemeOptions period_aligned_scheme(const HamiltonianModel& model, const Grid& grid, double period,
                                    const PeriodicOptions& options);

/// Recomputes amplitude, period residual and the upwind residual.
void refresh_diagnostics(PeriodicSolution& w);

/// Godunov upwind residual of d_t w + H(x, d_x w, w) at smooth nodes.
/// Returns (max |residual|, number of nodes used).
std::pair<double, int> upwind_pde_residual(const HamiltonianModel& model, const PeriodicSolution& w);

PeriodicSolution pinned_periodic_limit(const HamiltonianModel& model, const OrbitResult& orbit, double x0,
                                       const PeriodicOptions& options = {});

/// touch_tol = 3 h Lip(phi)
double touch_tolerance(const Field& phi);

PeriodicSolution long_time_periodic_limit(const HamiltonianModel& model, const Field& phi, const Field& u_plus,
                                          const OrbitResult& orbit, const PeriodicOptions& options = {});

PeriodicSolution min_shift_combine(const PeriodicSolution& w, int n);

/// Cyclic shift of the slices by `k` positions (time shift k T / m). The new
/// closing slice is computed by evolving the old one, so the period residual
/// of the result is a genuine check.
PeriodicSolution shift_slices(const PeriodicSolution& w, int k);

struct PeriodEstimate {
  double period = 0.0;
  double residual = 0.0;
};

/// Minimises s -> max_t |trace(t + s) - trace(t)| over [T/2, 3T/2] after
/// discarding the first half of the trace. Throws FlatObjective.
PeriodEstimate detect_period(const EvolutionTrace& trace, double T_hint);

enum class TrichotomyClass { D1_bounded, D2_minus_infinity, D3_plus_infinity };
const char* to_string(TrichotomyClass c) noexcept;

struct TrichotomyOptions {
  double T_budget = 20.0;
  double escape_level = 5.0;
  double snapshot_every = 0.1;
  /// When positive, dt is aligned to this period (steps_per_period per period).
  double period_T = 0.0;
  int steps_per_period = 0;
  SchemeOptions scheme;
};

struct TrichotomyReport {
  TrichotomyClass static_class = TrichotomyClass::D1_bounded;
  TrichotomyClass dynamic_class = TrichotomyClass::D1_bounded;
  bool confirmed = false;  ///< dynamic evidence reached within the budget and agrees
  double bound_K = std::numeric_limits<double>::quiet_NaN();
  double onset_T_phi = std::numeric_limits<double>::quiet_NaN();
  double escape_time = std::numeric_limits<double>::quiet_NaN();
  double min_diff = 0.0;  ///< min (phi - u_+)
  double max_diff = 0.0;  ///< max (phi - u_+)
  double touch_tol = 0.0;

  TrichotomyClass cls() const { return static_class; }
};

TrichotomyReport classify_trichotomy(const HamiltonianModel& model, const Field& phi, const Field& u_plus,
                                     const TrichotomyOptions& options = {});

enum class BifurcationClass { fixed_point, periodic, degenerate };
const char* to_string(BifurcationClass c) noexcept;

struct BifurcationRow {
  double lambda = 0.0;
  BifurcationClass cls = BifurcationClass::degenerate;
  double amplitude = std::numeric_limits<double>::quiet_NaN();
  double period = std::numeric_limits<double>::quiet_NaN();
  double min_abs_B = std::numeric_limits<double>::quiet_NaN();
  double stationarity_residual = std::numeric_limits<double>::quiet_NaN();
  double epsilon = std::numeric_limits<double>::quiet_NaN();
  std::string note;
};

struct BifurcationDiagram {
  std::vector<BifurcationRow> rows;
  double lambda0_estimate = std::numeric_limits<double>::infinity();
};

struct BifurcationOptions {
  PeriodicOptions periodic;
  WeakKamOptions weak_kam;
  /// Negative-lambda rows: stationarity tolerance and time limit.
  double fixed_point_tol = 1e-4;
  double fixed_point_T_max = 200.0;
  double x0 = 0.0;
  double b_min_tol = kBMinTol;
  int jobs = 1;
};

BifurcationDiagram bifurcation_sweep(const std::function<HamiltonianModel(double)>& family,
                                     std::vector<double> lambdas, const BifurcationOptions& options = {});

}  // namespace chj
