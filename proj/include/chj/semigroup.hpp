#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chj/flow.hpp"
#include "chj/model.hpp"
#include "chj/simd/lax_oleinik_kernel.hpp"

namespace chj {

/// Uniform periodic grid x_i = i h on the unit circle.
struct Grid {
  int n = 256;

  /// Validates n (a power of two, at least 64).
  static Grid make(int n);
  double h() const { return 1.0 / n; }
  double x(int i) const { return static_cast<double>(i) / n; }
  int wrap(long i) const;
  int nearest(double x) const;
};

/// A grid function. Nodes flagged in `cap_mask` stand for +infinity and hold
/// exactly the cap value; they are ignored by the norms below.
struct Field {
  Grid grid;
  std::vector<double> values;
  std::vector<std::uint8_t> cap_mask;  ///< empty when the field has no capped nodes

  static Field constant(Grid grid, double value);
  static Field from_function(Grid grid, const std::function<double(double)>& f);
  /// value at node nearest to x0, cap everywhere else
  static Field pinned(Grid grid, double x0, double value, double cap);

  bool has_mask() const { return !cap_mask.empty(); }
  bool capped(int i) const { return has_mask() && cap_mask[i] != 0; }
  int size() const { return grid.n; }
  double sup_norm() const;
  double min() const;
  double max() const;
  int free_count() const;
  Field operator-() const;
};

/// sup over nodes free in both fields
double sup_distance(const Field& a, const Field& b);

struct SchemeOptions {
  double dt = 1e-3;
  SearchBounds bounds;
  double u_cap = 50.0;
  int velocity_samples = 129;
  /// Largest foot displacement V_max dt allowed, in cells.
  double max_foot_cells = 16.0;
  double golden_tol = 1e-10;
  double inner_tol = 1e-12;
  int inner_max = 200;
  simd::Backend backend = simd::Backend::automatic;
  /// Use the model callbacks even when a closed-form Lagrangian exists.
  bool force_generic = false;
};

/// One step of the semi-Lagrangian Lax-Oleinik scheme for a fixed model,
/// grid and time step. Immutable after construction, safe to share.
class LaxOleinikScheme {
 public:
  LaxOleinikScheme(HamiltonianModel model, Grid grid, SchemeOptions options);

  Field step(const Field& phi) const;
  const Grid& grid() const { return grid_; }
  const SchemeOptions& options() const { return options_; }
  const HamiltonianModel& model() const { return model_; }
  simd::Backend backend() const { return backend_; }
  bool uses_fast_path() const { return fast_; }

 private:
  void step_fast(const std::vector<double>& ext, std::vector<double>& out) const;
  void step_generic(const std::vector<double>& ext, std::vector<double>& out) const;

  HamiltonianModel model_;
  Grid grid_;
  SchemeOptions options_;
  simd::Backend backend_;
  bool fast_ = false;
  int pad_ = 0;
  double lambda_ = 0.0;
  std::vector<double> velocities_;
  double spacing_ = 0.0;
  int golden_iterations_ = 0;
  simd::QuadraticNodeTable table_;
};

/// Largest admissible time step for the options' bounds.
double max_time_step(const HamiltonianModel& model, const Grid& grid, const SchemeOptions& options);

Field lax_oleinik_step(const HamiltonianModel& model, const Field& phi, const SchemeOptions& options);

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<Field> snapshots;
  std::string model_name;
  double dt = 0.0;
  bool diverged = false;
  double diverged_at = 0.0;

  const Field& final() const { return snapshots.back(); }
};

/// T_t phi (backward semigroup) for t in [0, T]. Snapshots every
/// `snapshot_every` (rounded to whole steps; 0 keeps only the endpoints).
/// Stops early and sets `diverged` once the free sup-norm exceeds u_cap / 2.
EvolutionTrace evolve(const HamiltonianModel& model, const Field& phi, double T, double snapshot_every,
                      const SchemeOptions& options);
EvolutionTrace evolve(const LaxOleinikScheme& scheme, const Field& phi, double T, double snapshot_every);

/// T^+_t phi computed as -T_t(-phi) for the conjugate model H(x, -p, -u).
EvolutionTrace evolve_forward(const HamiltonianModel& model, const Field& phi, double T, double snapshot_every,
                              const SchemeOptions& options);

struct WeakKamOptions {
  double tol = 1e-6;
  double T_max = 200.0;
  double check_every = 1.0;
};

struct WeakKamResult {
  Field u;
  double residual = 0.0;  ///< sup distance of the two snapshots that decided
  double time = 0.0;
  bool converged = false;
  bool diverged = false;
};

/// u_+ as the limit of T^+_t 0. Throws NotConverged at T_max.
WeakKamResult weak_kam_forward(const HamiltonianModel& model, const Grid& grid, const SchemeOptions& scheme,
                               const WeakKamOptions& options = {});

/// u_- as lim T_t u_+. The backward semigroup is expansive around u_-, so the
/// run keeps the most stationary unit-interval snapshot; converged when that
/// residual is within tol. Returns with `diverged` set if the run escapes;
/// throws NotConverged otherwise.
WeakKamResult weak_kam_backward(const HamiltonianModel& model, const Field& u_plus, const SchemeOptions& scheme,
                                const WeakKamOptions& options = {.tol = 1e-2, .T_max = 20.0, .check_every = 1.0});

enum class ActionDirection { forward, backward };
enum class ActionMethod { grid, shooting };

struct ActionResult {
  double x0 = 0.0;
  double u0 = 0.0;
  double x = 0.0;
  double t = 0.0;
  double value = 0.0;
  ActionMethod method = ActionMethod::grid;
  double cap_used = 0.0;
  std::optional<double> shooting_value;
};

struct ShootingOptions {
  int p_samples = 2001;
  double dt = 1e-3;
  int refine_iterations = 40;
};

/// h_{x0,u0}(x, t) (forward) or h^{x0,u0}(x, t) (backward) from pinned data
/// on the grid; x0 and x snap to the nearest nodes. Throws CapTooSmall when
/// the value is within 1% of the cap, InvalidArgument when t < 10 dt.
ActionResult action_function(const HamiltonianModel& model, const Grid& grid, double x0, double u0, double x,
                             double t, ActionDirection direction, const SchemeOptions& options,
                             bool with_shooting = false, const ShootingOptions& shooting = {});

/// All h_{x0,u0}(., t) values at once (grid method). Masked nodes hold the cap.
Field action_field(const HamiltonianModel& model, const Grid& grid, double x0, double u0, double t,
                   ActionDirection direction, const SchemeOptions& options);

/// Minimal (forward) or maximal (backward) u over characteristics from
/// (x0, ., u0) that reach x in time t. Throws NoTrajectoryLanded.
double action_by_shooting(const HamiltonianModel& model, double x0, double u0, double x, double t,
                          ActionDirection direction, const ShootingOptions& options = {},
                          const SearchBounds& bounds = {});

/// The unique u0 with h_{x0,u0}(x, t) = target_u, by bisection.
double solve_reversibility(const HamiltonianModel& model, const Grid& grid, double x0, double x, double t,
                           double target_u, const SchemeOptions& options, double tol = 1e-6);

}  // namespace chj
