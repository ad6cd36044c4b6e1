#include <cmath>
#include <string>

#include "chj/error.hpp"
#include "chj/semigroup.hpp"

namespace chj {

namespace {

SchemeOptions aligned(SchemeOptions o, double chunk) {
  const long steps = std::max(1L, static_cast<long>(std::ceil(chunk / o.dt - 1e-9)));
  o.dt = chunk / steps;
  return o;
}

}  // namespace

WeakKamResult weak_kam_forward(const HamiltonianModel& model, const Grid& grid, const SchemeOptions& scheme_opts,
                               const WeakKamOptions& options) {
  // T^+ runs as the backward scheme of the conjugate model on -phi.
  const LaxOleinikScheme scheme(model.conjugate(), grid, aligned(scheme_opts, options.check_every));
  Field current = Field::constant(grid, 0.0);
  double t = 0.0;
  double residual = INFINITY;
  while (t < options.T_max - 1e-12) {
    EvolutionTrace chunk = evolve(scheme, current, options.check_every, 0.0);
    t += options.check_every;
    residual = sup_distance(chunk.final(), current);
    current = chunk.final();
    if (chunk.diverged) break;
    if (residual <= options.tol) return {-current, residual, t, true, false};
  }
  throw Error(ErrorCode::NotConverged, "forward weak KAM iteration stalled at residual " + std::to_string(residual) +
                                           " after t = " + std::to_string(t));
}

WeakKamResult weak_kam_backward(const HamiltonianModel& model, const Field& u_plus, const SchemeOptions& scheme_opts,
                                const WeakKamOptions& options) {
  const LaxOleinikScheme scheme(model, u_plus.grid, aligned(scheme_opts, options.check_every));
  Field current = u_plus;
  WeakKamResult best{u_plus, INFINITY, 0.0, false, false};
  double t = 0.0;
  bool diverged = false;
  while (t < options.T_max - 1e-12) {
    EvolutionTrace chunk = evolve(scheme, current, options.check_every, 0.0);
    if (chunk.diverged) {
      diverged = true;
      break;
    }
    t += options.check_every;
    const double residual = sup_distance(chunk.final(), current);
    current = chunk.final();
    if (residual < best.residual) best = {current, residual, t, false, false};
  }
  best.converged = best.residual <= options.tol;
  best.diverged = diverged;
  if (!best.converged && !diverged) {
    throw Error(ErrorCode::NotConverged, "backward weak KAM iteration: best unit-interval residual " +
                                             std::to_string(best.residual));
  }
  if (diverged && !best.converged) best.u = current;
  return best;
}

}  // namespace chj
