#include <cmath>
#include <string>

#include "chj/error.hpp"
#include "chj/semigroup.hpp"

namespace chj {

namespace {

bool escaped(const Field& f, double u_cap) { return f.free_count() == 0 || f.sup_norm() > 0.5 * u_cap; }

}  // namespace

EvolutionTrace evolve(const LaxOleinikScheme& scheme, const Field& phi, double T, double snapshot_every) {
  if (!(T >= 0.0)) throw Error(ErrorCode::InvalidArgument, "evolution time must be non-negative");
  const double dt = scheme.options().dt;
  const long steps = std::lround(T / dt);
  if (std::fabs(steps * dt - T) > 1e-9 * std::max(1.0, T)) {
    throw Error(ErrorCode::InvalidArgument, "evolution time is not a whole number of steps");
  }
  const long stride = snapshot_every > 0.0 ? std::max(1L, std::lround(snapshot_every / dt)) : 0;

  EvolutionTrace trace;
  trace.model_name = scheme.model().name;
  trace.dt = dt;
  trace.times.push_back(0.0);
  trace.snapshots.push_back(phi);
  Field current = phi;
  for (long k = 1; k <= steps; ++k) {
    current = scheme.step(current);
    const double t = k * dt;
    const bool out = escaped(current, scheme.options().u_cap);
    if ((stride > 0 && k % stride == 0) || k == steps || out) {
      trace.times.push_back(t);
      trace.snapshots.push_back(current);
    }
    if (out) {
      trace.diverged = true;
      trace.diverged_at = t;
      break;
    }
  }
  return trace;
}

EvolutionTrace evolve(const HamiltonianModel& model, const Field& phi, double T, double snapshot_every,
                      const SchemeOptions& options) {
  SchemeOptions o = options;
  if (T > 0.0) {
    // Shrink dt slightly when T is not a whole number of steps.
    const long steps = std::max(1L, static_cast<long>(std::ceil(T / o.dt - 1e-9)));
    o.dt = T / steps;
  }
  const LaxOleinikScheme scheme(model, phi.grid, o);
  return evolve(scheme, phi, T, snapshot_every);
}

EvolutionTrace evolve_forward(const HamiltonianModel& model, const Field& phi, double T, double snapshot_every,
                              const SchemeOptions& options) {
  EvolutionTrace trace = evolve(model.conjugate(), -phi, T, snapshot_every, options);
  for (Field& f : trace.snapshots) f = -f;
  trace.model_name = model.name;
  return trace;
}

}  // namespace chj
