#include <algorithm>
#include <cmath>
#include <string>

#include "chj/error.hpp"
#include "chj/semigroup.hpp"

namespace chj {

namespace {

struct NodeMin {
  double value;
  double v;
};

/// Sampled minimum followed by golden-section refinement of the bracket around
/// the best sample; same search as the quadratic kernels.
template <class Cost>
NodeMin minimize_velocity(Cost&& cost, const std::vector<double>& velocities, double spacing, double v_max,
                          int iterations) {
  NodeMin best{INFINITY, 0.0};
  for (double v : velocities) {
    const double c = cost(v);
    if (c < best.value) best = {c, v};
  }
  double lo = std::max(-v_max, best.v - spacing);
  double hi = std::min(v_max, best.v + spacing);
  double c = hi - simd::kGoldenRatio * (hi - lo);
  double d = lo + simd::kGoldenRatio * (hi - lo);
  double fc = cost(c);
  double fd = cost(d);
  for (int it = 0; it < iterations; ++it) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - simd::kGoldenRatio * (hi - lo);
      fc = cost(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + simd::kGoldenRatio * (hi - lo);
      fd = cost(d);
    }
  }
  const double vm = 0.5 * (lo + hi);
  const double fm = cost(vm);
  if (fm < best.value) best = {fm, vm};
  return best;
}

double foot_interpolate(const double* base, int i, double v, double cells_per_velocity) {
  const double s = v * cells_per_velocity;
  const double r = std::nearbyint(s);
  double m;
  double theta;
  if (std::fabs(s - r) < simd::kSnapCells) {
    m = r;
    theta = 0.0;
  } else {
    m = std::floor(s);
    theta = s - m;
  }
  const int mi = static_cast<int>(m);
  const double a = base[i - mi];
  const double b = base[i - mi - 1];
  return a + theta * (b - a);
}

}  // namespace

double max_time_step(const HamiltonianModel& model, const Grid& grid, const SchemeOptions& options) {
  double dt = options.max_foot_cells * grid.h() / options.bounds.v_max;
  if (model.kappa > 0.0) dt = std::min(dt, 0.5 / model.kappa);
  return dt;
}

LaxOleinikScheme::LaxOleinikScheme(HamiltonianModel model, Grid grid, SchemeOptions options)
    : model_(std::move(model)), grid_(grid), options_(options), backend_(simd::resolve(options.backend)) {
  const double dt = options_.dt;
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "time step must be positive");
  const double dt_max = max_time_step(model_, grid_, options_);
  if (dt > dt_max * (1.0 + 1e-12)) {
    throw Error(ErrorCode::InvalidArgument, "time step " + std::to_string(dt) + " exceeds the admissible " +
                                                std::to_string(dt_max) + " (0.5/kappa and foot locality)");
  }
  if (options_.velocity_samples < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 velocity samples");
  if (!(options_.u_cap > 0.0)) throw Error(ErrorCode::InvalidArgument, "cap must be positive");

  const double vmax = options_.bounds.v_max;
  const int S = options_.velocity_samples;
  velocities_.resize(S);
  for (int k = 0; k < S; ++k) velocities_[k] = -vmax + 2.0 * vmax * k / (S - 1);
  // Ties in the argmin resolve to the smallest |v| (positive first).
  std::stable_sort(velocities_.begin(), velocities_.end(), [](double a, double b) {
    const double aa = std::fabs(a);
    const double ab = std::fabs(b);
    if (aa != ab) return aa < ab;
    return a > b;
  });
  spacing_ = 2.0 * vmax / (S - 1);
  golden_iterations_ =
      std::max(0, static_cast<int>(std::ceil(std::log(options_.golden_tol / (2.0 * spacing_)) /
                                             std::log(simd::kGoldenRatio))));
  pad_ = static_cast<int>(std::ceil(vmax * dt / grid_.h())) + 2;

  fast_ = model_.quadratic.has_value() && !options_.force_generic;
  if (fast_) {
    const QuadraticCoefficients& q = *model_.quadratic;
    lambda_ = q.lambda;
    if (!(1.0 - lambda_ * dt > 0.0)) {
      throw Error(ErrorCode::InnerNotConverged, "lambda * dt >= 1: the implicit u-update has no fixed point");
    }
    table_.drift.resize(grid_.n);
    table_.half_inv_a.resize(grid_.n);
    table_.potential.resize(grid_.n);
    for (int i = 0; i < grid_.n; ++i) {
      const double x = grid_.x(i);
      const double a = q.a.value(x);
      table_.drift[i] = a * q.b.value(x);
      table_.half_inv_a[i] = 1.0 / (2.0 * a);
      table_.potential[i] = q.potential.value(x);
    }
  }
}

void LaxOleinikScheme::step_fast(const std::vector<double>& ext, std::vector<double>& out) const {
  const int n = grid_.n;
  std::vector<double> argmin(n);
  std::vector<double> foot(n);
  simd::MinimizeRequest req;
  req.phi_ext = ext.data();
  req.pad = pad_;
  req.n = n;
  req.dt = options_.dt;
  req.cells_per_velocity = options_.dt * n;
  req.table = &table_;
  req.velocities = velocities_.data();
  req.n_velocities = static_cast<int>(velocities_.size());
  req.v_max = options_.bounds.v_max;
  req.spacing = spacing_;
  req.golden_iterations = golden_iterations_;
  simd::minimize(backend_, req, {out.data(), argmin.data(), foot.data()});
  // The u-part of the Lagrangian is lambda u, so the inner fixed point
  // w = m + dt lambda w has the closed form below (its iteration converges
  // geometrically with factor lambda dt <= 1/2).
  const double denom = 1.0 - lambda_ * options_.dt;
  for (int i = 0; i < n; ++i) out[i] = out[i] / denom;
}

void LaxOleinikScheme::step_generic(const std::vector<double>& ext, std::vector<double>& out) const {
  const int n = grid_.n;
  const double* base = ext.data() + pad_;
  const double dt = options_.dt;
  const double cpv = dt * n;
  const double vmax = options_.bounds.v_max;
  for (int i = 0; i < n; ++i) {
    const double x = grid_.x(i);
    // Velocities whose dual momentum leaves the p window are not admissible.
    auto L = [&](double v, double u) {
      try {
        return legendre_transform(model_, x, v, u, options_.bounds).value;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoBracket) throw;
        return static_cast<double>(INFINITY);
      }
    };
    // First pass: u evaluated at the foot value.
    NodeMin w = minimize_velocity(
        [&](double v) {
          const double foot = foot_interpolate(base, i, v, cpv);
          return foot + dt * L(v, foot);
        },
        velocities_, spacing_, vmax, golden_iterations_);
    double prev_delta = INFINITY;
    int it = 0;
    for (;; ++it) {
      if (it >= options_.inner_max) {
        throw Error(ErrorCode::InnerNotConverged, "inner u-iteration did not settle at node " + std::to_string(i));
      }
      const double w_prev = w.value;
      w = minimize_velocity([&](double v) { return foot_interpolate(base, i, v, cpv) + dt * L(v, w_prev); },
                            velocities_, spacing_, vmax, golden_iterations_);
      const double delta = std::fabs(w.value - w_prev);
      if (delta <= options_.inner_tol * std::max(1.0, std::fabs(w.value))) break;
      // A contraction can only stall at round-off level.
      if (it > 3 && delta >= prev_delta && delta <= 1e-10 * std::max(1.0, std::fabs(w.value))) break;
      prev_delta = delta;
    }
    out[i] = w.value;
  }
}

Field LaxOleinikScheme::step(const Field& phi) const {
  const int n = grid_.n;
  if (phi.grid.n != n) throw Error(ErrorCode::InvalidArgument, "field and scheme grids differ");
  std::vector<double> ext(n + 2 * pad_);
  for (int j = -pad_; j < n + pad_; ++j) {
    const int k = grid_.wrap(j);
    ext[j + pad_] = phi.capped(k) ? options_.u_cap : phi.values[k];
  }
  Field out{grid_, std::vector<double>(n), {}};
  if (fast_) {
    step_fast(ext, out.values);
  } else {
    step_generic(ext, out.values);
  }
  if (phi.has_mask()) {
    out.cap_mask.assign(n, 0);
    const double threshold = 0.5 * options_.u_cap;
    bool any = false;
    for (int i = 0; i < n; ++i) {
      if (out.values[i] >= threshold) {
        out.values[i] = options_.u_cap;
        out.cap_mask[i] = 1;
        any = true;
      }
    }
    if (!any) out.cap_mask.clear();
  }
  return out;
}

Field lax_oleinik_step(const HamiltonianModel& model, const Field& phi, const SchemeOptions& options) {
  return LaxOleinikScheme(model, phi.grid, options).step(phi);
}

}  // namespace chj
