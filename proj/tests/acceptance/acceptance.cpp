// Acceptance run: one PASS/FAIL line per criterion, with the measured values
// and wall time. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "../common/property_suites.hpp"
#include "chj/flow.hpp"
#include "chj/model.hpp"
#include "chj/periodic.hpp"
#include "chj/semigroup.hpp"

using namespace chj;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  /// Records `label=value` and folds `ok` into the verdict.
  void check(bool ok, const std::string& label, double value) {
    if (detail.tellp() > 0) detail << ' ';
    detail << label << '=' << value << (ok ? "" : "(!)");
    pass = pass && ok;
  }
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  ///< seconds, 0 when the criterion has none
  std::function<void(Verdict&)> run;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double sup_error_vs_orbit(const Field& f, const OrbitResult& o) {
  double e = 0.0;
  for (int i = 0; i < f.grid.n; ++i) e = std::max(e, std::fabs(f.values[i] - o.u0_at(f.grid.x(i))));
  return e;
}

void orbit_cd(Verdict& v) {
  const OrbitResult o = shoot_stationary_orbit(make_constant_drift(1.0, 0.5));
  v.check(std::fabs(o.p_start) <= 1e-10, "|p0|", std::fabs(o.p_start));
  v.check(std::fabs(o.u_start) <= 1e-10, "|u0|", std::fabs(o.u_start));
  v.check(std::fabs(o.period_T - 1.0) <= 1e-8, "|T-1|", std::fabs(o.period_T - 1.0));
  v.check(std::fabs(std::fabs(o.Z) - o.period_T) <= 1e-8, "||Z|-T|", std::fabs(std::fabs(o.Z) - o.period_T));
}

void constant_data(Verdict& v) {
  const HamiltonianModel m = make_constant_drift(1.0, 0.5);
  const Grid g = Grid::make(256);
  SchemeOptions o;
  o.dt = 1e-3;
  for (double c : {0.1, -0.1}) {
    const Field f = evolve(m, Field::constant(g, c), 2.0, 0.0, o).final();
    const double exact = c * std::exp(0.5 * 2.0);
    double err = 0.0;
    for (double x : f.values) err = std::max(err, std::fabs(x - exact));
    v.check(err / std::fabs(exact) <= 1e-2, c > 0 ? "rel_err(+0.1)" : "rel_err(-0.1)", err / std::fabs(exact));
  }
}

void weak_kam(Verdict& v) {
  const HamiltonianModel m = make_constant_drift_with_potential(1.0, 0.2, 0.5);
  const OrbitResult orbit = shoot_stationary_orbit(m);
  for (auto [n, tol] : {std::pair{256, 2e-2}, std::pair{1024, 5e-3}}) {
    const Grid g = Grid::make(n);
    const SchemeOptions o;
    const WeakKamResult up = weak_kam_forward(m, g, o);
    const WeakKamResult um = weak_kam_backward(m, up.u, o);
    const std::string tag = "(N=" + std::to_string(n) + ")";
    v.check(sup_error_vs_orbit(up.u, orbit) <= tol, "|u+ - u0|" + tag, sup_error_vs_orbit(up.u, orbit));
    v.check(!um.diverged && sup_distance(um.u, up.u) <= tol, "|u- - u+|" + tag, sup_distance(um.u, up.u));
  }
}

void subsolution(Verdict& v) {
  const HamiltonianModel m = make_constant_drift(1.0, 0.5);
  const OrbitResult orbit = shoot_stationary_orbit(m);
  const SubsolutionSpec w = build_subsolution(m, orbit, 0.0);
  const Grid g = Grid::make(256);
  const double res = verify_subsolution(m, w, g, 64);
  v.check(res <= 1e-6, "max_residual", res);
  const Field w0 = Field::from_function(g, [&w](double x) { return w(x, 0.0); });
  const SchemeOptions o;
  const EvolutionTrace tr = evolve(m, w0, 1.0, 0.5, o);
  for (std::size_t k = 1; k < tr.times.size(); ++k) {
    const double t = tr.times[k];
    double worst = 0.0;  // max of w(., t) - T_t w(., 0)
    for (int i = 0; i < g.n; ++i) worst = std::max(worst, w(g.x(i), t) - tr.snapshots[k].values[i]);
    std::ostringstream label;
    label << "comparison_gap(t=" << t << ")";
    v.check(worst <= 5e-3, label.str(), worst);
  }
}

PeriodicSolution pinned_cd() {
  const HamiltonianModel m = make_constant_drift(1.0, 0.5);
  return pinned_periodic_limit(m, shoot_stationary_orbit(m), 0.0);
}

void periodicity(Verdict& v) {
  const PeriodicSolution w = pinned_cd();
  const double eps = 0.5 / (4.0 * std::numbers::pi * std::numbers::pi);
  v.check(w.periods_used <= 200, "periods", w.periods_used);
  v.check(w.period_residual <= 5e-3, "period_residual", w.period_residual);
  v.check(w.detected_period.has_value() && std::fabs(*w.detected_period - 1.0) <= 0.02, "detected_period",
          w.detected_period.value_or(NAN));
  v.check(std::fabs(w.epsilon - 0.0126651) <= 5e-8, "epsilon", w.epsilon);
  v.check(w.amplitude_at_x0 >= 0.5 * eps, "amplitude_at_x0", w.amplitude_at_x0);
}

void multiplicity(Verdict& v) {
  const PeriodicSolution w = min_shift_combine(pinned_cd(), 2);
  v.check(std::fabs(w.period_T - 0.5) <= 1e-12, "period", w.period_T);
  v.check(w.period_residual <= 1e-2, "period_residual(T/2)", w.period_residual);
  v.check(w.pde_residual <= 5e-2 && w.pde_nodes > 0, "pde_residual", w.pde_residual);
  v.check(w.pde_nodes > 0, "smooth_nodes", w.pde_nodes);
}

void trichotomy(Verdict& v) {
  const HamiltonianModel m = make_constant_drift(1.0, 0.5);
  const Grid g = Grid::make(256);
  const WeakKamResult up = weak_kam_forward(m, g, SchemeOptions{});
  TrichotomyOptions o;
  o.T_budget = 20.0;
  o.period_T = shoot_stationary_orbit(m).period_T;
  const std::tuple<const char*, Field, TrichotomyClass> cases[] = {
      {"D1", Field::from_function(g, [](double x) { return 0.05 - 0.05 * std::cos(kTwoPi * x); }),
       TrichotomyClass::D1_bounded},
      {"D2", Field::constant(g, -0.1), TrichotomyClass::D2_minus_infinity},
      {"D3", Field::constant(g, 0.1), TrichotomyClass::D3_plus_infinity}};
  for (const auto& [tag, phi, expected] : cases) {
    const TrichotomyReport r = classify_trichotomy(m, phi, up.u, o);
    const bool ok = r.cls() == expected && r.dynamic_class == expected && r.confirmed;
    const std::string label = std::string(tag) + (expected == TrichotomyClass::D1_bounded ? ":K" : ":escape_time");
    v.check(ok, label, expected == TrichotomyClass::D1_bounded ? r.bound_K : r.escape_time);
  }
}

void property_suites(Verdict& v) {
  const testing::PropertyConfig cfg;  // N = 256, dt = 1e-3, 20 pairs
  const HamiltonianModel cdv = make_constant_drift_with_potential(1.0, 0.2, 0.5);
  const HamiltonianModel cd = make_constant_drift(1.0, 0.5);
  std::vector<testing::SuiteOutcome> out = testing::order_suites(cdv, cfg);
  out.push_back(testing::semigroup_suite(cdv, cfg));
  out.push_back(testing::markov_suite(cd, cfg));
  out.push_back(testing::duality_suite(cd, cfg));
  out.push_back(testing::fixed_point_suite(cdv, shoot_stationary_orbit(cdv), cfg));
  for (const testing::SuiteOutcome& s : out) v.check(s.pass, s.name, s.measured);
}

void bifurcation(Verdict& v) {
  const BifurcationDiagram d =
      bifurcation_sweep([](double l) { return make_constant_drift(1.0, l); }, {-0.4, -0.2, 0.0, 0.2, 0.4});
  for (const BifurcationRow& r : d.rows) {
    std::ostringstream label;
    label << "lambda=" << r.lambda << ':' << to_string(r.cls);
    if (r.lambda < 0) {
      v.check(r.cls == BifurcationClass::fixed_point && r.stationarity_residual <= 1e-4, label.str() + ":residual",
              r.stationarity_residual);
    } else if (r.lambda > 0) {
      const double eps = r.lambda / (4.0 * std::numbers::pi * std::numbers::pi);
      v.check(r.cls == BifurcationClass::periodic && r.amplitude >= 0.5 * eps, label.str() + ":amplitude", r.amplitude);
    } else {
      v.check(r.cls == BifurcationClass::degenerate, label.str(), 0.0);
    }
  }
}

void long_time(Verdict& v) {
  const HamiltonianModel m = make_constant_drift(1.0, 0.5);
  const Grid g = Grid::make(256);
  const OrbitResult orbit = shoot_stationary_orbit(m);
  const WeakKamResult up = weak_kam_forward(m, g, SchemeOptions{});
  const Field phi = Field::from_function(g, [](double x) { return 0.05 - 0.05 * std::cos(kTwoPi * x); });
  const PeriodicSolution w = long_time_periodic_limit(m, phi, up.u, orbit);
  v.check(w.period_residual <= 5e-3, "period_residual", w.period_residual);
  v.check(w.amplitude > 0.0, "amplitude", w.amplitude);
  v.check(w.localization_error.has_value() && *w.localization_error <= 5e-2, "localization_error",
          w.localization_error.value_or(NAN));
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "CD(1,0.5) stationary orbit", 1.0, orbit_cd},
      {2, "constant data grow like exp(lambda t)", 30.0, constant_data},
      {3, "weak KAM solutions agree with the orbit", 0.0, weak_kam},
      {4, "explicit subsolution and comparison", 0.0, subsolution},
      {5, "nontrivial time-periodic solution", 600.0, periodicity},
      {6, "min-shift multiplicity", 0.0, multiplicity},
      {7, "trichotomy of the golden data", 0.0, trichotomy},
      {8, "semigroup property suites", 900.0, property_suites},
      {9, "bifurcation sweep of the CD family", 0.0, bifurcation},
      {10, "long-time periodic limit", 0.0, long_time},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << (v.detail.tellp() > 0 ? " " : "") << "threw: " << e.what();
    }
    const double secs = seconds_since(t0);
    if (c.time_limit > 0.0) v.check(secs < c.time_limit, "time_limit_s", c.time_limit);
    if (!v.pass) ++failed;
    std::printf("%s criterion %d: %s [%s] (%.2f s)\n", v.pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                v.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
