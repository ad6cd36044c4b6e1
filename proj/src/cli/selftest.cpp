#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "chj/cli.hpp"

namespace chj::cli {

namespace {

struct Check {
  std::string name;
  std::function<std::string()> run;  ///< empty string on success, reason otherwise
};

struct Suite {
  bool fault = false;

  /// Every model a check uses goes through here so the seeded fault reaches it.
  HamiltonianModel model(HamiltonianModel m) const {
    if (fault) {
      auto du = m.d_u;
      m.d_u = [du](double x, double p, double u) { return -du(x, p, u); };
    }
    return m;
  }
  HamiltonianModel cd(double b, double lambda) const { return model(make_constant_drift(b, lambda)); }
  HamiltonianModel cdv(double b, double v0, double lambda) const {
    return model(make_constant_drift_with_potential(b, v0, lambda));
  }
};

std::string expect(bool ok, const std::string& what) { return ok ? std::string() : what; }

std::string within(double value, double target, double tol, const std::string& label) {
  return expect(std::fabs(value - target) <= tol,
                label + " = " + format_double(value) + ", expected " + format_double(target) + " +- " + format_double(tol));
}

std::vector<Check> fast_checks(const Suite& s) {
  std::vector<Check> c;
  c.push_back({"H4 margin on CD(1,0.5)", [&s] {
                 const AssumptionReport r = check_assumptions(s.cd(1.0, 0.5));
                 return expect(r.h4_ok && std::fabs(r.h4_delta_margin - 0.5) < 1e-12,
                               "H4 margin " + format_double(r.h4_delta_margin) + " (expected 0.5)");
               }});
  c.push_back({"H4 rejected on CD(1,-0.5)", [&s] {
                 return expect(!check_assumptions(s.cd(1.0, -0.5)).h4_ok, "H4 reported as holding");
               }});
  c.push_back({"condition C on CD(1,0.5)", [&s] {
                 return expect(check_assumptions(s.cd(1.0, 0.5)).condition_C_ok, "condition C reported as failing");
               }});
  c.push_back({"CD(1,0.5) orbit period", [&s] {
                 const OrbitResult o = shoot_stationary_orbit(s.cd(1.0, 0.5));
                 std::string r = within(o.period_T, 1.0, 1e-8, "period");
                 if (r.empty()) r = within(o.p_start, 0.0, 1e-10, "p0");
                 if (r.empty()) r = within(o.u_start, 0.0, 1e-10, "u0");
                 if (r.empty()) r = within(std::fabs(o.Z), o.period_T, 1e-8, "|Z|");
                 return r;
               }});
  c.push_back({"Legendre transform matches closed form", [&s] {
                 const HamiltonianModel m = s.cdv(1.0, 0.2, 0.5);
                 double worst = 0.0;
                 for (double x : {0.0, 0.3, 0.7})
                   for (double v : {-2.0, 0.0, 1.5})
                     worst = std::max(worst, std::fabs(legendre_transform(m, x, v, 0.1).value -
                                                       m.closed_form_L(x, v, 0.1)->value));
                 return expect(worst < 1e-10, "deviation " + format_double(worst));
               }});
  c.push_back({"kernel backends agree", [&s] {
                 if (!simd::avx2_available()) return std::string();
                 const HamiltonianModel m = s.cdv(1.0, 0.2, 0.5);
                 const Grid g = Grid::make(64);
                 const Field phi = Field::from_function(g, [](double x) { return 0.1 * std::sin(2 * std::numbers::pi * x); });
                 SchemeOptions a;
                 a.backend = simd::Backend::scalar;
                 SchemeOptions b = a;
                 b.backend = simd::Backend::avx2;
                 const Field fa = LaxOleinikScheme(m, g, a).step(phi);
                 const Field fb = LaxOleinikScheme(m, g, b).step(phi);
                 return expect(fa.values == fb.values, "scalar and AVX2 steps differ");
               }});
  c.push_back({"constant data grows like exp(lambda t)", [&s] {
                 const HamiltonianModel m = s.cd(1.0, 0.5);
                 const Grid g = Grid::make(64);
                 SchemeOptions o;
                 o.dt = 1.0 / 256.0;
                 for (double c0 : {0.1, -0.1}) {
                   const Field f = evolve(m, Field::constant(g, c0), 1.0, 0.0, o).final();
                   const double exact = c0 * std::exp(0.5);
                   double err = 0.0;
                   for (double v : f.values) err = std::max(err, std::fabs(v - exact));
                   if (err > 0.01 * std::fabs(exact)) return "relative error " + format_double(err / std::fabs(exact));
                 }
                 return std::string();
               }});
  c.push_back({"subsolution inequality on CD(1,0.5)", [&s] {
                 const HamiltonianModel m = s.cd(1.0, 0.5);
                 const OrbitResult o = shoot_stationary_orbit(m);
                 const SubsolutionSpec spec = build_subsolution(m, o, 0.0);
                 std::string r = within(spec.epsilon, 0.5 / (4.0 * std::numbers::pi * std::numbers::pi), 1e-9, "epsilon");
                 if (r.empty()) {
                   const double res = verify_subsolution(m, spec, Grid::make(64), 16);
                   r = expect(res <= 1e-6, "residual " + format_double(res));
                 }
                 return r;
               }});
  c.push_back({"config rejects unknown keys", [] {
                 try {
                   ExperimentConfig::parse("model.lambda = 0.5\nmodel.colour = red\n");
                 } catch (const Error& e) {
                   return expect(e.code() == ErrorCode::ConfigError, "wrong error code");
                 }
                 return std::string("unknown key accepted");
               }});
  return c;
}

std::vector<Check> full_checks(const Suite& s) {
  std::vector<Check> c;
  c.push_back({"CDV(1,0.2,0.5) orbit golden values", [&s] {
                 const OrbitResult o = shoot_stationary_orbit(s.cdv(1.0, 0.2, 0.5));
                 std::string r = within(o.p_start, -0.210787317486, 1e-9, "p0");
                 if (r.empty()) r = within(o.u_start, 0.022856658241, 1e-9, "u0");
                 if (r.empty()) r = within(o.period_T, 1.021095005338, 1e-9, "period");
                 return r;
               }});
  c.push_back({"CDV weak KAM agrees with the orbit (N=256)", [&s] {
                 const HamiltonianModel m = s.cdv(1.0, 0.2, 0.5);
                 const Grid g = Grid::make(256);
                 const OrbitResult o = shoot_stationary_orbit(m);
                 const WeakKamResult up = weak_kam_forward(m, g, SchemeOptions{});
                 double err = 0.0;
                 for (int i = 0; i < g.n; ++i) err = std::max(err, std::fabs(up.u.values[i] - o.u0_at(g.x(i))));
                 return expect(err <= 2e-2, "sup error " + format_double(err));
               }});
  c.push_back({"pinned periodic limit on CD(1,0.5)", [&s] {
                 const HamiltonianModel m = s.cd(1.0, 0.5);
                 const OrbitResult o = shoot_stationary_orbit(m);
                 const PeriodicSolution w = pinned_periodic_limit(m, o, 0.0);
                 std::string r = expect(w.period_residual <= 5e-3, "period residual " + format_double(w.period_residual));
                 if (r.empty()) r = expect(w.amplitude_at_x0 >= 0.5 * w.epsilon, "amplitude " + format_double(w.amplitude_at_x0));
                 if (r.empty() && w.detected_period) r = within(*w.detected_period, 1.0, 0.02, "detected period");
                 if (r.empty()) {
                   const PeriodicSolution v = min_shift_combine(w, 2);
                   r = expect(v.period_residual <= 1e-2 && v.pde_residual <= 5e-2,
                              "min-shift residuals " + format_double(v.period_residual) + ", " + format_double(v.pde_residual));
                 }
                 return r;
               }});
  c.push_back({"trichotomy on CD(1,0.5)", [&s] {
                 const HamiltonianModel m = s.cd(1.0, 0.5);
                 const Grid g = Grid::make(256);
                 const WeakKamResult up = weak_kam_forward(m, g, SchemeOptions{});
                 TrichotomyOptions to;
                 to.period_T = 1.0;
                 const std::pair<Field, TrichotomyClass> cases[] = {
                     {Field::constant(g, 0.1), TrichotomyClass::D3_plus_infinity},
                     {Field::constant(g, -0.1), TrichotomyClass::D2_minus_infinity},
                     {Field::from_function(g, [](double x) { return 0.05 - 0.05 * std::cos(2 * std::numbers::pi * x); }),
                      TrichotomyClass::D1_bounded}};
                 for (const auto& [phi, expected] : cases) {
                   const TrichotomyReport r = classify_trichotomy(m, phi, up.u, to);
                   if (r.cls() != expected || !r.confirmed) {
                     return std::string("got ") + to_string(r.cls()) + (r.confirmed ? "" : " (unconfirmed)") +
                            ", expected " + to_string(expected);
                   }
                 }
                 return std::string();
               }});
  c.push_back({"bifurcation sweep of the CD family", [&s] {
                 const BifurcationDiagram d = bifurcation_sweep([&s](double l) { return s.cd(1.0, l); },
                                                                {-0.4, -0.2, 0.0, 0.2, 0.4});
                 const BifurcationClass expected[] = {BifurcationClass::fixed_point, BifurcationClass::fixed_point,
                                                      BifurcationClass::degenerate, BifurcationClass::periodic,
                                                      BifurcationClass::periodic};
                 for (std::size_t k = 0; k < d.rows.size(); ++k) {
                   if (d.rows[k].cls != expected[k]) {
                     return "lambda " + format_double(d.rows[k].lambda) + " classified " + to_string(d.rows[k].cls);
                   }
                 }
                 return std::string();
               }});
  return c;
}

}  // namespace

int selftest(SelftestLevel level, bool seeded_fault, std::ostream& out) {
  const Suite suite{seeded_fault};
  std::vector<Check> checks = fast_checks(suite);
  if (level == SelftestLevel::full) {
    for (Check& c : full_checks(suite)) checks.push_back(std::move(c));
  }
  std::vector<std::string> failed;
  for (const Check& c : checks) {
    const auto t0 = std::chrono::steady_clock::now();
    std::string reason;
    try {
      reason = c.run();
    } catch (const std::exception& e) {
      reason = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    out << (reason.empty() ? "PASS " : "FAIL ") << c.name << " (" << format_double(std::round(secs * 100) / 100)
        << " s)" << (reason.empty() ? "" : ": " + reason) << '\n';
    if (!reason.empty()) failed.push_back(c.name);
  }
  if (failed.empty()) {
    out << "selftest: all " << checks.size() << " checks passed\n";
    return 0;
  }
  out << "selftest: " << failed.size() << " of " << checks.size() << " checks failed:\n";
  for (const std::string& f : failed) out << "  " << f << '\n';
  return 1;
}

}  // namespace chj::cli
