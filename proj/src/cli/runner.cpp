#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "chj/cli.hpp"

namespace chj::cli {

namespace {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string wall_time() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string hex(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << v;
  return s.str();
}

std::string fmt(double v) { return format_double(v); }

/// Everything a command needs: parsed config, resolved model and the
/// output directory, plus the list of files written so far.
struct Context {
  const ExperimentConfig& config;
  const RunFlags& flags;
  std::filesystem::path out;
  HamiltonianModel model;
  std::optional<double> critical_shift;
  std::vector<std::string> files;

  std::string path(const std::string& name) {
    files.push_back(name);
    return (out / name).string();
  }
};

Field field_from_expression(const Grid& grid, const std::string& source) {
  const Expression e = Expression::parse(source);
  return Field::from_function(grid, [&e](double x) { return e(x); });
}

Grid config_grid(const ExperimentConfig& c, const std::string& key = "grid.n") {
  try {
    return Grid::make(c.integer(key, c.integer("grid.n", 256)));
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
}

OrbitOptions orbit_options(const ExperimentConfig& c) {
  OrbitOptions o;
  o.steps = c.integer("orbit.steps", o.steps);
  if (o.steps < 16) throw Error(ErrorCode::ConfigError, "orbit.steps must be >= 16");
  o.b_min_tol = c.positive("orbit.b_min_tol", o.b_min_tol);
  return o;
}

OrbitResult config_orbit(const Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  return shoot_stationary_orbit(ctx.model, c.number("orbit.p_guess", 0.0), c.number("orbit.u_guess", 0.0),
                                orbit_options(c));
}

WeakKamOptions weak_kam_options(const ExperimentConfig& c) {
  WeakKamOptions o;
  o.tol = c.positive("weak_kam.tol", o.tol);
  o.T_max = c.positive("weak_kam.T_max", o.T_max);
  return o;
}

PeriodicOptions periodic_options(const ExperimentConfig& c) {
  PeriodicOptions o;
  o.n = config_grid(c).n;
  o.slices = c.integer("periodic.slices", o.slices);
  o.steps_per_period = c.integer("periodic.steps_per_period", o.steps_per_period);
  o.n_max = c.integer("periodic.n_max", o.n_max);
  o.tol = c.positive("periodic.tol", o.tol);
  o.renormalize = c.flag("periodic.renormalize", o.renormalize);
  if (o.slices < 8) throw Error(ErrorCode::ConfigError, "periodic.slices must be >= 8");
  if (o.n_max < 1) throw Error(ErrorCode::ConfigError, "periodic.n_max must be >= 1");
  if (o.steps_per_period < 0) throw Error(ErrorCode::ConfigError, "periodic.steps_per_period must be >= 0");
  o.scheme = build_scheme(c);
  return o;
}

void cmd_check_model(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  SamplingSpec s;
  s.nx = c.integer("check.nx", s.nx);
  s.np = c.integer("check.np", s.np);
  s.nu = c.integer("check.nu", s.nu);
  if (s.nx < 1 || s.np < 2 || s.nu < 1) throw Error(ErrorCode::ConfigError, "check.* sample counts too small");
  s.bounds = build_bounds(c);
  const AssumptionReport r = check_assumptions(ctx.model, s);
  write_key_values(ctx.path("check.txt"),
                   {{"model", ctx.model.name},
                    {"H1", r.h1_ok ? "ok" : "fail"},
                    {"H1_margin", fmt(r.h1_margin)},
                    {"H4", r.h4_ok ? "ok" : "fail"},
                    {"H4_margin", fmt(r.h4_delta_margin)},
                    {"H4_kappa_observed", fmt(r.h4_kappa_observed)},
                    {"C", r.condition_C_ok ? "ok" : "fail"},
                    {"C_margin", fmt(r.condition_C_margin)},
                    {"C_worst_x", fmt(r.condition_C_worst_x)},
                    {"C_hit_boundary", r.c_hit_boundary ? "true" : "false"},
                    {"samples", std::to_string(r.sample_count)}});
  if (!r.all_ok()) {
    std::string failed;
    if (!r.h1_ok) failed += " H1 (margin " + fmt(r.h1_margin) + ")";
    if (!r.h4_ok) failed += " H4 (margin " + fmt(r.h4_delta_margin) + ")";
    if (!r.condition_C_ok) failed += " C (margin " + fmt(r.condition_C_margin) + ")";
    throw Error(ErrorCode::AssumptionViolated, "assumption check failed:" + failed);
  }
}

void cmd_orbit(Context& ctx) {
  const Grid grid = config_grid(ctx.config);
  const OrbitResult o = config_orbit(ctx);
  const ConditionA a = check_condition_A(o, orbit_options(ctx.config).b_min_tol);
  write_orbit_csv(ctx.path("orbit.csv"), o, grid);
  write_key_values(ctx.path("orbit_meta.txt"), {{"period_T", fmt(o.period_T)},
                                                {"Z", fmt(o.Z)},
                                                {"p0", fmt(o.p_start)},
                                                {"u0", fmt(o.u_start)},
                                                {"closing_residual", fmt(o.closing_residual)},
                                                {"h_residual", fmt(o.h_residual)},
                                                {"newton_iterations", std::to_string(o.newton_iterations)},
                                                {"min_abs_B", fmt(a.min_abs_B)},
                                                {"condition_A", a.holds ? "ok" : "fail"}});
  if (!a.holds) throw Error(ErrorCode::AssumptionViolated, "condition (A) fails: min |H_p| = " + fmt(a.min_abs_B));
}

void cmd_evolve(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const Grid grid = config_grid(c);
  const SchemeOptions so = build_scheme(c);
  const double T = c.positive("evolve.T", 1.0);
  const double every = c.number("evolve.snapshot_every", T / 10.0);
  if (every < 0.0) throw Error(ErrorCode::ConfigError, "evolve.snapshot_every must be >= 0");
  const std::string direction = c.text("evolve.direction", "backward");
  const Field phi = field_from_expression(grid, c.text("evolve.phi", "0"));
  EvolutionTrace tr;
  if (direction == "backward") {
    tr = evolve(ctx.model, phi, T, every, so);
  } else if (direction == "forward") {
    tr = evolve_forward(ctx.model, phi, T, every, so);
  } else {
    throw Error(ErrorCode::ConfigError, "evolve.direction must be backward or forward");
  }
  write_field_csv(ctx.path("field.csv"), tr.final());
  write_trace_csv(ctx.path("trace.csv"), tr);
  {
    std::ofstream f(ctx.path("supnorm.csv"), std::ios::binary);
    f << "t,sup_norm\n";
    for (std::size_t k = 0; k < tr.snapshots.size(); ++k) {
      f << fmt(tr.times[k]) << ',' << fmt(tr.snapshots[k].sup_norm()) << '\n';
    }
  }
  write_key_values(ctx.path("evolve.txt"), {{"direction", direction},
                                            {"dt", fmt(tr.dt)},
                                            {"T_reached", fmt(tr.times.back())},
                                            {"diverged", tr.diverged ? "true" : "false"},
                                            {"diverged_at", fmt(tr.diverged ? tr.diverged_at : NAN)},
                                            {"final_min", fmt(tr.final().min())},
                                            {"final_max", fmt(tr.final().max())}});
}

void cmd_weak_kam(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const Grid grid = config_grid(c);
  const SchemeOptions so = build_scheme(c);
  const WeakKamResult up = weak_kam_forward(ctx.model, grid, so, weak_kam_options(c));
  write_field_csv(ctx.path("u_plus.csv"), up.u);
  WeakKamOptions bo{.tol = 1e-2, .T_max = 20.0, .check_every = 1.0};
  bo.tol = c.positive("weak_kam.backward_tol", bo.tol);
  bo.T_max = c.positive("weak_kam.backward_T_max", bo.T_max);
  const WeakKamResult um = weak_kam_backward(ctx.model, up.u, so, bo);
  write_field_csv(ctx.path("u_minus.csv"), um.u);
  write_key_values(ctx.path("weak_kam.txt"), {{"u_plus_residual", fmt(up.residual)},
                                              {"u_plus_time", fmt(up.time)},
                                              {"u_minus_residual", fmt(um.residual)},
                                              {"u_minus_time", fmt(um.time)},
                                              {"u_minus_diverged", um.diverged ? "true" : "false"},
                                              {"u_minus_vs_u_plus", fmt(sup_distance(um.u, up.u))}});
}

void cmd_action(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const Grid grid = config_grid(c);
  const SchemeOptions so = build_scheme(c);
  const double x0 = c.number("action.x0", 0.0);
  const double u0 = c.number("action.u0", 0.0);
  const double x = c.number("action.x", 0.5);
  const double t = c.positive("action.t", 1.0);
  const std::string dir = c.text("action.direction", "forward");
  if (dir != "forward" && dir != "backward") throw Error(ErrorCode::ConfigError, "action.direction must be forward or backward");
  const ActionDirection d = dir == "forward" ? ActionDirection::forward : ActionDirection::backward;
  ShootingOptions sh;
  sh.p_samples = c.integer("action.p_samples", sh.p_samples);
  const bool shooting = c.flag("action.shooting", false);
  const ActionResult r = action_function(ctx.model, grid, x0, u0, x, t, d, so, shooting, sh);
  write_field_csv(ctx.path("action_field.csv"), action_field(ctx.model, grid, x0, u0, t, d, so));
  KeyValues kv = {{"direction", dir},          {"x0", fmt(r.x0)}, {"u0", fmt(r.u0)}, {"x", fmt(r.x)},
                  {"t", fmt(r.t)},             {"value", fmt(r.value)},
                  {"cap_used", fmt(r.cap_used)}, {"shooting_value", fmt(r.shooting_value.value_or(NAN))}};
  if (c.has("action.target_u")) {
    const double target = c.number("action.target_u", 0.0);
    kv.emplace_back("target_u", fmt(target));
    kv.emplace_back("reversibility_u0", fmt(solve_reversibility(ctx.model, grid, x0, x, t, target, so)));
  }
  write_key_values(ctx.path("action.txt"), kv);
}

void cmd_subsolution(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const Grid grid = config_grid(c, "subsolution.n");
  const OrbitResult o = config_orbit(ctx);
  const SubsolutionSpec spec = build_subsolution(ctx.model, o, c.number("subsolution.x0", 0.0));
  const int ts = c.integer("subsolution.t_samples", 64);
  if (ts < 1) throw Error(ErrorCode::ConfigError, "subsolution.t_samples must be >= 1");
  const double residual = verify_subsolution(ctx.model, spec, grid, ts);
  {
    std::ofstream f(ctx.path("subsolution.csv"), std::ios::binary);
    f << "t,x,value\n";
    for (int k = 0; k < 8; ++k) {
      const double t = std::fabs(spec.Z) * k / 8.0;
      for (int i = 0; i < grid.n; ++i) f << fmt(t) << ',' << fmt(grid.x(i)) << ',' << fmt(spec(grid.x(i), t)) << '\n';
    }
  }
  const double tol = c.positive("subsolution.fd_tol", 1e-6);
  write_key_values(ctx.path("subsolution.txt"), {{"x0", fmt(spec.x0)},
                                                 {"epsilon", fmt(spec.epsilon)},
                                                 {"M0", fmt(spec.M0)},
                                                 {"Z", fmt(spec.Z)},
                                                 {"delta", fmt(spec.delta)},
                                                 {"min_B_squared", fmt(spec.min_B_squared)},
                                                 {"max_residual", fmt(residual)},
                                                 {"tolerance", fmt(tol)}});
  if (residual > tol) throw Error(ErrorCode::NotConverged, "subsolution residual " + fmt(residual) + " exceeds " + fmt(tol));
}

void cmd_periodic(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const PeriodicOptions po = periodic_options(c);
  const OrbitResult o = config_orbit(ctx);
  const std::string mode = c.text("periodic.mode", "pinned");
  PeriodicSolution w;
  if (mode == "pinned") {
    w = pinned_periodic_limit(ctx.model, o, c.number("periodic.x0", 0.0), po);
  } else if (mode == "long_time") {
    const Grid grid = Grid::make(po.n);
    const WeakKamResult up = weak_kam_forward(ctx.model, grid, po.scheme, weak_kam_options(c));
    const Field phi = field_from_expression(grid, c.text("periodic.phi", "0.05 - 0.05*cos(2*pi*x)"));
    w = long_time_periodic_limit(ctx.model, phi, up.u, o, po);
  } else {
    throw Error(ErrorCode::ConfigError, "periodic.mode must be pinned or long_time");
  }
  const int shift = c.integer("periodic.min_shift", 1);
  if (shift < 1) throw Error(ErrorCode::ConfigError, "periodic.min_shift must be >= 1");
  if (shift > 1) w = min_shift_combine(w, shift);
  write_periodic_csv(ctx.path("periodic.csv"), w);
  write_key_values(ctx.path("periodic.txt"),
                   {{"mode", mode},
                    {"min_shift", std::to_string(shift)},
                    {"period_T", fmt(w.period_T)},
                    {"periods_used", std::to_string(w.periods_used)},
                    {"period_residual", fmt(w.period_residual)},
                    {"pde_residual", fmt(w.pde_residual)},
                    {"pde_nodes", std::to_string(w.pde_nodes)},
                    {"amplitude", fmt(w.amplitude)},
                    {"amplitude_at_x0", fmt(w.amplitude_at_x0)},
                    {"epsilon", fmt(w.epsilon)},
                    {"detected_period", fmt(w.detected_period.value_or(NAN))},
                    {"detected_residual", fmt(w.detected_residual.value_or(NAN))},
                    {"touch_shift", fmt(w.touch_shift)},
                    {"touching_nodes", std::to_string(w.touching_nodes)},
                    {"localization_error", fmt(w.localization_error.value_or(NAN))}});
}

void cmd_trichotomy(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  const Grid grid = config_grid(c);
  TrichotomyOptions to;
  to.scheme = build_scheme(c);
  to.T_budget = c.positive("trichotomy.T_budget", to.T_budget);
  to.escape_level = c.positive("trichotomy.escape_level", to.escape_level);
  to.snapshot_every = c.positive("trichotomy.snapshot_every", to.snapshot_every);
  try {
    to.period_T = config_orbit(ctx).period_T;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TurningPoint && e.code() != ErrorCode::NotConverged) throw;
  }
  const WeakKamResult up = weak_kam_forward(ctx.model, grid, to.scheme, weak_kam_options(c));
  const Field phi = field_from_expression(grid, c.text("trichotomy.phi", "0.05 - 0.05*cos(2*pi*x)"));
  const TrichotomyReport r = classify_trichotomy(ctx.model, phi, up.u, to);
  write_field_csv(ctx.path("u_plus.csv"), up.u);
  write_key_values(ctx.path("trichotomy.txt"), {{"class", to_string(r.static_class)},
                                                {"dynamic_class", to_string(r.dynamic_class)},
                                                {"confirmed", r.confirmed ? "true" : "false"},
                                                {"bound_K", fmt(r.bound_K)},
                                                {"onset_T_phi", fmt(r.onset_T_phi)},
                                                {"escape_time", fmt(r.escape_time)},
                                                {"min_diff", fmt(r.min_diff)},
                                                {"max_diff", fmt(r.max_diff)},
                                                {"touch_tol", fmt(r.touch_tol)},
                                                {"period_T", fmt(to.period_T)}});
}

void cmd_bifurcate(Context& ctx) {
  const ExperimentConfig& c = ctx.config;
  std::vector<double> lambdas = c.list("bifurcate.lambdas");
  if (lambdas.empty()) lambdas = {-0.4, -0.2, 0.0, 0.2, 0.4};
  BifurcationOptions bo;
  bo.periodic = periodic_options(c);
  bo.weak_kam = weak_kam_options(c);
  bo.fixed_point_tol = c.positive("bifurcate.fixed_point_tol", bo.fixed_point_tol);
  bo.x0 = c.number("bifurcate.x0", bo.x0);
  bo.b_min_tol = c.positive("orbit.b_min_tol", bo.b_min_tol);
  int jobs = ctx.flags.jobs > 0 ? ctx.flags.jobs : c.integer("run.jobs", 0);
  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bo.jobs = jobs;
  const std::optional<double> shift = ctx.critical_shift;
  const ExperimentConfig& cfg = ctx.config;
  const auto family = [&cfg, shift](double lambda) {
    HamiltonianModel m = build_model(cfg, lambda);
    return shift ? m.shifted(*shift) : m;
  };
  const BifurcationDiagram d = bifurcation_sweep(family, lambdas, bo);
  write_bifurcation_csv(ctx.path("bifurcation.csv"), d);
  KeyValues kv = {{"lambda0_estimate", fmt(d.lambda0_estimate)}, {"rows", std::to_string(d.rows.size())}};
  for (const BifurcationRow& r : d.rows) {
    const std::string key = "row." + fmt(r.lambda);
    kv.emplace_back(key + ".stationarity_residual", fmt(r.stationarity_residual));
    kv.emplace_back(key + ".epsilon", fmt(r.epsilon));
    kv.emplace_back(key + ".note", r.note);
  }
  write_key_values(ctx.path("bifurcation.txt"), kv);
}

const std::map<std::string, std::function<void(Context&)>>& dispatch() {
  static const std::map<std::string, std::function<void(Context&)>> table = {
      {"check-model", cmd_check_model}, {"orbit", cmd_orbit},   {"evolve", cmd_evolve},
      {"weak-kam", cmd_weak_kam},       {"action", cmd_action}, {"subsolution", cmd_subsolution},
      {"periodic", cmd_periodic},       {"trichotomy", cmd_trichotomy}, {"bifurcate", cmd_bifurcate}};
  return table;
}

void write_manifest(const std::filesystem::path& out, const RunManifest& m) {
  std::ofstream f(out / "manifest", std::ios::binary | std::ios::trunc);
  if (!f) return;
  f << "command=" << m.command << '\n'
    << "config_hash=" << hex(m.config_hash) << '\n'
    << "started=" << m.started << '\n'
    << "finished=" << m.finished << '\n'
    << "exit_status=" << m.exit_status << '\n'
    << "message=" << m.message << '\n';
  for (const std::string& file : m.files) f << "file=" << file << '\n';
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names = {"check-model", "orbit",    "evolve",     "weak-kam", "action",
                                                 "subsolution", "periodic", "trichotomy", "bifurcate"};
  return names;
}

int exit_code_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AssumptionViolated:
    case ErrorCode::TurningPoint:
    case ErrorCode::NonPositiveA: return 2;
    case ErrorCode::NotConverged:
    case ErrorCode::InnerNotConverged: return 3;
    case ErrorCode::ConfigError:
    case ErrorCode::ParseError: return 4;
    default: return 1;
  }
}

int run(const std::string& command, const std::string& config_path, const RunFlags& flags, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = ExperimentConfig::load(config_path);
  } catch (const Error& e) {
    err << "chjlab: " << e.what() << '\n';
    RunManifest m{command, 0, wall_time(), wall_time(), {"manifest"}, exit_code_for(e.code()), e.what()};
    std::error_code ec;
    std::filesystem::create_directories(flags.out_dir, ec);
    if (!ec) write_manifest(flags.out_dir, m);
    return m.exit_status;
  }
  return run(command, config, flags, err);
}

int run(const std::string& command, const ExperimentConfig& config, const RunFlags& flags, std::ostream& err) {
  RunManifest manifest;
  manifest.command = command;
  manifest.config_hash = config.hash();
  manifest.started = wall_time();
  std::string out_dir = flags.out_dir;
  if (out_dir == "." && config.has("output.dir")) out_dir = config.text("output.dir", ".");
  const std::filesystem::path out(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) {
    err << "chjlab: cannot create output directory " << out_dir << ": " << ec.message() << '\n';
    return 1;
  }

  std::vector<std::string> files;
  int status = 0;
  try {
    const auto it = dispatch().find(command);
    if (it == dispatch().end()) throw Error(ErrorCode::ConfigError, "unknown command '" + command + "'");
    // The sweep supplies lambda itself; the frozen model used for --normalize-c does not depend on it.
    const bool sweep_without_lambda = command == "bifurcate" && !config.has("model.lambda");
    Context ctx{config, flags, out, build_model(config, sweep_without_lambda ? std::optional(0.0) : std::nullopt),
                std::nullopt, {}};
    if (flags.normalize_c) {
      CriticalValueOptions co;
      co.n = config.integer("critical.n", co.n);
      co.T = config.positive("critical.T", co.T);
      co.slope_tol = config.positive("critical.slope_tol", co.slope_tol);
      co.bounds = build_bounds(config);
      const CriticalValueEstimate c = estimate_critical_value(ctx.model, co);
      ctx.critical_shift = c.c;
      ctx.model = ctx.model.shifted(c.c);
      write_key_values(ctx.path("critical_value.txt"),
                       {{"c", fmt(c.c)}, {"c_short_window", fmt(c.c_short_window)}, {"disagreement", fmt(c.disagreement)}});
    }
    try {
      it->second(ctx);
    } catch (...) {
      files = ctx.files;
      throw;
    }
    files = ctx.files;
    manifest.message = "ok";
  } catch (const Error& e) {
    status = exit_code_for(e.code());
    manifest.message = e.what();
    err << "chjlab " << command << ": " << manifest.message << '\n';
  } catch (const std::exception& e) {
    status = 1;
    manifest.message = e.what();
    err << "chjlab " << command << ": " << e.what() << '\n';
  }
  // Drop names of files that never got created (a writer threw before opening).
  std::erase_if(files, [&](const std::string& f) { return !std::filesystem::exists(out / f); });
  manifest.files = files;
  if (flags.plot && status == 0 && !emit_plot_script(manifest, out.string()).empty()) {
    manifest.files.push_back("plot.gp");
  }
  manifest.files.push_back("manifest");
  manifest.exit_status = status;
  manifest.finished = wall_time();
  write_manifest(out, manifest);
  return status;
}

}  // namespace chj::cli
