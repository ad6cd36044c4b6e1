#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "chj/cli.hpp"

namespace chj::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw Error(ErrorCode::ConfigError, key + ": not a number: '" + text + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "model.family", "model.a", "model.b", "model.V", "model.lambda", "model.kappa", "model.delta",
      "grid.n",
      "evolve.dt", "evolve.T", "evolve.snapshot_every", "evolve.phi", "evolve.direction",
      "caps.U_cap",
      "search.V_max", "search.P_max", "search.U_max", "search.velocity_samples",
      "check.nx", "check.np", "check.nu",
      "critical.T", "critical.n", "critical.slope_tol",
      "orbit.p_guess", "orbit.u_guess", "orbit.steps", "orbit.b_min_tol",
      "weak_kam.tol", "weak_kam.T_max", "weak_kam.backward_tol", "weak_kam.backward_T_max",
      "action.x0", "action.u0", "action.x", "action.t", "action.direction", "action.shooting",
      "action.cross_tol", "action.p_samples", "action.target_u",
      "subsolution.x0", "subsolution.t_samples", "subsolution.n", "subsolution.fd_tol",
      "periodic.mode", "periodic.x0", "periodic.phi", "periodic.slices", "periodic.steps_per_period",
      "periodic.n_max", "periodic.tol", "periodic.min_shift", "periodic.renormalize",
      "trichotomy.phi", "trichotomy.T_budget", "trichotomy.escape_level", "trichotomy.snapshot_every",
      "bifurcate.lambdas", "bifurcate.fixed_point_tol", "bifurcate.x0",
      "run.jobs", "output.dir"};
  return keys;
}

ExperimentConfig ExperimentConfig::parse(std::string_view text) {
  ExperimentConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": expected 'section.key = value'");
    }
    const std::string key = trim(std::string_view(t).substr(0, eq));
    const std::string value = trim(std::string_view(t).substr(eq + 1));
    if (key.find('.') == std::string::npos) {
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(lineno) + ": key '" + key + "' has no section");
    }
    cfg.set(key, value);
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigError, "cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
    throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
  }
  values_[key] = value;
}

double ExperimentConfig::number(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number(key, it->second);
}

double ExperimentConfig::positive(const std::string& key, double fallback) const {
  const double v = number(key, fallback);
  if (!(v > 0.0)) throw Error(ErrorCode::ConfigError, key + " must be positive");
  return v;
}

int ExperimentConfig::integer(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  int v = 0;
  const std::string& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::ConfigError, key + ": not an integer: '" + s + "'");
  }
  return v;
}

std::string ExperimentConfig::text(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

bool ExperimentConfig::flag(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw Error(ErrorCode::ConfigError, key + ": expected true or false");
}

std::vector<double> ExperimentConfig::list(const std::string& key) const {
  std::vector<double> out;
  const auto it = values_.find(key);
  if (it == values_.end()) return out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(parse_number(key, t));
  }
  return out;
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [k, v] : values_) {
    feed(k);
    feed("=");
    feed(v);
    feed("\n");
  }
  return h;
}

HamiltonianModel build_model(const ExperimentConfig& config, std::optional<double> lambda) {
  const std::string family = config.text("model.family", "quadratic");
  if (family != "quadratic") throw Error(ErrorCode::ConfigError, "model.family must be 'quadratic'");
  if (!lambda && !config.has("model.lambda")) throw Error(ErrorCode::ConfigError, "model.lambda is required");
  const double lam = lambda.value_or(config.number("model.lambda", 0.0));
  const Expression a = Expression::parse(config.text("model.a", "1"));
  const Expression b = Expression::parse(config.text("model.b", "0"));
  const Expression v = Expression::parse(config.text("model.V", "0"));
  std::optional<double> kappa;
  std::optional<double> delta;
  if (config.has("model.kappa")) kappa = config.positive("model.kappa", 1.0);
  if (config.has("model.delta")) delta = config.positive("model.delta", 1.0);
  const std::string name = "quadratic(a=" + a.source() + ", b=" + b.source() + ", V=" + v.source() +
                           ", lambda=" + format_double(lam) + ")";
  return make_quadratic_model(Coefficient::from_expression(a), Coefficient::from_expression(b),
                              Coefficient::from_expression(v), lam, kappa, delta, name);
}

SearchBounds build_bounds(const ExperimentConfig& config) {
  SearchBounds b;
  b.p_max = config.positive("search.P_max", b.p_max);
  b.v_max = config.positive("search.V_max", b.v_max);
  b.u_max = config.positive("search.U_max", b.u_max);
  return b;
}

SchemeOptions build_scheme(const ExperimentConfig& config) {
  SchemeOptions s;
  s.bounds = build_bounds(config);
  s.dt = config.positive("evolve.dt", s.dt);
  s.u_cap = config.positive("caps.U_cap", s.u_cap);
  s.velocity_samples = config.integer("search.velocity_samples", s.velocity_samples);
  if (s.velocity_samples < 3) throw Error(ErrorCode::ConfigError, "search.velocity_samples must be >= 3");
  return s;
}

}  // namespace chj::cli
