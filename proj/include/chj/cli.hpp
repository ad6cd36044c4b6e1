#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chj/error.hpp"
#include "chj/flow.hpp"
#include "chj/model.hpp"
#include "chj/periodic.hpp"
#include "chj/semigroup.hpp"

namespace chj::cli {

/// Flat `section.key = value` experiment description. Blank lines and lines
/// starting with `#` are ignored; unknown keys are rejected at parse time.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  double number(const std::string& key, double fallback) const;
  /// As number(), but the value must be > 0.
  double positive(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::vector<double> list(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  /// FNV-1a of the normalised key/value pairs.
  std::uint64_t hash() const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Every key the runner understands.
const std::vector<std::string>& known_keys();

/// Model from the `model.*` section; `lambda` overrides model.lambda.
HamiltonianModel build_model(const ExperimentConfig& config, std::optional<double> lambda = std::nullopt);
SearchBounds build_bounds(const ExperimentConfig& config);
SchemeOptions build_scheme(const ExperimentConfig& config);

struct RunFlags {
  std::string out_dir = ".";
  bool normalize_c = false;
  int jobs = 0;  ///< 0: config value, else logical cores
  bool plot = false;
};

struct RunManifest {
  std::string command;
  std::uint64_t config_hash = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> files;
  int exit_status = 0;
  std::string message;
};

const std::vector<std::string>& commands();

/// Exit codes: 0 success, 1 other failure, 2 assumption check failed,
/// 3 not converged, 4 configuration error.
int exit_code_for(ErrorCode code) noexcept;

int run(const std::string& command, const std::string& config_path, const RunFlags& flags,
        std::ostream& err);
int run(const std::string& command, const ExperimentConfig& config, const RunFlags& flags, std::ostream& err);

/// Writes `plot.gp` (gnuplot) next to the CSVs named in the manifest and
/// returns its path, or an empty string when the manifest names no CSV.
/// The script is never executed.
std::string emit_plot_script(const RunManifest& manifest, const std::string& out_dir);

enum class SelftestLevel { fast, full };
/// Runs the built-in check suites; `seeded_fault` flips the sign of d_u in
/// every model the suites build. Returns 0 iff all checks pass.
int selftest(SelftestLevel level, bool seeded_fault, std::ostream& out);

// CSV and report writers (17 significant digits, '\n', no locale).
std::string format_double(double v);
void write_field_csv(const std::string& path, const Field& field);
void write_trace_csv(const std::string& path, const EvolutionTrace& trace);
void write_orbit_csv(const std::string& path, const OrbitResult& orbit, const Grid& grid);
void write_periodic_csv(const std::string& path, const PeriodicSolution& w);
void write_bifurcation_csv(const std::string& path, const BifurcationDiagram& diagram);
void write_key_values(const std::string& path, const std::vector<std::pair<std::string, std::string>>& entries);

}  // namespace chj::cli
