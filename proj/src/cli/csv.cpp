#include <charconv>
#include <cmath>
#include <fstream>

#include "chj/cli.hpp"

namespace chj::cli {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  return f;
}

/// Capped nodes stand for +infinity.
std::string node_value(const Field& field, int i) {
  return field.capped(i) ? std::string("inf") : format_double(field.values[i]);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_field_csv(const std::string& path, const Field& field) {
  auto f = open_out(path);
  f << "x,value\n";
  for (int i = 0; i < field.size(); ++i) f << format_double(field.grid.x(i)) << ',' << node_value(field, i) << '\n';
}

void write_trace_csv(const std::string& path, const EvolutionTrace& trace) {
  auto f = open_out(path);
  f << "t,x,value\n";
  for (std::size_t k = 0; k < trace.snapshots.size(); ++k) {
    const Field& s = trace.snapshots[k];
    const std::string t = format_double(trace.times[k]);
    for (int i = 0; i < s.size(); ++i) f << t << ',' << format_double(s.grid.x(i)) << ',' << node_value(s, i) << '\n';
  }
}

void write_orbit_csv(const std::string& path, const OrbitResult& orbit, const Grid& grid) {
  auto f = open_out(path);
  f << "x,t,p,u,B,f\n";
  for (int i = 0; i < grid.n; ++i) {
    const double x = grid.x(i);
    f << format_double(x) << ',' << format_double(orbit.t_at(x)) << ',' << format_double(orbit.p0_at(x)) << ','
      << format_double(orbit.u0_at(x)) << ',' << format_double(orbit.B_at(x)) << ',' << format_double(orbit.f_at(x))
      << '\n';
  }
}

void write_periodic_csv(const std::string& path, const PeriodicSolution& w) {
  auto f = open_out(path);
  f << "t,x,value\n";
  for (std::size_t k = 0; k < w.slices.size(); ++k) {
    const Field& s = w.slices[k];
    const std::string t = format_double(w.slice_time(static_cast<int>(k)));
    for (int i = 0; i < s.size(); ++i) f << t << ',' << format_double(s.grid.x(i)) << ',' << node_value(s, i) << '\n';
  }
}

void write_bifurcation_csv(const std::string& path, const BifurcationDiagram& diagram) {
  auto f = open_out(path);
  f << "lambda,class,amplitude,period,min_abs_B\n";
  for (const BifurcationRow& r : diagram.rows) {
    f << format_double(r.lambda) << ',' << to_string(r.cls) << ',' << format_double(r.amplitude) << ','
      << format_double(r.period) << ',' << format_double(r.min_abs_B) << '\n';
  }
}

void write_key_values(const std::string& path, const std::vector<std::pair<std::string, std::string>>& entries) {
  auto f = open_out(path);
  for (const auto& [k, v] : entries) f << k << '=' << v << '\n';
}

}  // namespace chj::cli
