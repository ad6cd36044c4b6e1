#include <cmath>
#include <string>

#include "chj/error.hpp"
#include "chj/model.hpp"
#include "chj/semigroup.hpp"

namespace chj {

namespace {

/// Least-squares slope of y against t over samples with t >= t_from.
double window_slope(const std::vector<double>& t, const std::vector<double>& y, double t_from) {
  double n = 0, st = 0, sy = 0, stt = 0, sty = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_from) continue;
    n += 1;
    st += t[i];
    sy += y[i];
    stt += t[i] * t[i];
    sty += t[i] * y[i];
  }
  const double den = n * stt - st * st;
  if (n < 2 || den == 0.0) throw Error(ErrorCode::InvalidArgument, "critical value window holds too few samples");
  return (n * sty - st * sy) / den;
}

}  // namespace

CriticalValueEstimate estimate_critical_value(const HamiltonianModel& model, const CriticalValueOptions& options) {
  const Grid grid = Grid::make(options.n);
  const HamiltonianModel frozen = model.frozen();
  SchemeOptions so;
  so.bounds = options.bounds;
  so.dt = options.dt > 0.0 ? options.dt : max_time_step(frozen, grid, so);
  const long steps = std::max(1L, static_cast<long>(std::ceil(options.T / so.dt - 1e-9)));
  so.dt = options.T / steps;
  const LaxOleinikScheme scheme(frozen, grid, so);

  std::vector<double> times;
  std::vector<double> mins;
  Field current = Field::constant(grid, 0.0);
  for (long k = 1; k <= steps; ++k) {
    current = scheme.step(current);
    times.push_back(k * so.dt);
    mins.push_back(current.min());
  }
  CriticalValueEstimate est;
  est.c = -window_slope(times, mins, 0.5 * options.T);
  est.c_short_window = -window_slope(times, mins, 0.75 * options.T);
  est.disagreement = std::fabs(est.c - est.c_short_window);
  if (est.disagreement > options.slope_tol) {
    throw Error(ErrorCode::NotConverged, "critical value windows disagree by " + std::to_string(est.disagreement));
  }
  return est;
}

}  // namespace chj
