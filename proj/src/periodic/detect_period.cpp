#include <algorithm>
#include <cmath>

#include "chj/error.hpp"
#include "chj/periodic.hpp"
#include "chj/simd/lax_oleinik_kernel.hpp"

namespace chj {

namespace {

/// Linear interpolation of the trace in time at node i.
class TraceInterpolant {
 public:
  explicit TraceInterpolant(const EvolutionTrace& tr) : tr_(tr) {}

  /// Returns the bracketing index k and weight so that value = (1-a) s_k + a s_{k+1}.
  std::pair<std::size_t, double> locate(double t) const {
    const auto& ts = tr_.times;
    auto it = std::upper_bound(ts.begin(), ts.end(), t);
    std::size_t k = it == ts.begin() ? 0 : static_cast<std::size_t>(it - ts.begin()) - 1;
    if (k + 1 >= ts.size()) k = ts.size() - 2;
    const double a = (t - ts[k]) / (ts[k + 1] - ts[k]);
    return {k, std::clamp(a, 0.0, 1.0)};
  }

  double value(std::size_t k, double a, int i) const {
    return (1.0 - a) * tr_.snapshots[k].values[i] + a * tr_.snapshots[k + 1].values[i];
  }

 private:
  const EvolutionTrace& tr_;
};

}  // namespace

PeriodEstimate detect_period(const EvolutionTrace& trace, double T_hint) {
  if (trace.snapshots.size() < 3 || !(T_hint > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "period detection needs a trace and a positive hint");
  }
  const double t_begin = trace.times.front();
  const double t_end = trace.times.back();
  if (t_end - t_begin < 3.0 * T_hint * (1.0 - 1e-9)) {
    throw Error(ErrorCode::InvalidArgument, "trace must cover at least three hinted periods");
  }
  const double t_cut = 0.5 * (t_begin + t_end);
  const TraceInterpolant interp(trace);
  const int n = trace.snapshots.front().grid.n;

  auto objective = [&](double s) {
    double worst = 0.0;
    for (std::size_t k = 0; k < trace.times.size(); ++k) {
      const double t = trace.times[k];
      if (t < t_cut || t + s > t_end) continue;
      const auto [j, a] = interp.locate(t + s);
      const Field& base = trace.snapshots[k];
      for (int i = 0; i < n; ++i) {
        if (base.capped(i)) continue;
        worst = std::max(worst, std::fabs(interp.value(j, a, i) - base.values[i]));
      }
    }
    return worst;
  };

  constexpr int scan = 41;
  const double lo0 = 0.5 * T_hint;
  const double hi0 = 1.5 * T_hint;
  std::vector<double> ss(scan);
  std::vector<double> fs(scan);
  int best = 0;
  for (int k = 0; k < scan; ++k) {
    ss[k] = lo0 + (hi0 - lo0) * k / (scan - 1);
    fs[k] = objective(ss[k]);
    if (fs[k] < fs[best]) best = k;
  }
  const auto [fmin, fmax] = std::minmax_element(fs.begin(), fs.end());
  if (*fmax - *fmin < 1e-12) throw Error(ErrorCode::FlatObjective, "trace is stationary; period undefined");

  double lo = ss[std::max(0, best - 1)];
  double hi = ss[std::min(scan - 1, best + 1)];
  const double g = simd::kGoldenRatio;
  double c = hi - g * (hi - lo);
  double d = lo + g * (hi - lo);
  double fc = objective(c);
  double fd = objective(d);
  while (hi - lo > 1e-7 * T_hint) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - g * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + g * (hi - lo);
      fd = objective(d);
    }
  }
  PeriodEstimate est{0.5 * (lo + hi), 0.0};
  est.residual = objective(est.period);
  if (fs[best] < est.residual) est = {ss[best], fs[best]};
  return est;
}

}  // namespace chj
