#include <algorithm>
#include <string>

#include "chj/error.hpp"
#include "chj/periodic.hpp"

namespace chj {

PeriodicSolution min_shift_combine(const PeriodicSolution& w, int n) {
  const int m = static_cast<int>(w.slices.size());
  if (n < 1 || m == 0 || m % n != 0) {
    throw Error(ErrorCode::SliceCountIncompatible,
                "cannot split " + std::to_string(m) + " slices into " + std::to_string(n) + " shifts");
  }
  if (n == 1) return w;
  const int q = m / n;
  // Index m is the closing slice (t = T) and -1 the slice before t = 0.
  auto slice = [&](int k) -> const Field& {
    if (k < 0) return w.before.values.empty() ? w.slices[m - 1] : w.before;
    return k == m ? w.closing : w.slices[k];
  };
  auto combine = [&](int k) {
    Field v = slice(k);
    for (int j = 1; j < n; ++j) {
      const Field& s = slice(k + j * q);
      for (int i = 0; i < v.grid.n; ++i) {
        if (s.capped(i)) continue;
        if (v.capped(i) || s.values[i] < v.values[i]) {
          v.values[i] = s.values[i];
          if (v.has_mask()) v.cap_mask[i] = 0;
        }
      }
    }
    return v;
  };
  PeriodicSolution out = w;
  out.slices.clear();
  for (int k = 0; k < q; ++k) out.slices.push_back(combine(k));
  out.closing = combine(q);
  out.before = combine(-1);
  out.period_T = w.period_T / n;
  out.detected_period.reset();
  out.detected_residual.reset();
  out.cauchy_history.clear();
  refresh_diagnostics(out);
  return out;
}

}  // namespace chj
