#include <algorithm>
#include <cmath>
#include <string>

#include "chj/error.hpp"
#include "chj/semigroup.hpp"

namespace chj {

Grid Grid::make(int n) {
  if (n < 64 || (n & (n - 1)) != 0) {
    throw Error(ErrorCode::InvalidArgument, "grid size must be a power of two >= 64, got " + std::to_string(n));
  }
  return Grid{n};
}

int Grid::wrap(long i) const {
  const long r = i % n;
  return static_cast<int>(r < 0 ? r + n : r);
}

int Grid::nearest(double xq) const {
  const double r = xq - std::floor(xq);
  return wrap(std::lround(r * n));
}

Field Field::constant(Grid grid, double value) { return Field{grid, std::vector<double>(grid.n, value), {}}; }

Field Field::from_function(Grid grid, const std::function<double(double)>& f) {
  Field out{grid, std::vector<double>(grid.n), {}};
  for (int i = 0; i < grid.n; ++i) out.values[i] = f(grid.x(i));
  return out;
}

Field Field::pinned(Grid grid, double x0, double value, double cap) {
  Field out{grid, std::vector<double>(grid.n, cap), std::vector<std::uint8_t>(grid.n, 1)};
  const int i0 = grid.nearest(x0);
  out.values[i0] = value;
  out.cap_mask[i0] = 0;
  return out;
}

double Field::sup_norm() const {
  double m = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    if (!capped(i)) m = std::max(m, std::fabs(values[i]));
  }
  return m;
}

double Field::min() const {
  double m = INFINITY;
  for (int i = 0; i < grid.n; ++i) {
    if (!capped(i)) m = std::min(m, values[i]);
  }
  return m;
}

double Field::max() const {
  double m = -INFINITY;
  for (int i = 0; i < grid.n; ++i) {
    if (!capped(i)) m = std::max(m, values[i]);
  }
  return m;
}

int Field::free_count() const {
  if (!has_mask()) return grid.n;
  return static_cast<int>(std::count(cap_mask.begin(), cap_mask.end(), std::uint8_t{0}));
}

Field Field::operator-() const {
  Field out = *this;
  for (double& v : out.values) v = -v;
  return out;
}

double sup_distance(const Field& a, const Field& b) {
  if (a.grid.n != b.grid.n) throw Error(ErrorCode::InvalidArgument, "fields live on different grids");
  double m = 0.0;
  for (int i = 0; i < a.grid.n; ++i) {
    if (a.capped(i) || b.capped(i)) continue;
    m = std::max(m, std::fabs(a.values[i] - b.values[i]));
  }
  return m;
}

}  // namespace chj
