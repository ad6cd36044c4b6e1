#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <vector>

#include "chj/semigroup.hpp"
#include "chj/simd/lax_oleinik_kernel.hpp"

using namespace chj;
namespace simd = chj::simd;

namespace {

struct RandomProblem {
  int n = 0;
  int pad = 0;
  double dt = 0.0;
  std::vector<double> ext;
  simd::QuadraticNodeTable table;
  std::vector<double> velocities;
  double v_max = 10.0;
  double spacing = 0.0;
  int golden = 0;

  simd::MinimizeRequest request() const {
    simd::MinimizeRequest r;
    r.phi_ext = ext.data();
    r.pad = pad;
    r.n = n;
    r.dt = dt;
    r.cells_per_velocity = dt * n;
    r.table = &table;
    r.velocities = velocities.data();
    r.n_velocities = static_cast<int>(velocities.size());
    r.v_max = v_max;
    r.spacing = spacing;
    r.golden_iterations = golden;
    return r;
  }
};

/// `kind` 0: smooth, 1: rough with kinks and capped plateaus, 2: constant (all ties).
RandomProblem make_problem(std::mt19937_64& rng, int n, int kind) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  RandomProblem p;
  p.n = n;
  p.dt = (0.2 + 0.8 * (U(rng) + 1.0) / 2.0) * 16.0 / (n * p.v_max);
  p.pad = static_cast<int>(std::ceil(p.v_max * p.dt * n)) + 2;
  std::vector<double> phi(n);
  const double a1 = U(rng), a2 = U(rng), ph = U(rng);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    switch (kind) {
      case 0: phi[i] = 0.1 * a1 * std::sin(2 * std::numbers::pi * (x + ph)) + 0.05 * a2 * std::cos(6 * std::numbers::pi * x); break;
      case 1: phi[i] = (U(rng) > 0.7) ? 50.0 : 0.2 * std::fabs(U(rng)); break;
      default: phi[i] = 0.25; break;
    }
  }
  p.ext.resize(n + 2 * p.pad);
  for (int j = -p.pad; j < n + p.pad; ++j) p.ext[j + p.pad] = phi[((j % n) + n) % n];
  for (int i = 0; i < n; ++i) {
    const double a = 1.0 + 0.5 * U(rng);
    p.table.drift.push_back(a * U(rng));
    p.table.half_inv_a.push_back(1.0 / (2.0 * a));
    p.table.potential.push_back(0.3 * U(rng));
  }
  const int S = 129;
  for (int k = 0; k < S; ++k) p.velocities.push_back(-p.v_max + 2.0 * p.v_max * k / (S - 1));
  std::stable_sort(p.velocities.begin(), p.velocities.end(), [](double a, double b) {
    return std::fabs(a) != std::fabs(b) ? std::fabs(a) < std::fabs(b) : a > b;
  });
  p.spacing = 2.0 * p.v_max / (S - 1);
  p.golden = static_cast<int>(std::ceil(std::log(1e-10 / (2.0 * p.spacing)) / std::log(simd::kGoldenRatio)));
  return p;
}

struct Outputs {
  std::vector<double> cost, arg, foot;
  explicit Outputs(int n) : cost(n), arg(n), foot(n) {}
  simd::MinimizeOutput view() { return {cost.data(), arg.data(), foot.data()}; }
};

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double interp(const RandomProblem& p, int i, double v) {
  const double c = v * p.dt * p.n;
  const double r = std::nearbyint(c);
  const double s = i - (std::fabs(c - r) < simd::kSnapCells ? r : c);
  const double fl = std::floor(s);
  const int j = static_cast<int>(fl);
  const double th = s - fl;
  const double a = p.ext[j + p.pad];
  const double b = p.ext[j + 1 + p.pad];
  return a + th * (b - a);
}

}  // namespace

TEST_CASE("backend resolution") {
  CHECK(simd::resolve(simd::Backend::scalar) == simd::Backend::scalar);
  const simd::Backend best = simd::resolve(simd::Backend::automatic);
  CHECK(best == (simd::avx2_available() ? simd::Backend::avx2 : simd::Backend::scalar));
  CHECK(simd::resolve(simd::Backend::avx2) == best);
  CHECK(std::string(simd::name(simd::Backend::scalar)) == "scalar");
}

TEST_CASE("scalar and AVX2 kernels are bit-identical on random problems") {
  if (!simd::avx2_available()) SKIP("AVX2 not available on this machine");
  std::mt19937_64 rng(20240607);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = (trial % 3 == 0) ? 64 : (trial % 3 == 1 ? 128 : 256);
    const RandomProblem p = make_problem(rng, n, trial % 3);
    Outputs s(n), v(n);
    simd::minimize_scalar(p.request(), s.view());
    simd::minimize_avx2(p.request(), v.view());
    INFO("trial " << trial);
    CHECK(bit_equal(s.cost, v.cost));
    CHECK(bit_equal(s.arg, v.arg));
    CHECK(bit_equal(s.foot, v.foot));
  }
}

TEST_CASE("kernel minimum is within the sampling bound of the exact minimum") {
  // On each foot cell the interpolant is linear in v, so the cost is a convex
  // parabola there and its minimum is available in closed form.
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 6; ++trial) {
    const RandomProblem p = make_problem(rng, 64, trial % 2);
    Outputs s(64);
    simd::minimize_scalar(p.request(), s.view());
    double lip = 0.0;
    for (std::size_t j = 1; j < p.ext.size(); ++j) lip = std::max(lip, std::fabs(p.ext[j] - p.ext[j - 1]) * p.n);
    const double cpv = p.dt * p.n;
    for (int i = 0; i < p.n; ++i) {
      const double d = p.table.drift[i];
      const double hia = p.table.half_inv_a[i];
      auto cost = [&](double v) { return interp(p, i, v) + p.dt * ((v - d) * (v - d) * hia - p.table.potential[i]); };
      double exact = INFINITY;
      const int lo = static_cast<int>(std::floor(i - p.v_max * cpv));
      const int hi = static_cast<int>(std::ceil(i + p.v_max * cpv));
      for (int j = lo; j < hi; ++j) {
        // feet in [j, j + 1] <=> v in [(i - j - 1) / cpv, (i - j) / cpv]
        const double va = std::max(-p.v_max, (i - j - 1) / cpv);
        const double vb = std::min(p.v_max, (i - j) / cpv);
        if (va > vb) continue;
        const double slope = -(p.ext[j + 1 + p.pad] - p.ext[j + p.pad]) * cpv;  // d interp / dv
        const double vertex = d - slope / (2.0 * p.dt * hia);
        for (double v : {va, vb, std::clamp(vertex, va, vb)}) exact = std::min(exact, cost(v));
      }
      const double bound = 0.5 * p.spacing * p.dt * (lip + 2.0 * hia * (p.v_max + std::fabs(d)));
      INFO("trial " << trial << " node " << i);
      // feet within kSnapCells of a node are snapped onto it
      const double snap = simd::kSnapCells * lip / p.n + 1e-13;
      CHECK(s.cost[i] >= exact - snap);
      CHECK(s.cost[i] <= exact + bound);
      CHECK(s.foot[i] == Catch::Approx(interp(p, i, s.arg[i])).margin(1e-15));
    }
  }
}

TEST_CASE("ties resolve to the smallest speed") {
  std::mt19937_64 rng(3);
  RandomProblem p = make_problem(rng, 64, 2);
  std::fill(p.table.drift.begin(), p.table.drift.end(), 0.0);
  Outputs s(64);
  simd::minimize_scalar(p.request(), s.view());
  for (int i = 0; i < 64; ++i) CHECK(std::fabs(s.arg[i]) <= 1e-9);
}

TEST_CASE("scheme steps agree across backends over many steps, including pinned data") {
  if (!simd::avx2_available()) SKIP("AVX2 not available on this machine");
  const HamiltonianModel m = make_constant_drift_with_potential(1.0, 0.2, 0.5);
  const Grid g = Grid::make(128);
  SchemeOptions a;
  a.backend = simd::Backend::scalar;
  SchemeOptions b = a;
  b.backend = simd::Backend::avx2;
  const LaxOleinikScheme sa(m, g, a);
  const LaxOleinikScheme sb(m, g, b);
  REQUIRE(sa.backend() == simd::Backend::scalar);
  REQUIRE(sb.backend() == simd::Backend::avx2);
  for (const Field& start : {Field::from_function(g, [](double x) { return 0.1 * std::sin(2 * std::numbers::pi * x); }),
                             Field::pinned(g, 0.3, 0.0, 50.0)}) {
    Field fa = start;
    Field fb = start;
    for (int k = 0; k < 200; ++k) {
      fa = sa.step(fa);
      fb = sb.step(fb);
    }
    CHECK(bit_equal(fa.values, fb.values));
    CHECK(fa.cap_mask == fb.cap_mask);
  }
}

TEST_CASE("fast path agrees with the generic callback path") {
  const HamiltonianModel m = make_constant_drift_with_potential(1.0, 0.2, 0.5);
  const Grid g = Grid::make(64);
  SchemeOptions fast;
  SchemeOptions generic;
  generic.force_generic = true;
  const LaxOleinikScheme sf(m, g, fast);
  const LaxOleinikScheme sg(m, g, generic);
  REQUIRE(sf.uses_fast_path());
  REQUIRE_FALSE(sg.uses_fast_path());
  Field a = Field::from_function(g, [](double x) { return 0.05 * std::cos(2 * std::numbers::pi * x); });
  Field b = a;
  for (int k = 0; k < 20; ++k) {
    a = sf.step(a);
    b = sg.step(b);
  }
  CHECK(sup_distance(a, b) <= 1e-12);
}
