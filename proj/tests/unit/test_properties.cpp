#include <catch_amalgamated.hpp>

#include "../common/property_suites.hpp"

using namespace chj;
using chj::testing::PropertyConfig;
using chj::testing::SuiteOutcome;

namespace {

PropertyConfig small() {
  PropertyConfig c;
  c.n = 64;
  c.dt = 1.0 / 256.0;
  c.pairs = 6;
  c.markov_tuples = 2;
  c.duality_tuples = 3;
  return c;
}

void check(const SuiteOutcome& s) {
  INFO(s.name << ": measured " << s.measured << ", bound " << s.bound);
  CHECK(s.pass);
}

}  // namespace

TEST_CASE("random pairs are ordered") {
  std::mt19937_64 rng(1);
  const Grid g = Grid::make(64);
  for (int k = 0; k < 10; ++k) {
    const auto p = chj::testing::random_pair(g, rng);
    for (int i = 0; i < g.n; ++i) CHECK(p.psi.values[i] <= p.phi.values[i]);
  }
}

TEST_CASE("monotonicity and expansiveness on a coarse grid") {
  for (const SuiteOutcome& s : chj::testing::order_suites(make_constant_drift_with_potential(1.0, 0.2, 0.5), small())) {
    check(s);
  }
}

TEST_CASE("semigroup law on a coarse grid") {
  check(chj::testing::semigroup_suite(make_constant_drift_with_potential(1.0, 0.2, 0.5), small()));
}

TEST_CASE("Markov property on a coarse grid") {
  check(chj::testing::markov_suite(make_constant_drift(1.0, 0.5), small()));
}

TEST_CASE("duality on a coarse grid") {
  check(chj::testing::duality_suite(make_constant_drift(1.0, 0.5), small()));
}

TEST_CASE("fixed-point characterization on a coarse grid") {
  const HamiltonianModel m = make_constant_drift_with_potential(1.0, 0.2, 0.5);
  check(chj::testing::fixed_point_suite(m, shoot_stationary_orbit(m), small()));
}
