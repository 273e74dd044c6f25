#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sirsynth/grid.hpp"

using namespace sirsynth;

namespace {
ProblemBounds table1_bounds() {
  ProblemBounds b;
  b.S0_min = 0.50;
  b.S0_max = 0.80;
  b.I0_min = 0.055;
  b.I0_max = 0.085;
  b.SS_min = 0.45;
  b.IS_max = 0.10;
  b.SF_min = 0.60;
  b.IF_max = 0.05;
  return b;
}
}  // namespace

TEST_CASE("grid geometry indexing") {
  const GridGeometry geom(Grid{0.01, 0.01});
  CHECK(geom.state_count() == 5151);  // triangular count for eta = 0.01
  CHECK(geom.n_max() == 100);
  CHECK(geom.m_max(0) == 100);
  CHECK(geom.m_max(100) == 0);
  for (std::size_t idx : {std::size_t{0}, std::size_t{100}, std::size_t{101}, std::size_t{5150}}) {
    const SymbolicState s = geom.state(idx);
    CHECK(geom.index(s) == idx);
    CHECK(geom.valid(s));
  }
  CHECK(geom.n_limit(0) == 100);
  CHECK(geom.n_limit(100) == 0);
  CHECK(geom.n_limit(101) == -1);
}

TEST_CASE("grid sets for the reference bounds") {
  const GridSets sets = build_grid_sets(table1_bounds(), Grid{0.01, 0.01});
  const GridGeometry& geom = sets.geom;

  SECTION("terminal set is the interior-shrunk rectangle") {
    for (std::size_t idx = 0; idx < geom.state_count(); ++idx) {
      const SymbolicState s = geom.state(idx);
      const bool expect = s.n >= 61 && s.m >= 1 && s.m <= 4 && (s.n + s.m) <= 98;
      CHECK(static_cast<bool>(sets.is_target[idx]) == expect);
    }
  }

  SECTION("boundary grid point is excluded by the full-margin interior") {
    CHECK(!sets.is_target[geom.index({60, 3})]);
    CHECK(sets.is_target[geom.index({61, 3})]);
    CHECK(!sets.is_target[geom.index({70, 5})]);  // I + eta above the cap
    CHECK(sets.is_target[geom.index({70, 4})]);
  }

  SECTION("safe set margins") {
    CHECK(!sets.is_safe[geom.index({45, 5})]);
    CHECK(sets.is_safe[geom.index({46, 5})]);
    CHECK(!sets.is_safe[geom.index({50, 10})]);
    CHECK(sets.is_safe[geom.index({50, 9})]);
    CHECK(!sets.is_safe[geom.index({50, 0})]);  // the I = 0 row has no eta-margin in X
  }

  SECTION("initial set covers the initial box by half cells") {
    // every grid state within the half-cell inflation is initial
    for (std::int32_t n = 50; n <= 80; ++n)
      for (std::int32_t m = 5; m <= 9; ++m)
        CHECK(sets.is_initial[geom.index({n, m})]);
    CHECK(!sets.is_initial[geom.index({49, 7})]);
    CHECK(!sets.is_initial[geom.index({81, 7})]);
    CHECK(!sets.is_initial[geom.index({60, 4})]);
    CHECK(!sets.is_initial[geom.index({60, 10})]);
    // every concrete initial point has a grid state within the half cell
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> us(0.50, 0.80), ui(0.055, 0.085);
    for (int i = 0; i < 1000; ++i) {
      const double S = us(rng), I = ui(rng);
      bool covered = false;
      for (std::size_t idx : sets.initial_states) {
        const State pt = geom.point(geom.state(idx));
        if (std::abs(pt.S - S) <= 0.005 + 1e-12 && std::abs(pt.I - I) <= 0.005 + 1e-12)
          covered = true;
      }
      REQUIRE(covered);
    }
  }

  SECTION("infeasible configurations are rejected") {
    ProblemBounds b = table1_bounds();
    b.SF_min = 0.97;  // interior of X_F empties out on the simplex
    b.IF_max = 0.05;
    CHECK_THROWS(build_grid_sets(b, Grid{0.01, 0.01}));
  }
}

TEST_CASE("bounds validation") {
  ProblemBounds b = table1_bounds();
  CHECK_NOTHROW(b.validate());
  SECTION("terminal threshold ordering") {
    b.SF_min = 0.40;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  }
  SECTION("initial box inside the safe set") {
    b.I0_max = 0.2;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  }
  SECTION("initial box disjoint from the terminal set") {
    b.I0_min = 0.03;
    CHECK_THROWS_AS(b.validate(), std::invalid_argument);
  }
}

TEST_CASE("threshold validation") {
  Thresholds th;
  th.multiples = {1, 2, 3};
  CHECK_NOTHROW(th.validate(Grid{0.01, 0.01}));
  th.multiples = {2, 2};
  CHECK_THROWS(th.validate(Grid{0.01, 0.01}));
  th.multiples = {0, 1};
  CHECK_THROWS(th.validate(Grid{0.01, 0.01}));
}
