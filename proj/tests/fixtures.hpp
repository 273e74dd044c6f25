/*
 * fixtures.hpp
 *
 * Shared test fixture: the reference parameterization on the standard grid
 * (with a shortened crossing horizon so unit tests stay fast) plus its
 * synthesis result, built once per test binary.
 */

#ifndef SIRSYNTH_TESTS_FIXTURES_HPP_
#define SIRSYNTH_TESTS_FIXTURES_HPP_

#include "sirsynth/games.hpp"

namespace fixtures {

using namespace sirsynth;

inline ModelParams table1_params() {
  ModelParams p;
  p.gamma = 0.15;
  p.xi = 0.02;
  p.u_levels = {0.26, 0.22, 0.17};
  return p;
}

inline ProblemBounds table1_bounds() {
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

struct Table1Fixture {
  SymbolicModel model;
  SynthesisResult synth;
};

inline const Table1Fixture& table1_fixture() {
  static const Table1Fixture f = [] {
    Table1Fixture out;
    Thresholds th;
    th.multiples = {1, 2, 3};
    AbstractionConfig cfg;
    cfg.integrator.horizon = 200.0;
    out.model = build_symbolic_model(table1_bounds(), Grid{0.01, 0.01}, th, table1_params(), cfg);
    out.synth = synthesize(out.model);
    return out;
  }();
  return f;
}

}  // namespace fixtures

#endif  // SIRSYNTH_TESTS_FIXTURES_HPP_
