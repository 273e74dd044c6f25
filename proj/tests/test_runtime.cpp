#include <catch2/catch_amalgamated.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "sirsynth/runtime.hpp"

using namespace sirsynth;
using Catch::Approx;

TEST_CASE("closed-form interval cost") {
  SECTION("single infinite interval matches the analytic value") {
    CHECK(interval_cost(0.26, 0.0, std::numeric_limits<double>::infinity(), 0.99) ==
          Approx(382.69).margin(0.01));
    CHECK(interval_cost(0.17, 0.0, std::numeric_limits<double>::infinity(), 0.99) ==
          Approx(1.0 / (0.17 * std::log(1.0 / 0.99))).margin(1e-9));
    CHECK(interval_cost(0.17, 0.0, std::numeric_limits<double>::infinity(), 0.99) ==
          Approx(585.29).margin(0.01));
  }
  SECTION("undiscounted finite horizon is T/u") {
    CHECK(interval_cost(0.2, 0.0, 50.0, 1.0) == Approx(250.0));
  }
  SECTION("intervals add up") {
    const double whole = interval_cost(0.2, 0.0, 30.0, 0.99);
    const double split = interval_cost(0.2, 0.0, 12.5, 0.99) + interval_cost(0.2, 12.5, 30.0, 0.99);
    CHECK(whole == Approx(split).margin(1e-12));
  }
}

TEST_CASE("selection configuration validation") {
  SelectionConfig sel;
  CHECK_NOTHROW(sel.validate());
  sel.lambda = 1.0;
  CHECK_THROWS_AS(sel.validate(), std::invalid_argument);  // infinite horizon needs lambda < 1
  sel.horizon_T = 100.0;
  CHECK_NOTHROW(sel.validate());
  sel.lambda = 1.5;
  CHECK_THROWS_AS(sel.validate(), std::invalid_argument);
}

namespace {
SelectionConfig default_sel() {
  SelectionConfig sel;
  sel.lambda = 0.99;
  sel.max_depth = 3;
  return sel;
}
}  // namespace

TEST_CASE("pair selection") {
  const auto& f = fixtures::table1_fixture();
  ConcretePolicy pol(f.model, f.synth);
  const ModelParams p = fixtures::table1_params();
  const IntegratorConfig cfg = f.model.config.integrator;
  const SelectionConfig sel = default_sel();

  // collect some terminal-domain states to query
  std::vector<State> terminal_states;
  const GridGeometry& geom = f.model.sets.geom;
  for (std::size_t idx = 0; idx < geom.state_count() && terminal_states.size() < 10; ++idx)
    if (f.synth.safety.winning[idx]) terminal_states.push_back(geom.point(geom.state(idx)));
  REQUIRE(!terminal_states.empty());

  SECTION("singleton policies are passed through") {
    // find a terminal state with exactly one pair
    bool checked = false;
    for (std::size_t idx = 0; idx < geom.state_count(); ++idx) {
      if (!f.synth.safety.winning[idx] || f.synth.safety.policy[idx].size() != 1) continue;
      const State x = geom.point(geom.state(idx));
      const PairChoice c = select_pair(x, Phase::terminal, pol, sel, p, cfg);
      const auto pair = static_cast<std::size_t>(f.synth.safety.policy[idx][0]);
      CHECK(c.u == f.model.pair_u(pair));
      CHECK(c.eps_mult == f.model.pair_eps_mult(pair));
      checked = true;
      break;
    }
    CHECK(checked);
  }

  SECTION("greedy depth prefers the larger input") {
    SelectionConfig greedy = sel;
    greedy.max_depth = 1;
    for (const State& x : terminal_states) {
      const auto pairs = pol.query_terminal(x);
      double u_best = 0.0;
      for (const PairChoice& c : pairs) u_best = std::max(u_best, c.u);
      const PairChoice c = select_pair(x, Phase::terminal, pol, greedy, p, cfg);
      CHECK(c.u == u_best);
    }
  }

  SECTION("matches the exhaustive enumeration oracle") {
    oracles::ExhaustiveSelect oracle{&pol, &p, &cfg, sel};
    for (const State& x : terminal_states) {
      const PairChoice mine = select_pair(x, Phase::terminal, pol, sel, p, cfg);
      const PairChoice ref = oracle.choose(x, Phase::terminal);
      CHECK(mine.u == ref.u);
      CHECK(mine.eps_mult == ref.eps_mult);
      CHECK(rollout_cost(x, Phase::terminal, sel.max_depth, sel, pol, p, cfg) ==
            Approx(oracle.cost_from({x, *pol.relation().snap_row(x.I), Phase::terminal},
                                    sel.max_depth, 0.0))
                .margin(1e-9));
    }
  }

  SECTION("matches the oracle from off-grid initial states") {
    oracles::ExhaustiveSelect oracle{&pol, &p, &cfg, sel};
    std::mt19937_64 rng(73);
    std::uniform_real_distribution<double> us(0.50, 0.80), ui(0.055, 0.085);
    int tried = 0;
    while (tried < 8) {
      const State x{us(rng), ui(rng)};
      if (!pol.in_initial_domain(x)) continue;
      ++tried;
      const PairChoice mine = select_pair(x, Phase::reach_initial, pol, sel, p, cfg);
      const PairChoice ref = oracle.choose(x, Phase::reach_initial);
      CHECK(mine.u == ref.u);
      CHECK(mine.eps == Approx(ref.eps).margin(1e-15));
    }
  }
}

TEST_CASE("closed-loop simulation on the fixture model") {
  const auto& f = fixtures::table1_fixture();
  ConcretePolicy pol(f.model, f.synth);
  const ModelParams p = fixtures::table1_params();
  const IntegratorConfig cfg = f.model.config.integrator;
  SelectionConfig sel = default_sel();

  SECTION("a compliant run reaches and holds the terminal set") {
    const SimulationTrace trace = simulate_closed_loop({0.80, 0.07}, pol, sel, p, cfg, 400.0);
    REQUIRE(trace.failure.empty());
    REQUIRE(trace.completed);
    const MonitorReport rep = monitor(trace, f.model.bounds, f.model.grid);
    CHECK(rep.ok);
    CHECK(rep.min_S >= 0.45);
    CHECK(rep.max_I <= 0.10);
    CHECK(rep.first_target_entry > 0.0);
    CHECK(rep.ranks_strictly_decreasing);
    CHECK(rep.events_on_grid);

    // every non-initial trigger is related to some winning grid state
    for (std::size_t k = 1; k < trace.events.size(); ++k) {
      const TraceEvent& e = trace.events[k];
      const auto row = pol.relation().snap_row(
          std::round(e.x.I / f.model.grid.eta_I) * f.model.grid.eta_I);
      REQUIRE(row.has_value());
      const StateMask& mask = e.phase == Phase::terminal ? f.synth.safety.winning
                                                         : f.synth.reach.winning;
      const auto xt = pol.nearest_winning_row(e.x.S, *row, mask);
      REQUIRE(xt.has_value());
      CHECK(std::abs(xt->n * f.model.grid.eta_S - e.x.S) <= f.model.grid.eta_S / 2 + 1e-9);
    }
  }

  SECTION("a start inside the terminal domain stays terminal throughout") {
    // pick a winning terminal grid point and start exactly there
    const GridGeometry& geom = f.model.sets.geom;
    State x0{};
    bool found = false;
    for (std::size_t idx = 0; idx < geom.state_count() && !found; ++idx)
      if (f.synth.safety.winning[idx]) {
        x0 = geom.point(geom.state(idx));
        found = true;
      }
    REQUIRE(found);
    const SimulationTrace trace = simulate_closed_loop(x0, pol, sel, p, cfg, 200.0);
    REQUIRE(trace.failure.empty());
    for (const TraceEvent& e : trace.events) CHECK(e.phase == Phase::terminal);
    for (const TraceSample& smp : trace.samples) {
      CHECK(smp.x.S >= f.model.bounds.SF_min);
      CHECK(smp.x.I <= f.model.bounds.IF_max + 1e-12);
    }
  }

  SECTION("initial states outside the domain are rejected") {
    const SimulationTrace trace = simulate_closed_loop({0.30, 0.07}, pol, sel, p, cfg, 100.0);
    CHECK(!trace.failure.empty());
    CHECK(trace.samples.empty());
  }
}

TEST_CASE("monitor flags synthetic violations") {
  const ProblemBounds b = fixtures::table1_bounds();
  const Grid grid{0.01, 0.01};

  SimulationTrace trace;
  trace.completed = true;
  PairChoice pc;
  pc.u = 0.26;
  pc.eps = 0.01;
  // initial event, one trigger into the terminal phase
  trace.events.push_back({0.0, {0.7, 0.056}, pc, Phase::reach_initial, -1, 3});
  trace.events.push_back({5.0, {0.705, 0.05}, pc, Phase::terminal, 5, 0});
  trace.samples.push_back({0.0, {0.7, 0.056}, 0.26, 0.01, true, Phase::reach_initial});
  trace.samples.push_back({2.5, {0.702, 0.053}, 0.26, 0.01, false, Phase::reach_initial});
  trace.samples.push_back({5.0, {0.705, 0.05}, 0.26, 0.01, true, Phase::terminal});
  trace.samples.push_back({6.0, {0.706, 0.045}, 0.26, 0.01, false, Phase::terminal});

  SECTION("compliant trace passes") {
    // events land on the grid, ranks decrease, u constant
    const MonitorReport rep = monitor(trace, b, grid);
    CHECK(rep.ok);
    CHECK(rep.event_count == 2);
    CHECK(rep.first_target_entry == Approx(5.0));
  }

  SECTION("a safe-set spike is flagged at the first offending sample") {
    SimulationTrace bad = trace;
    bad.samples[1].x.I = 0.12;
    const MonitorReport rep = monitor(bad, b, grid);
    CHECK(!rep.ok);
    CHECK(rep.safe_violation);
    CHECK(rep.safe_violation_t == Approx(2.5));
  }

  SECTION("an off-grid trigger is flagged") {
    SimulationTrace bad = trace;
    bad.events[1].x.I = 0.0534;
    const MonitorReport rep = monitor(bad, b, grid);
    CHECK(!rep.events_on_grid);
  }

  SECTION("a terminal-phase exit is flagged") {
    SimulationTrace bad = trace;
    bad.samples[3].x.S = 0.55;  // below the terminal S bound after entry
    const MonitorReport rep = monitor(bad, b, grid);
    CHECK(rep.target_exit_after_entry);
    CHECK(!rep.ok);
  }

  SECTION("a rank increase is flagged") {
    SimulationTrace bad = trace;
    bad.events[1].phase = Phase::reach;
    bad.events[1].rank = 5;  // above the initial rank 3
    const MonitorReport rep = monitor(bad, b, grid);
    CHECK(!rep.ranks_strictly_decreasing);
  }

  SECTION("mid-interval input changes are flagged") {
    SimulationTrace bad = trace;
    bad.samples[1].u = 0.17;
    bad.samples[2].u = 0.17;  // change at a non-event sample, constant afterwards
    const MonitorReport rep = monitor(bad, b, grid);
    CHECK(!rep.input_constant_between_events);
  }
}
