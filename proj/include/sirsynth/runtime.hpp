/*
 * runtime.hpp
 *
 * Closed-loop event-triggered simulation of the true SIRS model under the
 * refined policies, receding-horizon pair selection by the discounted
 * control-effort cost, and post-hoc specification monitoring.
 */

#ifndef SIRSYNTH_RUNTIME_HPP_
#define SIRSYNTH_RUNTIME_HPP_

#include <limits>
#include <string>

#include "sirsynth/refine.hpp"

namespace sirsynth {

struct SelectionConfig {
  double lambda = 0.99;  // discount in (0, 1]
  double horizon_T = std::numeric_limits<double>::infinity();
  int max_depth = 8;      // lookahead events
  double tail_tol = 1e-3; // truncate when the remaining discount mass drops below

  void validate() const;
};

struct TraceSample {
  double t;
  State x;
  double u;
  double eps;
  bool event;
  Phase phase;
};

struct TraceEvent {
  double t;
  State x;        // measured state at the trigger
  PairChoice choice;
  Phase phase;
  std::int32_t row;   // exact I-row of the trigger (-1 for the initial event)
  std::int32_t rank;  // rank of the grid state backing the policy query
};

struct SimulationTrace {
  std::vector<TraceSample> samples;
  std::vector<TraceEvent> events;
  bool completed = false;      // reached t_end under the policies
  bool truncated = false;      // no event within the crossing horizon
  std::string failure;         // nonempty on policy-domain violations
};

/* Discounted cost of one constant-input interval [a, b] measured from the
 * decision instant, integral of lambda^t / u. */
double interval_cost(double u, double delta_a, double delta_b, double lambda);

/* Minimum discounted cost over choice sequences explored by depth-limited
 * search on the deterministic rollout of the true model. */
double rollout_cost(const State& x, Phase phase, int depth, const SelectionConfig& sel,
                    const ConcretePolicy& policies, const ModelParams& p,
                    const IntegratorConfig& cfg);

/* The pair minimizing rollout_cost; ties broken by larger u, then larger
 * eps. Throws std::domain_error when the policy set at x is empty. */
PairChoice select_pair(const State& x, Phase phase, const ConcretePolicy& policies,
                       const SelectionConfig& sel, const ModelParams& p,
                       const IntegratorConfig& cfg);

/* Phase machine: the initial event uses the adjusted-threshold policy, later
 * events the pass-through policy, switching permanently to the terminal
 * policy at the first event state inside the terminal domain. */
SimulationTrace simulate_closed_loop(const State& x0, const ConcretePolicy& policies,
                                     const SelectionConfig& sel, const ModelParams& p,
                                     const IntegratorConfig& cfg, double t_end);

struct MonitorReport {
  bool ok = false;
  double min_S = 0.0;
  double max_I = 0.0;
  double first_target_entry = -1.0;  // time of the terminal switch, -1 if never
  bool safe_violation = false;
  double safe_violation_t = -1.0;
  bool target_exit_after_entry = false;
  double target_exit_t = -1.0;
  std::size_t event_count = 0;
  bool ranks_strictly_decreasing = true;
  bool event_times_increasing = true;
  bool input_constant_between_events = true;
  bool events_on_grid = true;      // non-initial trigger I-values on the eta_I grid
  double max_grid_residual = 0.0;  // in units of eta_I
  bool trace_failure = false;

  std::string to_json() const;
};

MonitorReport monitor(const SimulationTrace& trace, const ProblemBounds& bounds,
                      const Grid& grid);

}  // namespace sirsynth

#endif  // SIRSYNTH_RUNTIME_HPP_
