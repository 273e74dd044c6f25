#include "sirsynth/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace sirsynth {

void SelectionConfig::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in (0,1]");
  if (std::isinf(horizon_T) && lambda >= 1.0)
    throw std::invalid_argument("infinite horizon requires lambda < 1");
  if (!(horizon_T > 0.0)) throw std::invalid_argument("horizon_T must be > 0");
  if (max_depth < 1) throw std::invalid_argument("max_depth must be >= 1");
  if (!(tail_tol >= 0.0)) throw std::invalid_argument("tail_tol must be >= 0");
}

double interval_cost(double u, double delta_a, double delta_b, double lambda) {
  if (delta_b <= delta_a) return 0.0;
  if (lambda >= 1.0) return (delta_b - delta_a) / u;
  const double log_inv = std::log(1.0 / lambda);
  const double pa = std::pow(lambda, delta_a);
  const double pb = std::isinf(delta_b) ? 0.0 : std::pow(lambda, delta_b);
  return (pa - pb) / (u * log_inv);
}

namespace {

struct RolloutContext {
  const ConcretePolicy* policies;
  const ModelParams* params;
  const IntegratorConfig* cfg;
  SelectionConfig sel;
  double u_best;  // largest available input level, used for the tail bound
};

struct RolloutState {
  State x;
  std::int32_t row = -1;  // exact I-row; -1 before the first trigger
  Phase phase = Phase::reach_initial;
};

std::vector<PairChoice> query_pairs(const RolloutContext& ctx, const RolloutState& s) {
  const ConcretePolicy& pol = *ctx.policies;
  std::vector<PairChoice> pairs;
  switch (s.phase) {
    case Phase::reach_initial:
      pairs = pol.query_initial(s.x);
      break;
    case Phase::reach:
      pairs = pol.query_reach_row(s.x.S, s.row);
      break;
    case Phase::terminal:
      pairs = pol.query_terminal_row(s.x.S, s.row);
      break;
  }
  if (pairs.empty())
    throw std::runtime_error("synthesis inconsistency: empty policy at a visited state");
  // preference order: larger u first, then larger eps
  std::stable_sort(pairs.begin(), pairs.end(), [](const PairChoice& a, const PairChoice& b) {
    if (a.u != b.u) return a.u > b.u;
    return a.eps > b.eps;
  });
  return pairs;
}

/* Landing row of a trigger, from the measured direction. Returns -1 when an
 * initial trigger fired against its labeled direction (off the grid). */
std::int32_t landing_row(const RolloutState& s, const PairChoice& c, const State& x_event) {
  const bool increased = x_event.I > s.x.I;
  if (s.phase == Phase::reach_initial) {
    const bool label_up = c.direction == DirectionLabel::increase;
    if (increased != label_up) return -1;
    return c.source.m + (label_up ? c.eps_mult : -c.eps_mult);
  }
  return s.row + (increased ? c.eps_mult : -c.eps_mult);
}

Phase next_phase(const ConcretePolicy& policies, Phase current, double S, std::int32_t row) {
  if (current == Phase::terminal) return Phase::terminal;
  if (row >= 0 && policies.in_terminal_domain_row(S, row)) return Phase::terminal;
  return Phase::reach;
}

/* Exact minimum continuation cost from s at discount offset delta, pruned
 * against incumbent: the returned value is exact whenever it is below the
 * incumbent. */
double best_cost(const RolloutContext& ctx, const RolloutState& s, int depth, double delta,
                 double incumbent) {
  const std::vector<PairChoice> pairs = query_pairs(ctx, s);
  const double T = ctx.sel.horizon_T;
  const double lambda = ctx.sel.lambda;
  const bool truncate = depth <= 1 || std::pow(lambda, delta) < ctx.sel.tail_tol;
  double best = std::numeric_limits<double>::infinity();
  for (const PairChoice& c : pairs) {
    double cost;
    if (truncate) {
      cost = interval_cost(c.u, delta, T, lambda);  // close with the final-interval term
    } else {
      const auto ev = concrete_event_time(s.x, c.u, c.eps, *ctx.params, *ctx.cfg);
      if (!ev || delta + ev->t >= T) {
        cost = interval_cost(c.u, delta, T, lambda);
      } else {
        const double delta2 = delta + ev->t;
        const double head = interval_cost(c.u, delta, delta2, lambda);
        const double bound = std::min(best, incumbent);
        const double tail_lb = interval_cost(ctx.u_best, delta2, T, lambda);
        if (head + tail_lb >= bound) continue;  // cannot improve
        RolloutState ns;
        ns.x = ev->state;
        ns.row = landing_row(s, c, ev->state);
        if (ns.row < 0)
          throw std::runtime_error("synthesis inconsistency: trigger off the labeled direction");
        ns.phase = next_phase(*ctx.policies, s.phase, ns.x.S, ns.row);
        cost = head + best_cost(ctx, ns, depth - 1, delta2, bound - head);
      }
    }
    best = std::min(best, cost);
  }
  return best;
}

RolloutContext make_context(const ConcretePolicy& policies, const SelectionConfig& sel,
                            const ModelParams& p, const IntegratorConfig& cfg) {
  sel.validate();
  cfg.validate();
  return {&policies, &p, &cfg, sel, p.u_max()};
}

RolloutState make_root(const ConcretePolicy& policies, const State& x, Phase phase) {
  RolloutState s;
  s.x = x;
  s.phase = phase;
  if (phase != Phase::reach_initial) {
    const auto row = policies.relation().snap_row(x.I);
    if (!row) throw std::domain_error("state is off the event grid for this phase");
    s.row = *row;
  }
  return s;
}

}  // namespace

double rollout_cost(const State& x, Phase phase, int depth, const SelectionConfig& sel,
                    const ConcretePolicy& policies, const ModelParams& p,
                    const IntegratorConfig& cfg) {
  RolloutContext ctx = make_context(policies, sel, p, cfg);
  return best_cost(ctx, make_root(policies, x, phase), depth,
                   0.0, std::numeric_limits<double>::infinity());
}

PairChoice select_pair(const State& x, Phase phase, const ConcretePolicy& policies,
                       const SelectionConfig& sel, const ModelParams& p,
                       const IntegratorConfig& cfg) {
  RolloutContext ctx = make_context(policies, sel, p, cfg);
  const RolloutState root = make_root(policies, x, phase);
  const std::vector<PairChoice> pairs = query_pairs(ctx, root);
  const double T = sel.horizon_T;
  const bool truncate = sel.max_depth <= 1;
  PairChoice chosen = pairs.front();
  double best = std::numeric_limits<double>::infinity();
  for (const PairChoice& c : pairs) {
    double cost;
    if (truncate) {
      cost = interval_cost(c.u, 0.0, T, sel.lambda);
    } else {
      const auto ev = concrete_event_time(x, c.u, c.eps, p, cfg);
      if (!ev || ev->t >= T) {
        cost = interval_cost(c.u, 0.0, T, sel.lambda);
      } else {
        const double head = interval_cost(c.u, 0.0, ev->t, sel.lambda);
        const double tail_lb = interval_cost(ctx.u_best, ev->t, T, sel.lambda);
        if (head + tail_lb >= best) continue;
        RolloutState ns;
        ns.x = ev->state;
        ns.row = landing_row(root, c, ev->state);
        if (ns.row < 0)
          throw std::runtime_error("synthesis inconsistency: trigger off the labeled direction");
        ns.phase = next_phase(*ctx.policies, phase, ns.x.S, ns.row);
        cost = head + best_cost(ctx, ns, sel.max_depth - 1, ev->t, best - head);
      }
    }
    if (cost < best) {
      best = cost;
      chosen = c;
    }
  }
  return chosen;
}

SimulationTrace simulate_closed_loop(const State& x0, const ConcretePolicy& policies,
                                     const SelectionConfig& sel, const ModelParams& p,
                                     const IntegratorConfig& cfg, double t_end) {
  sel.validate();
  cfg.validate();
  SimulationTrace trace;
  RolloutState cur;
  cur.x = x0;
  if (policies.in_terminal_domain(x0)) {
    cur.phase = Phase::terminal;
    cur.row = *policies.relation().snap_row(x0.I);
  } else if (policies.in_initial_domain(x0)) {
    cur.phase = Phase::reach_initial;
    cur.row = -1;
  } else {
    trace.failure = "initial state outside the initial policy domain";
    return trace;
  }

  double t = 0.0;
  while (t < t_end - 1e-9) {
    PairChoice choice;
    try {
      choice = select_pair(cur.x, cur.phase, policies, sel, p, cfg);
    } catch (const std::exception& e) {
      trace.failure = e.what();
      return trace;
    }
    const std::int32_t backing_rank = cur.phase == Phase::reach_initial
                                          ? policies.synthesis().reach.init_rank
                                          : policies.rank_of(choice.source);
    trace.events.push_back({t, cur.x, choice, cur.phase, cur.row, backing_rank});
    trace.samples.push_back({t, cur.x, choice.u, choice.eps, true, cur.phase});

    // integrate the true model under the chosen pair until the next trigger
    const double search_end = std::min(t + cfg.horizon, t_end);
    const double I_anchor = cur.x.I;
    State xa = cur.x;
    double ta = t;
    bool fired = false;
    while (ta < search_end - 1e-12) {
      const double h = std::min(cfg.step, search_end - ta);
      State xn = xa;
      rk4_step(xn, choice.u, h, p);
      if (std::fabs(xn.I - I_anchor) >= choice.eps) {
        double a = ta, b = ta + h;
        while (b - a > cfg.crossing_tol) {
          const double mid = 0.5 * (a + b);
          State xm = xa;
          rk4_step(xm, choice.u, mid - ta, p);
          if (std::fabs(xm.I - I_anchor) >= choice.eps)
            b = mid;
          else
            a = mid;
        }
        State xe = xa;
        if (b - ta > 1e-15) rk4_step(xe, choice.u, b - ta, p);
        const std::int32_t row = landing_row(cur, choice, xe);
        t = b;
        cur.x = xe;
        if (row < 0) {
          trace.samples.push_back({t, xe, choice.u, choice.eps, true, cur.phase});
          trace.failure = "trigger landed off the event grid";
          return trace;
        }
        cur.row = row;
        cur.phase = next_phase(policies, cur.phase, xe.S, row);
        fired = true;
        break;
      }
      xa = xn;
      ta += h;
      trace.samples.push_back({ta, xa, choice.u, choice.eps, false, cur.phase});
    }
    if (!fired) {
      if (search_end >= t_end - 1e-9) {
        trace.completed = true;  // ran out the clock under a constant input
        return trace;
      }
      trace.truncated = true;  // no event within the crossing horizon
      return trace;
    }
  }
  trace.completed = true;
  return trace;
}

MonitorReport monitor(const SimulationTrace& trace, const ProblemBounds& bounds,
                      const Grid& grid) {
  MonitorReport rep;
  rep.trace_failure = !trace.failure.empty() || trace.truncated;
  if (trace.samples.empty()) {
    rep.ok = false;
    return rep;
  }
  rep.min_S = trace.samples.front().x.S;
  rep.max_I = trace.samples.front().x.I;
  for (const TraceSample& s : trace.samples) {
    rep.min_S = std::min(rep.min_S, s.x.S);
    rep.max_I = std::max(rep.max_I, s.x.I);
    if (!rep.safe_violation && (s.x.S < bounds.SS_min || s.x.I > bounds.IS_max)) {
      rep.safe_violation = true;
      rep.safe_violation_t = s.t;
    }
  }
  rep.event_count = trace.events.size();

  // terminal switch instant
  for (const TraceEvent& e : trace.events) {
    if (e.phase == Phase::terminal) {
      rep.first_target_entry = e.t;
      break;
    }
  }
  if (rep.first_target_entry >= 0.0) {
    for (const TraceSample& s : trace.samples) {
      if (s.t < rep.first_target_entry - 1e-12) continue;
      if (s.x.S < bounds.SF_min || s.x.I > bounds.IF_max) {
        rep.target_exit_after_entry = true;
        rep.target_exit_t = s.t;
        break;
      }
    }
  }

  // strictly decreasing ranks over the reach-phase prefix
  std::int32_t prev_rank = -1;
  bool have_prev = false;
  for (const TraceEvent& e : trace.events) {
    if (e.phase == Phase::terminal) break;
    if (have_prev && e.rank >= prev_rank) {
      rep.ranks_strictly_decreasing = false;
      break;
    }
    prev_rank = e.rank;
    have_prev = true;
  }

  for (std::size_t i = 1; i < trace.events.size(); ++i)
    if (!(trace.events[i].t > trace.events[i - 1].t)) rep.event_times_increasing = false;

  // u may change only at event samples
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    if (trace.samples[i].u != trace.samples[i - 1].u && !trace.samples[i].event) {
      rep.input_constant_between_events = false;
      break;
    }
  }

  // non-initial triggers land on the I-grid
  for (std::size_t i = 1; i < trace.events.size(); ++i) {
    const double q = trace.events[i].x.I / grid.eta_I;
    const double res = std::fabs(q - std::round(q));
    rep.max_grid_residual = std::max(rep.max_grid_residual, res);
  }
  rep.events_on_grid = rep.max_grid_residual <= 1e-4;

  rep.ok = !rep.trace_failure && !rep.safe_violation && rep.first_target_entry >= 0.0 &&
           !rep.target_exit_after_entry && rep.ranks_strictly_decreasing &&
           rep.event_times_increasing && rep.input_constant_between_events &&
           rep.events_on_grid;
  return rep;
}

std::string MonitorReport::to_json() const {
  nlohmann::json j;
  j["ok"] = ok;
  j["min_S"] = min_S;
  j["max_I"] = max_I;
  j["first_target_entry"] = first_target_entry;
  j["safe_violation"] = safe_violation;
  j["safe_violation_t"] = safe_violation_t;
  j["target_exit_after_entry"] = target_exit_after_entry;
  j["target_exit_t"] = target_exit_t;
  j["event_count"] = event_count;
  j["ranks_strictly_decreasing"] = ranks_strictly_decreasing;
  j["event_times_increasing"] = event_times_increasing;
  j["input_constant_between_events"] = input_constant_between_events;
  j["events_on_grid"] = events_on_grid;
  j["max_grid_residual"] = max_grid_residual;
  j["trace_failure"] = trace_failure;
  return j.dump(2);
}

}  // namespace sirsynth
