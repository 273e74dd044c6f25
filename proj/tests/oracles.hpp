/*
 * oracles.hpp
 *
 * Test-only reference computations, kept independent of the implementation
 * paths they check: dense-scan crossing location on the canonical flow,
 * Richardson step-halving, finite differences, subset-enumeration game
 * solving, exhaustive rollout enumeration, and small sampling helpers.
 */

#ifndef SIRSYNTH_TESTS_ORACLES_HPP_
#define SIRSYNTH_TESTS_ORACLES_HPP_

#include <cmath>
#include <optional>
#include <random>

#include "sirsynth/games.hpp"
#include "sirsynth/runtime.hpp"

namespace oracles {

using namespace sirsynth;

/* Dense scan of the canonical embedded flow at a fine time pitch, followed
 * by bisection: locates the first crossing of the selected I-envelope
 * independently of the per-step bracketing in the implementation. */
inline std::optional<double> dense_scan_crossing(const EmbeddedState& box, double u,
                                                 double target, Envelope env,
                                                 const ModelParams& p,
                                                 const IntegratorConfig& cfg,
                                                 double pitch = 1e-4) {
  EmbeddedTrajectory traj(box, u, cfg.step, p);
  traj.extend(cfg.horizon);
  auto value = [&](double t) {
    const EmbeddedState c = traj.at(t);
    return (env == Envelope::lower ? c.lower.I : c.upper.I) - target;
  };
  double t_prev = 0.0;
  double g_prev = value(0.0);
  for (double t = pitch; t <= cfg.horizon + 1e-12; t += pitch) {
    const double tt = std::min(t, cfg.horizon);
    const double g = value(tt);
    if ((g_prev < 0.0 && g >= 0.0) || (g_prev > 0.0 && g <= 0.0)) {
      double a = t_prev, b = tt;
      while (b - a > cfg.crossing_tol) {
        const double mid = 0.5 * (a + b);
        const double gm = value(mid);
        if ((g_prev < 0.0 && gm >= 0.0) || (g_prev > 0.0 && gm <= 0.0))
          b = mid;
        else
          a = mid;
      }
      return 0.5 * (a + b);
    }
    if (g_prev == 0.0) g_prev = g;
    else g_prev = g;
    t_prev = tt;
  }
  return std::nullopt;
}

/* Same idea for the concrete event rule |I(t) - I0| >= eps. */
inline std::optional<Event> dense_scan_event(const State& x0, double u, double eps,
                                             const ModelParams& p, const IntegratorConfig& cfg,
                                             double pitch = 1e-4) {
  // record the canonical per-step trajectory once
  std::vector<State> steps{x0};
  double t = 0.0;
  while (t < cfg.horizon - 1e-12) {
    State x = steps.back();
    rk4_step(x, u, std::min(cfg.step, cfg.horizon - t), p);
    steps.push_back(x);
    t += cfg.step;
  }
  auto value_at = [&](double tt) {
    auto [k, r] = split_time(tt, cfg.step);
    State x = steps[static_cast<std::size_t>(std::min<long>(k, static_cast<long>(steps.size()) - 1))];
    if (r > 1e-12) rk4_step(x, u, r, p);
    return x;
  };
  const double I0 = x0.I;
  double t_prev = 0.0;
  for (double tt = pitch; tt <= cfg.horizon + 1e-12; tt += pitch) {
    const double t_cur = std::min(tt, cfg.horizon);
    if (std::fabs(value_at(t_cur).I - I0) >= eps) {
      double a = t_prev, b = t_cur;
      while (b - a > cfg.crossing_tol) {
        const double mid = 0.5 * (a + b);
        if (std::fabs(value_at(mid).I - I0) >= eps)
          b = mid;
        else
          a = mid;
      }
      return Event{b, value_at(b)};
    }
    t_prev = t_cur;
  }
  return std::nullopt;
}

/* Subset-enumeration solution of the safety game: the greatest fixed point
 * is the union of all P inside the target where every state has a labeled
 * pair with nonempty successors staying in P. Only usable for tiny arenas. */
inline StateMask brute_force_safety(const Arena& a) {
  std::vector<std::size_t> target_states;
  for (std::size_t x = 0; x < a.n_states; ++x)
    if (a.target[x]) target_states.push_back(x);
  StateMask best(a.n_states, 0);
  const std::size_t n = target_states.size();
  for (std::size_t bits = 0; bits < (1ull << n); ++bits) {
    StateMask P(a.n_states, 0);
    for (std::size_t i = 0; i < n; ++i)
      if (bits & (1ull << i)) P[target_states[i]] = 1;
    bool closed = true;
    for (std::size_t x = 0; x < a.n_states && closed; ++x) {
      if (!P[x]) continue;
      bool has_pair = false;
      for (std::size_t p = 0; p < a.n_pairs && !has_pair; ++p) {
        const auto& succ = a.succ[a.slot(x, p)];
        if (succ.empty() || !a.lf[a.slot(x, p)]) continue;
        bool all = true;
        for (auto s : succ)
          if (!P[static_cast<std::size_t>(s)]) all = false;
        has_pair = all;
      }
      closed = has_pair;
    }
    if (closed)
      for (std::size_t x = 0; x < a.n_states; ++x) best[x] |= P[x];
  }
  return best;
}

/* Knaster-Tarski from above: the reachability winning set is the
 * intersection of all supersets Q of the seed closed under pre. */
inline StateMask brute_force_reach(const Arena& a, const StateMask& seed) {
  StateMask result(a.n_states, 1);
  for (std::size_t bits = 0; bits < (1ull << a.n_states); ++bits) {
    StateMask Q(a.n_states, 0);
    bool superset = true;
    for (std::size_t x = 0; x < a.n_states; ++x) {
      Q[x] = (bits & (1ull << x)) ? 1 : 0;
      if (seed[x] && !Q[x]) superset = false;
    }
    if (!superset) continue;
    bool closed = true;
    for (std::size_t x = 0; x < a.n_states && closed; ++x) {
      if (Q[x] || !a.safe[x]) continue;  // only states outside Q can violate closure
      for (std::size_t p = 0; p < a.n_pairs && closed; ++p) {
        const auto& succ = a.succ[a.slot(x, p)];
        if (succ.empty() || !a.reach_ok[a.slot(x, p)]) continue;
        bool all = true;
        for (auto s : succ)
          if (!Q[static_cast<std::size_t>(s)]) all = false;
        if (all) closed = false;  // pre(Q) escapes Q
      }
    }
    if (closed)
      for (std::size_t x = 0; x < a.n_states; ++x) result[x] &= Q[x];
  }
  return result;
}

/* Random arena generator for the oracle-equivalence checks. */
inline Arena random_arena(std::mt19937_64& rng, std::size_t max_states = 12,
                          std::size_t n_pairs = 4) {
  std::uniform_int_distribution<std::size_t> nd(3, max_states);
  Arena a;
  a.n_states = nd(rng);
  a.n_pairs = n_pairs;
  a.succ.assign(a.n_states * a.n_pairs, {});
  a.lf.assign(a.n_states * a.n_pairs, 0);
  a.reach_ok.assign(a.n_states * a.n_pairs, 0);
  a.safe.assign(a.n_states, 0);
  a.target.assign(a.n_states, 0);
  std::uniform_int_distribution<int> coin(0, 99);
  std::uniform_int_distribution<std::size_t> pick(0, a.n_states - 1);
  for (std::size_t x = 0; x < a.n_states; ++x) {
    a.safe[x] = coin(rng) < 85 ? 1 : 0;
    a.target[x] = (a.safe[x] && coin(rng) < 45) ? 1 : 0;
    for (std::size_t p = 0; p < a.n_pairs; ++p) {
      const std::size_t slot = a.slot(x, p);
      const int fan = coin(rng) % 4;  // 0..3 successors
      for (int i = 0; i < fan; ++i)
        a.succ[slot].push_back(static_cast<std::int32_t>(pick(rng)));
      a.lf[slot] = coin(rng) < 60 ? 1 : 0;
      a.reach_ok[slot] = coin(rng) < 80 ? 1 : 0;
    }
  }
  return a;
}

/* Exhaustive enumeration of all choice sequences up to the given depth,
 * mirroring the cost semantics of the selection: every truncation closes
 * with the final-interval term under the input active at truncation. */
struct ExhaustiveSelect {
  const ConcretePolicy* policies;
  const ModelParams* params;
  const IntegratorConfig* cfg;
  SelectionConfig sel;

  struct Node {
    State x;
    std::int32_t row;
    Phase phase;
  };

  std::vector<PairChoice> pairs_at(const Node& n) const {
    std::vector<PairChoice> pairs;
    switch (n.phase) {
      case Phase::reach_initial: pairs = policies->query_initial(n.x); break;
      case Phase::reach: pairs = policies->query_reach_row(n.x.S, n.row); break;
      case Phase::terminal: pairs = policies->query_terminal_row(n.x.S, n.row); break;
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const PairChoice& a, const PairChoice& b) {
      if (a.u != b.u) return a.u > b.u;
      return a.eps > b.eps;
    });
    return pairs;
  }

  double cost_from(const Node& n, int depth, double delta) const {
    const double T = sel.horizon_T;
    const bool truncate = depth <= 1 || std::pow(sel.lambda, delta) < sel.tail_tol;
    double best = std::numeric_limits<double>::infinity();
    for (const PairChoice& c : pairs_at(n)) {
      double cost;
      if (truncate) {
        cost = interval_cost(c.u, delta, T, sel.lambda);
      } else {
        const auto ev = concrete_event_time(n.x, c.u, c.eps, *params, *cfg);
        if (!ev || delta + ev->t >= T) {
          cost = interval_cost(c.u, delta, T, sel.lambda);
        } else {
          Node child;
          child.x = ev->state;
          const bool increased = ev->state.I > n.x.I;
          if (n.phase == Phase::reach_initial)
            child.row = c.source.m + (increased ? c.eps_mult : -c.eps_mult);
          else
            child.row = n.row + (increased ? c.eps_mult : -c.eps_mult);
          child.phase = n.phase == Phase::terminal
                            ? Phase::terminal
                            : (policies->in_terminal_domain_row(child.x.S, child.row)
                                   ? Phase::terminal
                                   : Phase::reach);
          cost = interval_cost(c.u, delta, delta + ev->t, sel.lambda) +
                 cost_from(child, depth - 1, delta + ev->t);
        }
      }
      best = std::min(best, cost);
    }
    return best;
  }

  /* argmin over the root pairs; first strict minimum in preference order */
  PairChoice choose(const State& x, Phase phase) const {
    Node root;
    root.x = x;
    root.phase = phase;
    root.row = -1;
    if (phase != Phase::reach_initial) root.row = *policies->relation().snap_row(x.I);
    const auto pairs = pairs_at(root);
    PairChoice chosen = pairs.front();
    double best = std::numeric_limits<double>::infinity();
    for (const PairChoice& c : pairs) {
      double cost;
      const bool truncate = sel.max_depth <= 1;
      if (truncate) {
        cost = interval_cost(c.u, 0.0, sel.horizon_T, sel.lambda);
      } else {
        const auto ev = concrete_event_time(x, c.u, c.eps, *params, *cfg);
        if (!ev || ev->t >= sel.horizon_T) {
          cost = interval_cost(c.u, 0.0, sel.horizon_T, sel.lambda);
        } else {
          Node child;
          child.x = ev->state;
          const bool increased = ev->state.I > x.I;
          if (phase == Phase::reach_initial)
            child.row = c.source.m + (increased ? c.eps_mult : -c.eps_mult);
          else
            child.row = root.row + (increased ? c.eps_mult : -c.eps_mult);
          child.phase = phase == Phase::terminal
                            ? Phase::terminal
                            : (policies->in_terminal_domain_row(child.x.S, child.row)
                                   ? Phase::terminal
                                   : Phase::reach);
          cost = interval_cost(c.u, 0.0, ev->t, sel.lambda) +
                 cost_from(child, sel.max_depth - 1, ev->t);
        }
      }
      if (cost < best) {
        best = cost;
        chosen = c;
      }
    }
    return chosen;
  }
};

}  // namespace oracles

#endif  // SIRSYNTH_TESTS_ORACLES_HPP_
