#include "sirsynth/games.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sirsynth {

namespace {
bool all_in(const std::vector<std::int32_t>& succ, const StateMask& set) {
  for (std::int32_t s : succ)
    if (!set[static_cast<std::size_t>(s)]) return false;
  return true;
}
}  // namespace

StateMask pre_f(const Arena& a, const StateMask& P) {
  StateMask out(a.n_states, 0);
  for (std::size_t x = 0; x < a.n_states; ++x) {
    if (!a.target[x]) continue;
    for (std::size_t p = 0; p < a.n_pairs; ++p) {
      const auto& succ = a.succ[a.slot(x, p)];
      if (succ.empty() || !a.lf[a.slot(x, p)]) continue;
      if (all_in(succ, P)) {
        out[x] = 1;
        break;
      }
    }
  }
  return out;
}

StateMask pre(const Arena& a, const StateMask& Q) {
  StateMask out(a.n_states, 0);
  for (std::size_t x = 0; x < a.n_states; ++x) {
    if (!a.safe[x]) continue;
    for (std::size_t p = 0; p < a.n_pairs; ++p) {
      const auto& succ = a.succ[a.slot(x, p)];
      if (succ.empty() || !a.reach_ok[a.slot(x, p)]) continue;
      if (all_in(succ, Q)) {
        out[x] = 1;
        break;
      }
    }
  }
  return out;
}

StateMask pre_0(const Arena& a, const StateMask& Q) {
  StateMask out(a.n_states, 0);
  for (std::size_t pos = 0; pos < a.init_states.size(); ++pos) {
    const auto x = static_cast<std::size_t>(a.init_states[pos]);
    if (!a.safe[x]) continue;
    for (std::size_t p = 0; p < a.n_pairs; ++p) {
      const auto& succ = a.succ0[pos * a.n_pairs + p];
      if (succ.empty() || !a.init_ok[pos * a.n_pairs + p]) continue;
      if (all_in(succ, Q)) {
        out[x] = 1;
        break;
      }
    }
  }
  return out;
}

bool SafetyResult::empty() const {
  for (auto v : winning)
    if (v) return false;
  return true;
}

SafetyResult safety_game(const Arena& a) {
  SafetyResult res;
  res.winning = a.target;
  for (;;) {
    ++res.iterations;
    const StateMask keep = pre_f(a, res.winning);
    bool changed = false;
    for (std::size_t x = 0; x < a.n_states; ++x) {
      if (res.winning[x] && !keep[x]) {
        res.winning[x] = 0;
        changed = true;
      }
    }
    if (!changed) break;
  }
  res.policy.assign(a.n_states, {});
  for (std::size_t x = 0; x < a.n_states; ++x) {
    if (!res.winning[x]) continue;
    for (std::size_t p = 0; p < a.n_pairs; ++p) {
      const auto& succ = a.succ[a.slot(x, p)];
      if (succ.empty() || !a.lf[a.slot(x, p)]) continue;
      if (all_in(succ, res.winning)) res.policy[x].push_back(static_cast<std::int32_t>(p));
    }
  }
  return res;
}

ReachabilityResult reachability_game(const Arena& a, const StateMask& seed) {
  if (seed.size() != a.n_states) throw std::invalid_argument("seed mask size mismatch");
  ReachabilityResult res;
  res.winning = seed;
  res.rank.assign(a.n_states, -1);
  for (std::size_t x = 0; x < a.n_states; ++x)
    if (seed[x]) res.rank[x] = 0;

  std::int32_t shell = 0;
  for (;;) {
    ++res.iterations;
    const StateMask added = pre(a, res.winning);
    bool changed = false;
    ++shell;
    for (std::size_t x = 0; x < a.n_states; ++x) {
      if (added[x] && !res.winning[x]) {
        res.winning[x] = 1;
        res.rank[x] = shell;
        changed = true;
      }
    }
    if (!changed) {
      --shell;  // last shell added nothing
      break;
    }
  }

  // initial layer: states that can take one validated initial transition
  // into the winning set; the layer lives one rank above the last shell
  res.init_rank = shell + 1;
  const StateMask init_win = pre_0(a, res.winning);
  res.winning0.assign(a.n_states, 0);
  for (std::size_t x = 0; x < a.n_states; ++x) {
    if (init_win[x]) {
      res.winning0[x] = 1;
      if (res.rank[x] < 0) res.rank[x] = res.init_rank;
    }
  }

  res.policy.assign(a.n_states, {});
  for (std::size_t x = 0; x < a.n_states; ++x) {
    if (!res.winning[x]) continue;
    for (std::size_t p = 0; p < a.n_pairs; ++p) {
      const auto& succ = a.succ[a.slot(x, p)];
      if (succ.empty() || !a.reach_ok[a.slot(x, p)]) continue;
      bool descends = true;
      for (std::int32_t s : succ) {
        const std::int32_t r = res.rank[static_cast<std::size_t>(s)];
        if (r < 0 || r >= res.rank[x] || !res.winning[static_cast<std::size_t>(s)]) {
          descends = false;
          break;
        }
      }
      if (descends) res.policy[x].push_back(static_cast<std::int32_t>(p));
    }
  }

  res.policy0.assign(a.n_states, {});
  for (std::size_t pos = 0; pos < a.init_states.size(); ++pos) {
    const auto x = static_cast<std::size_t>(a.init_states[pos]);
    if (!res.winning0[x]) continue;
    for (std::size_t p = 0; p < a.n_pairs; ++p) {
      const auto& succ = a.succ0[pos * a.n_pairs + p];
      if (succ.empty() || !a.init_ok[pos * a.n_pairs + p]) continue;
      bool descends = true;
      for (std::int32_t s : succ) {
        const std::int32_t r = res.rank[static_cast<std::size_t>(s)];
        if (r < 0 || r >= res.init_rank || !res.winning[static_cast<std::size_t>(s)]) {
          descends = false;
          break;
        }
      }
      if (descends) res.policy0[x].push_back(static_cast<std::int32_t>(p));
    }
    // the initial domain is the set of states with a validated initial pair
    if (res.policy0[x].empty()) {
      res.winning0[x] = 0;
      if (!res.winning[x]) res.rank[x] = -1;
    }
  }
  return res;
}

Arena arena_from_model(const SymbolicModel& model) {
  Arena a;
  const GridGeometry& geom = model.sets.geom;
  a.n_states = geom.state_count();
  a.n_pairs = model.pair_count();
  a.succ.assign(a.n_states * a.n_pairs, {});
  a.lf.assign(a.n_states * a.n_pairs, 0);
  a.reach_ok.assign(a.n_states * a.n_pairs, 0);
  a.safe = model.sets.is_safe;
  a.target = model.sets.is_target;

  const std::int32_t is_limit = static_cast<std::int32_t>(
      std::floor(model.bounds.IS_max / model.grid.eta_I + 1e-6));

  auto fill = [&](const TransitionEntry& e, SymbolicState src, std::int32_t k,
                  std::vector<std::int32_t>& out) {
    if (e.up.present)
      for (std::int32_t n = e.up.lo; n <= e.up.hi; ++n)
        out.push_back(static_cast<std::int32_t>(geom.index({n, src.m + k})));
    if (e.down.present)
      for (std::int32_t n = e.down.lo; n <= e.down.hi; ++n)
        out.push_back(static_cast<std::int32_t>(geom.index({n, src.m - k})));
  };

  for (std::size_t x = 0; x < a.n_states; ++x) {
    const SymbolicState s = geom.state(x);
    for (std::size_t p = 0; p < a.n_pairs; ++p) {
      const TransitionEntry& e = model.transition(x, p);
      const std::int32_t k = model.pair_eps_mult(p);
      fill(e, s, k, a.succ[a.slot(x, p)]);
      a.lf[a.slot(x, p)] = model.lf(x, p) ? 1 : 0;
      a.reach_ok[a.slot(x, p)] = (s.m + k <= is_limit) ? 1 : 0;
    }
  }

  a.init_states.reserve(model.sets.initial_states.size());
  for (std::size_t idx : model.sets.initial_states)
    a.init_states.push_back(static_cast<std::int32_t>(idx));
  a.succ0.assign(a.init_states.size() * a.n_pairs, {});
  a.init_ok.assign(a.init_states.size() * a.n_pairs, 0);
  for (std::size_t pos = 0; pos < a.init_states.size(); ++pos) {
    const SymbolicState s = geom.state(static_cast<std::size_t>(a.init_states[pos]));
    for (std::size_t p = 0; p < a.n_pairs; ++p) {
      const TransitionEntry& e = model.transition0(pos, p);
      const std::int32_t k = model.pair_eps_mult(p);
      fill(e, s, k, a.succ0[pos * a.n_pairs + p]);
      const DirectionLabel l = model.label0(pos, p);
      const bool determinate = l == DirectionLabel::increase || l == DirectionLabel::decrease;
      a.init_ok[pos * a.n_pairs + p] = (determinate && s.m + k <= is_limit) ? 1 : 0;
    }
  }
  return a;
}

SynthesisResult synthesize(const SymbolicModel& model) {
  const Arena a = arena_from_model(model);
  SynthesisResult res;
  res.safety = safety_game(a);
  res.reach = reachability_game(a, res.safety.winning);
  return res;
}

}  // namespace sirsynth
