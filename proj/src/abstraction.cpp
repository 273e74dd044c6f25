#include "sirsynth/abstraction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <thread>

namespace sirsynth {

namespace {

constexpr double kIndexSlack = 1e-6;
constexpr double kInf = std::numeric_limits<double>::infinity();

/* Recorded embedded trajectory plus running prefix extrema of the envelope
 * coordinates used by the guards. */
struct TrajectoryAnalysis {
  TrajectoryAnalysis(const EmbeddedState& box, double u, const ModelParams& p,
                     const IntegratorConfig& cfg, const std::vector<double>& targets)
      : traj(box, u, cfg.step, p) {
    // stop once every (target, envelope) crossing has been bracketed
    const std::size_t n = targets.size();
    std::vector<double> g_lo(n), g_up(n);
    std::vector<std::uint8_t> done(2 * n, 0);
    std::size_t remaining = 2 * n;
    for (std::size_t i = 0; i < n; ++i) {
      g_lo[i] = box.lower.I - targets[i];
      g_up[i] = box.upper.I - targets[i];
    }
    push_prefix(box);
    traj.extend_until(cfg.horizon, [&](std::size_t, const EmbeddedState& c) {
      push_prefix(c);
      for (std::size_t i = 0; i < n; ++i) {
        if (!done[2 * i]) {
          const double g = c.lower.I - targets[i];
          if ((g_lo[i] < 0.0 && g >= 0.0) || (g_lo[i] > 0.0 && g <= 0.0)) {
            done[2 * i] = 1;
            --remaining;
          }
          if (g_lo[i] == 0.0) g_lo[i] = g;
        }
        if (!done[2 * i + 1]) {
          const double g = c.upper.I - targets[i];
          if ((g_up[i] < 0.0 && g >= 0.0) || (g_up[i] > 0.0 && g <= 0.0)) {
            done[2 * i + 1] = 1;
            --remaining;
          }
          if (g_up[i] == 0.0) g_up[i] = g;
        }
      }
      return remaining == 0;
    });
  }

  void push_prefix(const EmbeddedState& c) {
    const double pls = pmin_low_S.empty() ? kInf : pmin_low_S.back();
    const double pli = pmin_low_I.empty() ? kInf : pmin_low_I.back();
    const double pui = pmax_up_I.empty() ? -kInf : pmax_up_I.back();
    pmin_low_S.push_back(std::min(pls, c.lower.S));
    pmin_low_I.push_back(std::min(pli, c.lower.I));
    pmax_up_I.push_back(std::max(pui, c.upper.I));
  }

  /* prefix extrema over [0, t_end], including the partial state at t_end */
  double min_lower_S_until(double t_end) const {
    auto [k, r] = split_time(t_end, traj.step());
    const std::size_t kk = std::min(static_cast<std::size_t>(k), traj.size() - 1);
    double v = pmin_low_S[kk];
    if (r > 1e-12) v = std::min(v, traj.at(t_end).lower.S);
    return v;
  }
  double min_lower_I_until(double t_end) const {
    auto [k, r] = split_time(t_end, traj.step());
    const std::size_t kk = std::min(static_cast<std::size_t>(k), traj.size() - 1);
    double v = pmin_low_I[kk];
    if (r > 1e-12) v = std::min(v, traj.at(t_end).lower.I);
    return v;
  }
  double max_upper_I_until(double t_end) const {
    auto [k, r] = split_time(t_end, traj.step());
    const std::size_t kk = std::min(static_cast<std::size_t>(k), traj.size() - 1);
    double v = pmax_up_I[kk];
    if (r > 1e-12) v = std::max(v, traj.at(t_end).upper.I);
    return v;
  }

  /* S-extrema of the envelope box over the window [t0, t1] */
  void window_S_extrema(double t0, double t1, double& s_min, double& s_max) const {
    s_min = kInf;
    s_max = -kInf;
    const double h = traj.step();
    const auto k_begin = static_cast<std::size_t>(std::max(0.0, std::ceil(t0 / h - 1e-12)));
    const auto k_end_d = std::floor(t1 / h + 1e-12);
    const std::size_t k_end =
        std::min(traj.size() - 1, static_cast<std::size_t>(std::max(0.0, k_end_d)));
    for (std::size_t k = k_begin; k <= k_end && k < traj.size(); ++k) {
      s_min = std::min(s_min, traj.sample(k).lower.S);
      s_max = std::max(s_max, traj.sample(k).upper.S);
    }
    for (double t : {t0, t1}) {
      const EmbeddedState c = traj.at(t);
      s_min = std::min(s_min, c.lower.S);
      s_max = std::max(s_max, c.upper.S);
    }
  }

  EmbeddedTrajectory traj;
  std::vector<double> pmin_low_S, pmin_low_I, pmax_up_I;
};

enum class Direction { up, down };

DirectionOutcome analyze_direction(const TrajectoryAnalysis& ta, std::int32_t m,
                                   std::int32_t k_mult, Direction dir,
                                   const ProblemBounds& bounds, const GridGeometry& geom,
                                   const AbstractionConfig& cfg) {
  DirectionOutcome out{};
  const Grid& grid = geom.grid();
  const std::int32_t m_target = dir == Direction::up ? m + k_mult : m - k_mult;
  if (m <= 0 || k_mult <= 0) return out;
  if (m_target <= 0 || m_target > geom.m_limit()) return out;  // target line must satisfy I' > 0

  const double target = static_cast<double>(m_target) * grid.eta_I;
  const auto t_low = ta.traj.first_crossing(target, Envelope::lower, cfg.integrator.crossing_tol);
  const auto t_up = ta.traj.first_crossing(target, Envelope::upper, cfg.integrator.crossing_tol);
  if (!t_low || !t_up) return out;

  out.crossings_finite = true;
  out.t_lower = *t_low;
  out.t_upper = *t_up;
  const double w_lo = std::min(out.t_lower, out.t_upper);
  const double w_hi = std::max(out.t_lower, out.t_upper);

  double s_min, s_max;
  ta.window_S_extrema(w_lo, w_hi, s_min, s_max);
  out.succ_S_lo = s_min - grid.eta_S / 2.0;
  out.succ_S_hi = s_max + grid.eta_S / 2.0;
  out.min_lower_S_window = ta.min_lower_S_until(w_hi);

  const double safety_margin = bounds.SS_min + grid.eta_S / 2.0;
  const double line_I = static_cast<double>(m) * grid.eta_I;
  const double eps = static_cast<double>(k_mult) * grid.eta_I;
  if (dir == Direction::up) {
    out.guard_ok = ta.min_lower_S_until(out.t_upper) >= safety_margin;
    if (cfg.strict_direction_check && m - k_mult > 0) {
      const double below = static_cast<double>(m - k_mult) * grid.eta_I;
      out.guard_ok = out.guard_ok && ta.min_lower_I_until(w_hi) > below;
    }
  } else {
    out.guard_ok = ta.min_lower_S_until(out.t_lower) >= safety_margin &&
                   ta.max_upper_I_until(out.t_lower) < line_I + eps;
  }

  if (out.guard_ok) {
    std::int32_t lo = static_cast<std::int32_t>(std::floor(out.succ_S_lo / grid.eta_S + kIndexSlack));
    std::int32_t hi = static_cast<std::int32_t>(std::ceil(out.succ_S_hi / grid.eta_S - kIndexSlack));
    lo = std::max(lo, 0);
    hi = std::min(hi, geom.n_limit(m_target));
    if (lo <= hi) out.range = {true, lo, hi};
  }
  return out;
}

EmbeddedState segment_box(SymbolicState x, const GridGeometry& geom) {
  const State p = geom.point(x);
  const double half = geom.grid().eta_S / 2.0;
  return {{p.S - half, p.I}, {p.S + half, p.I}};
}

EmbeddedState cell_box(SymbolicState x, const GridGeometry& geom) {
  const State p = geom.point(x);
  const double hs = geom.grid().eta_S / 2.0;
  const double hi = geom.grid().eta_I / 2.0;
  return {{p.S - hs, p.I - hi}, {p.S + hs, p.I + hi}};
}

std::vector<double> direction_targets(std::int32_t m, const Thresholds& th,
                                      const GridGeometry& geom) {
  std::vector<double> targets;
  for (std::int32_t k : th.multiples) {
    if (m + k <= geom.m_limit()) targets.push_back(static_cast<double>(m + k) * geom.grid().eta_I);
    if (m - k > 0) targets.push_back(static_cast<double>(m - k) * geom.grid().eta_I);
  }
  return targets;
}

}  // namespace

TripleOutcome analyze_transition_triple(const EmbeddedState& source_box, std::int32_t m,
                                        std::int32_t eps_mult, double u,
                                        const ProblemBounds& bounds, const GridGeometry& geom,
                                        const ModelParams& params, const AbstractionConfig& cfg) {
  TripleOutcome out{};
  if (m <= 0 || eps_mult <= 0) return out;
  std::vector<double> targets;
  if (m + eps_mult <= geom.m_limit())
    targets.push_back(static_cast<double>(m + eps_mult) * geom.grid().eta_I);
  if (m - eps_mult > 0)
    targets.push_back(static_cast<double>(m - eps_mult) * geom.grid().eta_I);
  TrajectoryAnalysis ta(source_box, u, params, cfg.integrator, targets);
  out.up = analyze_direction(ta, m, eps_mult, Direction::up, bounds, geom, cfg);
  out.down = analyze_direction(ta, m, eps_mult, Direction::down, bounds, geom, cfg);
  return out;
}

std::vector<SymbolicState> materialize_successors(const TransitionEntry& entry,
                                                  SymbolicState source, std::int32_t eps_mult) {
  std::vector<SymbolicState> succ;
  if (entry.up.present)
    for (std::int32_t n = entry.up.lo; n <= entry.up.hi; ++n)
      succ.push_back({n, source.m + eps_mult});
  if (entry.down.present)
    for (std::int32_t n = entry.down.lo; n <= entry.down.hi; ++n)
      succ.push_back({n, source.m - eps_mult});
  return succ;
}

std::vector<SymbolicState> compute_transitions_noninitial(
    SymbolicState x, double u, std::int32_t eps_mult, const ProblemBounds& bounds,
    const GridGeometry& geom, const ModelParams& params, const AbstractionConfig& cfg) {
  if (eps_mult <= 0 || x.m <= 0) return {};
  const TripleOutcome out =
      analyze_transition_triple(segment_box(x, geom), x.m, eps_mult, u, bounds, geom, params, cfg);
  return materialize_successors(out.entry(), x, eps_mult);
}

std::vector<SymbolicState> compute_transitions_initial(
    SymbolicState x, double u, std::int32_t eps_mult, const ProblemBounds& bounds,
    const GridGeometry& geom, const ModelParams& params, const AbstractionConfig& cfg) {
  if (eps_mult <= 0 || x.m <= 0) return {};
  const TripleOutcome out =
      analyze_transition_triple(cell_box(x, geom), x.m, eps_mult, u, bounds, geom, params, cfg);
  return materialize_successors(out.entry(), x, eps_mult);
}

DirectionLabel compute_label(const TransitionEntry& entry) { return entry.label(); }

bool compute_label_lf(const TripleOutcome& outcome, std::int32_t m, std::int32_t eps_mult,
                      const ProblemBounds& bounds, const GridGeometry& geom) {
  const TransitionEntry entry = outcome.entry();
  if (entry.empty()) return false;
  const std::int32_t lf_limit =
      static_cast<std::int32_t>(std::floor(bounds.IF_max / geom.grid().eta_I + kIndexSlack));
  if (m + eps_mult > lf_limit) return false;
  const double margin = bounds.SF_min + geom.grid().eta_S / 2.0;
  if (entry.up.present && outcome.up.min_lower_S_window < margin) return false;
  if (entry.down.present && outcome.down.min_lower_S_window < margin) return false;
  return true;
}

std::ptrdiff_t SymbolicModel::initial_position(std::size_t state_idx) const {
  const auto it = std::lower_bound(sets.initial_states.begin(), sets.initial_states.end(), state_idx);
  if (it == sets.initial_states.end() || *it != state_idx) return -1;
  return it - sets.initial_states.begin();
}

std::uint64_t SymbolicModel::config_digest() const {
  char buf[4096];
  int len = std::snprintf(
      buf, sizeof(buf),
      "gamma=%.17g;xi=%.17g;u=", params.gamma, params.xi);
  std::string s(buf, static_cast<std::size_t>(len));
  for (double u : params.u_levels) {
    std::snprintf(buf, sizeof(buf), "%.17g,", u);
    s += buf;
  }
  std::snprintf(buf, sizeof(buf), ";etaS=%.17g;etaI=%.17g;eps=", grid.eta_S, grid.eta_I);
  s += buf;
  for (std::int32_t k : thresholds.multiples) {
    std::snprintf(buf, sizeof(buf), "%d,", k);
    s += buf;
  }
  std::snprintf(buf, sizeof(buf),
                ";b=%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g"
                ";step=%.17g;horizon=%.17g;ctol=%.17g;strict=%d",
                bounds.S0_min, bounds.S0_max, bounds.I0_min, bounds.I0_max, bounds.SS_min,
                bounds.IS_max, bounds.SF_min, bounds.IF_max, config.integrator.step,
                config.integrator.horizon, config.integrator.crossing_tol,
                config.strict_direction_check ? 1 : 0);
  s += buf;
  // FNV-1a
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

SymbolicModel build_symbolic_model(const ProblemBounds& bounds, const Grid& grid,
                                   const Thresholds& thresholds, const ModelParams& params,
                                   const AbstractionConfig& cfg) {
  params.validate();
  thresholds.validate(grid);
  cfg.integrator.validate();

  SymbolicModel model;
  model.grid = grid;
  model.bounds = bounds;
  model.params = params;
  model.thresholds = thresholds;
  model.config = cfg;
  model.sets = build_grid_sets(bounds, grid);

  const GridGeometry& geom = model.sets.geom;
  const std::size_t N = geom.state_count();
  const std::size_t P = model.pair_count();
  model.trans.assign(N * P, {});
  model.label_lf.assign(N * P, 0);
  const std::size_t N0 = model.sets.initial_states.size();
  model.trans0.assign(N0 * P, {});
  model.label_l.assign(N0 * P, static_cast<std::uint8_t>(DirectionLabel::empty));

  const unsigned workers = cfg.workers ? cfg.workers
                                       : std::max(1u, std::thread::hardware_concurrency());

  auto analyze_state = [&](std::size_t idx) {
    const SymbolicState s = geom.state(idx);
    if (s.m <= 0) return;
    const std::vector<double> targets = direction_targets(s.m, thresholds, geom);
    if (targets.empty()) return;
    for (std::size_t u_idx = 0; u_idx < params.u_levels.size(); ++u_idx) {
      const double u = params.u_levels[u_idx];
      TrajectoryAnalysis ta(segment_box(s, geom), u, params, cfg.integrator, targets);
      for (std::size_t e_idx = 0; e_idx < thresholds.count(); ++e_idx) {
        const std::int32_t k = thresholds.multiples[e_idx];
        TripleOutcome out;
        out.up = analyze_direction(ta, s.m, k, Direction::up, bounds, geom, cfg);
        out.down = analyze_direction(ta, s.m, k, Direction::down, bounds, geom, cfg);
        const std::size_t slot = idx * P + model.pair_index(u_idx, e_idx);
        model.trans[slot] = out.entry();
        model.label_lf[slot] = compute_label_lf(out, s.m, k, bounds, geom) ? 1 : 0;
      }
    }
  };

  auto analyze_initial = [&](std::size_t pos) {
    const std::size_t idx = model.sets.initial_states[pos];
    const SymbolicState s = geom.state(idx);
    if (s.m <= 0) return;
    const std::vector<double> targets = direction_targets(s.m, thresholds, geom);
    if (targets.empty()) return;
    for (std::size_t u_idx = 0; u_idx < params.u_levels.size(); ++u_idx) {
      const double u = params.u_levels[u_idx];
      TrajectoryAnalysis ta(cell_box(s, geom), u, params, cfg.integrator, targets);
      for (std::size_t e_idx = 0; e_idx < thresholds.count(); ++e_idx) {
        const std::int32_t k = thresholds.multiples[e_idx];
        TripleOutcome out;
        out.up = analyze_direction(ta, s.m, k, Direction::up, bounds, geom, cfg);
        out.down = analyze_direction(ta, s.m, k, Direction::down, bounds, geom, cfg);
        const std::size_t slot = pos * P + model.pair_index(u_idx, e_idx);
        model.trans0[slot] = out.entry();
        model.label_l[slot] = static_cast<std::uint8_t>(out.entry().label());
      }
    }
  };

  std::atomic<std::size_t> cursor{0};
  const std::size_t total = N + N0;
  auto worker = [&]() {
    constexpr std::size_t chunk = 32;
    for (;;) {
      const std::size_t begin = cursor.fetch_add(chunk);
      if (begin >= total) break;
      const std::size_t end = std::min(begin + chunk, total);
      for (std::size_t i = begin; i < end; ++i) {
        if (i < N)
          analyze_state(i);
        else
          analyze_initial(i - N);
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return model;
}

}  // namespace sirsynth
