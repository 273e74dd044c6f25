#include "sirsynth/refine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sirsynth {

namespace {
constexpr double kHalfCellSlack = 1e-12;
}

bool Relation::r0_related(SymbolicState xt, const State& x) const {
  const double S_t = static_cast<double>(xt.n) * grid.eta_S;
  const double I_t = static_cast<double>(xt.m) * grid.eta_I;
  return std::abs(S_t - x.S) <= grid.eta_S / 2.0 + kHalfCellSlack &&
         std::abs(I_t - x.I) <= grid.eta_I / 2.0 + kHalfCellSlack;
}

std::optional<std::int32_t> Relation::snap_row(double I) const {
  const auto m = static_cast<std::int32_t>(std::llround(I / grid.eta_I));
  if (m < 0) return std::nullopt;
  if (std::abs(I - static_cast<double>(m) * grid.eta_I) > snap_tol) return std::nullopt;
  return m;
}

bool Relation::r_related(SymbolicState xt, const State& x) const {
  const auto row = snap_row(x.I);
  if (!row || *row != xt.m) return false;
  const double S_t = static_cast<double>(xt.n) * grid.eta_S;
  return std::abs(S_t - x.S) <= grid.eta_S / 2.0 + kHalfCellSlack;
}

SymbolicState nearest_state(const State& x, const std::vector<SymbolicState>& candidates,
                            const Grid& grid) {
  if (candidates.empty()) throw std::invalid_argument("nearest_state: empty candidate set");
  SymbolicState best = candidates.front();
  double best_d2 = std::numeric_limits<double>::infinity();
  for (const SymbolicState& c : candidates) {
    const double dS = static_cast<double>(c.n) * grid.eta_S - x.S;
    const double dI = static_cast<double>(c.m) * grid.eta_I - x.I;
    const double d2 = dS * dS + dI * dI;
    if (d2 < best_d2 || (d2 == best_d2 && c < best)) {
      best_d2 = d2;
      best = c;
    }
  }
  return best;
}

ConcretePolicy::ConcretePolicy(const SymbolicModel& model, const SynthesisResult& synth)
    : model_(&model), synth_(&synth) {
  rel_.grid = model.grid;
  const GridGeometry& geom = model.sets.geom;
  for (std::size_t idx = 0; idx < geom.state_count(); ++idx)
    if (synth.reach.winning0[idx]) initial_winning_.push_back(geom.state(idx));
}

std::vector<SymbolicState> ConcretePolicy::winning_states(const StateMask& mask) const {
  std::vector<SymbolicState> out;
  const GridGeometry& geom = model_->sets.geom;
  for (std::size_t idx = 0; idx < geom.state_count(); ++idx)
    if (mask[idx]) out.push_back(geom.state(idx));
  return out;
}

bool ConcretePolicy::in_initial_domain(const State& x) const {
  if (!model_->bounds.in_initial(x)) return false;
  for (const SymbolicState& s : initial_winning_)
    if (rel_.r0_related(s, x)) return true;
  return false;
}

std::optional<SymbolicState> ConcretePolicy::nearest_winning_row(double S, std::int32_t m,
                                                                 const StateMask& mask) const {
  const GridGeometry& geom = model_->sets.geom;
  if (m < 0 || m > geom.m_limit()) return std::nullopt;
  const std::int32_t n_hi = geom.n_limit(m);
  // only grid states within the half cell are R-related; scanning ascending
  // keeps the lexicographically smaller state on distance ties
  const auto n0 = static_cast<std::int32_t>(std::llround(S / model_->grid.eta_S));
  std::optional<SymbolicState> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::int32_t n = std::max(0, n0 - 1); n <= std::min(n_hi, n0 + 1); ++n) {
    const SymbolicState cand{n, m};
    if (!mask[geom.index(cand)]) continue;
    const double d = std::abs(static_cast<double>(n) * model_->grid.eta_S - S);
    if (d > model_->grid.eta_S / 2.0 + kHalfCellSlack) continue;
    if (d < best_d) {
      best_d = d;
      best = cand;
    }
  }
  return best;
}

bool ConcretePolicy::in_reach_domain_row(double S, std::int32_t m) const {
  return nearest_winning_row(S, m, synth_->reach.winning).has_value();
}
bool ConcretePolicy::in_terminal_domain_row(double S, std::int32_t m) const {
  return nearest_winning_row(S, m, synth_->safety.winning).has_value();
}
bool ConcretePolicy::in_reach_domain(const State& x) const {
  const auto row = rel_.snap_row(x.I);
  return row && in_reach_domain_row(x.S, *row);
}
bool ConcretePolicy::in_terminal_domain(const State& x) const {
  const auto row = rel_.snap_row(x.I);
  return row && in_terminal_domain_row(x.S, *row);
}

std::vector<PairChoice> ConcretePolicy::query_initial(const State& x) const {
  if (!in_initial_domain(x)) throw std::domain_error("state outside the initial policy domain");
  const SymbolicState xt = nearest_state(x, initial_winning_, model_->grid);
  const std::size_t idx = model_->sets.geom.index(xt);
  const std::ptrdiff_t pos = model_->initial_position(idx);
  const double I_t = static_cast<double>(xt.m) * model_->grid.eta_I;
  std::vector<PairChoice> out;
  for (std::int32_t p : synth_->reach.policy0[idx]) {
    const auto pair = static_cast<std::size_t>(p);
    const DirectionLabel label = model_->label0(static_cast<std::size_t>(pos), pair);
    PairChoice c;
    c.u = model_->pair_u(pair);
    c.u_idx = pair / model_->thresholds.count();
    c.eps_idx = pair % model_->thresholds.count();
    c.eps_mult = model_->pair_eps_mult(pair);
    c.direction = label;
    c.source = xt;
    const double eps_t = model_->pair_eps(pair);
    // adjust so the trigger lands exactly on the grid line I_t +- eps_t
    c.eps = label == DirectionLabel::increase ? eps_t + (I_t - x.I) : eps_t + (x.I - I_t);
    out.push_back(c);
  }
  return out;
}

namespace {
std::vector<PairChoice> pass_through(const SymbolicModel& model, SymbolicState xt,
                                     const std::vector<std::int32_t>& pairs) {
  std::vector<PairChoice> out;
  for (std::int32_t p : pairs) {
    const auto pair = static_cast<std::size_t>(p);
    PairChoice c;
    c.u = model.pair_u(pair);
    c.u_idx = pair / model.thresholds.count();
    c.eps_idx = pair % model.thresholds.count();
    c.eps_mult = model.pair_eps_mult(pair);
    c.eps = model.pair_eps(pair);
    c.direction = model.transition(model.sets.geom.index(xt), pair).label();
    c.source = xt;
    out.push_back(c);
  }
  return out;
}
}  // namespace

std::vector<PairChoice> ConcretePolicy::query_reach_row(double S, std::int32_t m) const {
  const auto xt = nearest_winning_row(S, m, synth_->reach.winning);
  if (!xt) throw std::domain_error("state outside the reach policy domain");
  return pass_through(*model_, *xt, synth_->reach.policy[model_->sets.geom.index(*xt)]);
}

std::vector<PairChoice> ConcretePolicy::query_terminal_row(double S, std::int32_t m) const {
  const auto xt = nearest_winning_row(S, m, synth_->safety.winning);
  if (!xt) throw std::domain_error("state outside the terminal policy domain");
  return pass_through(*model_, *xt, synth_->safety.policy[model_->sets.geom.index(*xt)]);
}

std::vector<PairChoice> ConcretePolicy::query_reach(const State& x) const {
  const auto row = rel_.snap_row(x.I);
  if (!row) throw std::domain_error("state outside the reach policy domain");
  return query_reach_row(x.S, *row);
}

std::vector<PairChoice> ConcretePolicy::query_terminal(const State& x) const {
  const auto row = rel_.snap_row(x.I);
  if (!row) throw std::domain_error("state outside the terminal policy domain");
  return query_terminal_row(x.S, *row);
}

std::int32_t ConcretePolicy::rank_of(SymbolicState s) const {
  return synth_->reach.rank[model_->sets.geom.index(s)];
}

CoverageReport check_initial_coverage(const ProblemBounds& bounds,
                                      const std::vector<SymbolicState>& initial_winning,
                                      const Grid& grid) {
  CoverageReport report;
  const GridGeometry geom(grid);
  const double hs = grid.eta_S / 2.0, hi = grid.eta_I / 2.0;
  // The interiors of distinct half cells are disjoint, so X_0 is covered
  // exactly when every cell meeting X_0 with positive area is present.
  std::vector<std::uint8_t> present(geom.state_count(), 0);
  for (const SymbolicState& s : initial_winning)
    if (geom.valid(s)) present[geom.index(s)] = 1;

  const std::int32_t n_lo = geom.ceil_S(bounds.S0_min - hs);
  const std::int32_t n_hi = geom.floor_S(bounds.S0_max + hs);
  const std::int32_t m_lo = std::max(0, static_cast<std::int32_t>(
                                            std::ceil((bounds.I0_min - hi) / grid.eta_I - 1e-6)));
  const std::int32_t m_hi = geom.floor_I(bounds.I0_max + hi);
  for (std::int32_t n = std::max(0, n_lo); n <= n_hi; ++n) {
    for (std::int32_t m = m_lo; m <= m_hi; ++m) {
      const SymbolicState s{n, m};
      if (!geom.valid(s)) continue;
      const State p = geom.point(s);
      const double S_lo = std::max(p.S - hs, bounds.S0_min);
      const double S_hi = std::min(p.S + hs, bounds.S0_max);
      const double I_lo = std::max(p.I - hi, bounds.I0_min);
      const double I_hi = std::min(p.I + hi, bounds.I0_max);
      if (S_hi - S_lo <= 1e-12 || I_hi - I_lo <= 1e-12) continue;  // no interior overlap
      if (!present[geom.index(s)]) {
        report.covered = false;
        report.uncovered.push_back({{S_lo, I_lo}, {S_hi, I_hi}});
      }
    }
  }
  return report;
}

}  // namespace sirsynth
