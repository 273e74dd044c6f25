#include "sirsynth/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace sirsynth {

namespace {
constexpr double kIndexSlack = 1e-6;  // in units of grid cells
}

void Grid::validate() const {
  if (!(eta_S > 0.0) || !(eta_I > 0.0))
    throw std::invalid_argument("grid resolutions must be > 0");
}

void Thresholds::validate(const Grid& grid) const {
  grid.validate();
  if (multiples.empty()) throw std::invalid_argument("threshold set must be nonempty");
  for (std::size_t i = 0; i < multiples.size(); ++i) {
    if (multiples[i] < 1)
      throw std::invalid_argument("thresholds must be positive multiples of eta_I");
    if (i > 0 && multiples[i] <= multiples[i - 1])
      throw std::invalid_argument("thresholds must be strictly ascending");
    if (!(static_cast<double>(multiples[i]) * grid.eta_I < 1.0))
      throw std::invalid_argument("thresholds must be < 1");
  }
}

void ProblemBounds::validate() const {
  auto in01 = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in01(S0_min) || !in01(S0_max) || !in01(I0_min) || !in01(I0_max) || !in01(SS_min) ||
      !in01(IS_max) || !in01(SF_min) || !in01(IF_max))
    throw std::invalid_argument("all bounds must lie in (0,1)");
  if (!(S0_min <= S0_max && I0_min <= I0_max))
    throw std::invalid_argument("initial box must be nonempty");
  if (!(S0_max + I0_max <= 1.0))
    throw std::invalid_argument("initial box must lie in the simplex");
  if (!(SF_min > SS_min)) throw std::invalid_argument("requires SF_min > SS_min");
  if (!(IF_max < IS_max)) throw std::invalid_argument("requires IF_max < IS_max");
  if (!(S0_min >= SS_min && I0_max <= IS_max))
    throw std::invalid_argument("initial set must be contained in the safe set");
  if (S0_max >= SF_min && I0_min <= IF_max)
    throw std::invalid_argument("initial set must be disjoint from the terminal set");
}

GridGeometry::GridGeometry(const Grid& grid) : grid_(grid) {
  grid.validate();
  n_max_ = static_cast<std::int32_t>(std::floor(1.0 / grid.eta_S + kIndexSlack));
  m_limit_ = static_cast<std::int32_t>(std::floor(1.0 / grid.eta_I + kIndexSlack));
  m_max_.resize(static_cast<std::size_t>(n_max_) + 1);
  offset_.resize(static_cast<std::size_t>(n_max_) + 1);
  total_ = 0;
  for (std::int32_t n = 0; n <= n_max_; ++n) {
    const double room = 1.0 - static_cast<double>(n) * grid.eta_S;
    m_max_[static_cast<std::size_t>(n)] =
        static_cast<std::int32_t>(std::floor(room / grid.eta_I + kIndexSlack));
    offset_[static_cast<std::size_t>(n)] = total_;
    total_ += static_cast<std::size_t>(m_max_[static_cast<std::size_t>(n)]) + 1;
  }
}

std::int32_t GridGeometry::n_limit(std::int32_t m) const {
  if (m < 0 || m > m_limit_) return -1;
  const double room = 1.0 - static_cast<double>(m) * grid_.eta_I;
  if (room < -1e-12) return -1;
  return static_cast<std::int32_t>(std::floor(room / grid_.eta_S + kIndexSlack));
}

SymbolicState GridGeometry::state(std::size_t idx) const {
  // binary search over the row offsets
  std::size_t lo = 0, hi = offset_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi + 1) / 2;
    if (offset_[mid] <= idx)
      lo = mid;
    else
      hi = mid - 1;
  }
  return {static_cast<std::int32_t>(lo), static_cast<std::int32_t>(idx - offset_[lo])};
}

std::int32_t GridGeometry::floor_S(double S) const {
  return static_cast<std::int32_t>(std::floor(S / grid_.eta_S + kIndexSlack));
}
std::int32_t GridGeometry::ceil_S(double S) const {
  return static_cast<std::int32_t>(std::ceil(S / grid_.eta_S - kIndexSlack));
}
std::int32_t GridGeometry::round_S(double S) const {
  return static_cast<std::int32_t>(std::llround(S / grid_.eta_S));
}
std::int32_t GridGeometry::round_I(double I) const {
  return static_cast<std::int32_t>(std::llround(I / grid_.eta_I));
}
std::int32_t GridGeometry::floor_I(double I) const {
  return static_cast<std::int32_t>(std::floor(I / grid_.eta_I + kIndexSlack));
}

GridSets build_grid_sets(const ProblemBounds& bounds, const Grid& grid) {
  bounds.validate();
  GridSets sets;
  sets.geom = GridGeometry(grid);
  const std::size_t N = sets.geom.state_count();
  sets.is_initial.assign(N, 0);
  sets.is_safe.assign(N, 0);
  sets.is_target.assign(N, 0);

  const double hs = grid.eta_S, hi = grid.eta_I;
  const double cmp = 1e-9;

  for (std::size_t idx = 0; idx < N; ++idx) {
    const SymbolicState s = sets.geom.state(idx);
    const State p = sets.geom.point(s);

    // Out_{eta/2}(X_0): grid states whose half cell meets the initial box
    const bool init = p.S >= bounds.S0_min - hs / 2.0 - cmp &&
                      p.S <= bounds.S0_max + hs / 2.0 + cmp &&
                      p.I >= bounds.I0_min - hi / 2.0 - cmp &&
                      p.I <= bounds.I0_max + hi / 2.0 + cmp;

    // Int_{eta}(X_S) and Int_{eta}(X_F): the full eta-box around the grid
    // point must stay inside the set (and inside the simplex).
    const bool box_in_X = p.S - hs >= -cmp && p.I - hi >= -cmp &&
                          (p.S + hs) + (p.I + hi) <= 1.0 + cmp;
    const bool safe = box_in_X && p.S - hs >= bounds.SS_min - cmp &&
                      p.I + hi <= bounds.IS_max + cmp;
    const bool target = box_in_X && p.S - hs >= bounds.SF_min - cmp &&
                        p.I + hi <= bounds.IF_max + cmp;

    sets.is_initial[idx] = init ? 1 : 0;
    sets.is_safe[idx] = safe ? 1 : 0;
    sets.is_target[idx] = target ? 1 : 0;
    if (init) sets.initial_states.push_back(idx);
  }

  bool any_safe = false, any_target = false;
  for (std::size_t idx = 0; idx < N; ++idx) {
    any_safe = any_safe || sets.is_safe[idx];
    any_target = any_target || sets.is_target[idx];
  }
  if (!any_target) throw std::runtime_error("terminal set discretizes to nothing; grid too coarse");
  if (!any_safe) throw std::runtime_error("safe set discretizes to nothing; grid too coarse");
  if (sets.initial_states.empty())
    throw std::runtime_error("initial set discretizes to nothing; grid too coarse");
  return sets;
}

}  // namespace sirsynth
