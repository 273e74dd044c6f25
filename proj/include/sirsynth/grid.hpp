/*
 * grid.hpp
 *
 * Uniform grid over the state simplex, the problem bounds (initial, safe,
 * terminal boxes), candidate thresholds, and the discretized state sets.
 *
 * Grid states are integer index pairs (n, m) representing the point
 * (n*eta_S, m*eta_I). Thresholds are stored as integer multiples of eta_I
 * so that successor I-offsets are exact.
 */

#ifndef SIRSYNTH_GRID_HPP_
#define SIRSYNTH_GRID_HPP_

#include <cstdint>
#include <vector>

#include "sirsynth/dynamics.hpp"

namespace sirsynth {

struct Grid {
  double eta_S = 0.01;
  double eta_I = 0.01;

  void validate() const;
};

struct SymbolicState {
  std::int32_t n = 0;  // S index
  std::int32_t m = 0;  // I index

  friend bool operator==(const SymbolicState&, const SymbolicState&) = default;
  friend auto operator<=>(const SymbolicState&, const SymbolicState&) = default;
};

/* Actionable candidate thresholds, each a positive integer multiple of
 * eta_I, strictly ascending. The zero threshold of the candidate set is
 * non-actionable and not stored. */
struct Thresholds {
  std::vector<std::int32_t> multiples;

  void validate(const Grid& grid) const;
  std::size_t count() const { return multiples.size(); }
  double value(std::size_t idx, const Grid& grid) const {
    return static_cast<double>(multiples[idx]) * grid.eta_I;
  }
};

/* Rectangular bounds of X_0, X_S and X_F. X_S and X_F are upper-left-open
 * corners of the simplex: S >= *_min_S and I <= *_max_I. */
struct ProblemBounds {
  double S0_min = 0.0, S0_max = 0.0, I0_min = 0.0, I0_max = 0.0;
  double SS_min = 0.0, IS_max = 0.0;  // X_S: S >= SS_min, I <= IS_max
  double SF_min = 0.0, IF_max = 0.0;  // X_F: S >= SF_min, I <= IF_max

  void validate() const;
  bool in_safe(const State& x) const {
    return x.in_simplex() && x.S >= SS_min && x.I <= IS_max;
  }
  bool in_target(const State& x) const {
    return x.in_simplex() && x.S >= SF_min && x.I <= IF_max;
  }
  bool in_initial(const State& x) const {
    return x.in_simplex() && x.S >= S0_min && x.S <= S0_max && x.I >= I0_min && x.I <= I0_max;
  }
};

/* Index bookkeeping for the discretized simplex [X]_{eta_S,eta_I}. States
 * are enumerated lexicographically by (n, m); for fixed n the admissible m
 * are contiguous from 0, so lookups are offset arithmetic. */
class GridGeometry {
 public:
  GridGeometry() = default;
  explicit GridGeometry(const Grid& grid);

  const Grid& grid() const { return grid_; }
  std::int32_t n_max() const { return n_max_; }
  std::int32_t m_max(std::int32_t n) const { return m_max_[static_cast<std::size_t>(n)]; }
  std::size_t state_count() const { return total_; }

  /* largest admissible S index on the I-row m, or -1 if the row is empty */
  std::int32_t n_limit(std::int32_t m) const;
  std::int32_t m_limit() const { return m_limit_; }

  bool valid(SymbolicState s) const {
    return s.n >= 0 && s.n <= n_max_ && s.m >= 0 && s.m <= m_max(s.n);
  }
  std::size_t index(SymbolicState s) const {
    return offset_[static_cast<std::size_t>(s.n)] + static_cast<std::size_t>(s.m);
  }
  SymbolicState state(std::size_t idx) const;
  State point(SymbolicState s) const {
    return {static_cast<double>(s.n) * grid_.eta_S, static_cast<double>(s.m) * grid_.eta_I};
  }

  /* Grid-index rounding helpers with a relative slack of 1e-6 grid cells. */
  std::int32_t floor_S(double S) const;
  std::int32_t ceil_S(double S) const;
  std::int32_t round_S(double S) const;
  std::int32_t round_I(double I) const;
  std::int32_t floor_I(double I) const;

 private:
  Grid grid_;
  std::int32_t n_max_ = -1;
  std::int32_t m_limit_ = -1;
  std::vector<std::int32_t> m_max_;
  std::vector<std::size_t> offset_;
  std::size_t total_ = 0;
};

/* The discretized sets of the symbolic model: all grid states, plus masks
 * for the initial (exterior-inflated), safe and terminal (interior-shrunk)
 * sets. */
struct GridSets {
  GridGeometry geom;
  std::vector<std::uint8_t> is_initial;  // over state index
  std::vector<std::uint8_t> is_safe;
  std::vector<std::uint8_t> is_target;
  std::vector<std::size_t> initial_states;  // sorted state indices

  std::size_t count_initial() const { return initial_states.size(); }
};

/* X_0 is discretized through the half-cell exterior operator so that every
 * concrete initial point has a grid state within (eta_S/2, eta_I/2); X_S and
 * X_F through the full-cell interior operator so that R-related concrete
 * states inherit membership. Throws if the safe or target set discretizes
 * to nothing. */
GridSets build_grid_sets(const ProblemBounds& bounds, const Grid& grid);

}  // namespace sirsynth

#endif  // SIRSYNTH_GRID_HPP_
