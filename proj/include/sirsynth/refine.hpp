/*
 * refine.hpp
 *
 * Refinement of abstract policies into concrete event-triggered policies
 * through the two alternating-simulation relations: the half-cell relation
 * for the initial time (threshold adjusted so the first trigger lands on a
 * grid line) and the segment relation for all later times (identical
 * threshold pass-through).
 */

#ifndef SIRSYNTH_REFINE_HPP_
#define SIRSYNTH_REFINE_HPP_

#include <optional>
#include <vector>

#include "sirsynth/games.hpp"
#include "sirsynth/reach.hpp"

namespace sirsynth {

/* Relation membership tests. R pairs share the exact I-line (after grid
 * snapping with tolerance snap_tol); R0 pairs live within the half cell. */
struct Relation {
  Grid grid;
  double snap_tol = 1e-9;

  bool r0_related(SymbolicState xt, const State& x) const;
  bool r_related(SymbolicState xt, const State& x) const;
  /* I-row of x if its I-coordinate lies on the grid within snap_tol */
  std::optional<std::int32_t> snap_row(double I) const;
};

/* Euclidean-nearest candidate; ties broken lexicographically by (n, m). */
SymbolicState nearest_state(const State& x, const std::vector<SymbolicState>& candidates,
                            const Grid& grid);

enum class Phase { reach_initial, reach, terminal };

/* One admissible concrete choice at a state. For initial queries eps is the
 * adjusted threshold and direction/target_row describe the landing line;
 * for the other phases eps equals the abstract threshold and the landing
 * line is source_row +- eps_mult, decided by the trigger direction. */
struct PairChoice {
  double u = 0.0;
  double eps = 0.0;
  std::size_t u_idx = 0;
  std::size_t eps_idx = 0;
  std::int32_t eps_mult = 0;
  DirectionLabel direction = DirectionLabel::empty;  // determinate for initial pairs
  SymbolicState source;                              // grid state the pair came from
};

/* Read-only view tying a symbolic model to its synthesis result. */
class ConcretePolicy {
 public:
  ConcretePolicy(const SymbolicModel& model, const SynthesisResult& synth);

  const SymbolicModel& model() const { return *model_; }
  const SynthesisResult& synthesis() const { return *synth_; }
  const Relation& relation() const { return rel_; }

  /* concrete domains */
  bool in_initial_domain(const State& x) const;                   // X'_0
  bool in_reach_domain(const State& x) const;                     // X'
  bool in_terminal_domain(const State& x) const;                  // X'_F
  bool in_reach_domain_row(double S, std::int32_t m) const;       // X' on a known row
  bool in_terminal_domain_row(double S, std::int32_t m) const;

  /* policy queries; throw std::domain_error outside the matching domain */
  std::vector<PairChoice> query_initial(const State& x) const;
  std::vector<PairChoice> query_reach(const State& x) const;
  std::vector<PairChoice> query_terminal(const State& x) const;
  std::vector<PairChoice> query_reach_row(double S, std::int32_t m) const;
  std::vector<PairChoice> query_terminal_row(double S, std::int32_t m) const;

  /* nearest winning grid state on the row; nullopt if none is R-related */
  std::optional<SymbolicState> nearest_winning_row(double S, std::int32_t m,
                                                   const StateMask& mask) const;
  std::int32_t rank_of(SymbolicState s) const;

  std::vector<SymbolicState> winning_states(const StateMask& mask) const;

 private:
  const SymbolicModel* model_;
  const SynthesisResult* synth_;
  Relation rel_;
  std::vector<SymbolicState> initial_winning_;  // X̃'_0 as states
};

struct CoverageReport {
  bool covered = true;
  std::vector<IntervalBox> uncovered;  // sub-rectangles of X_0 with no half cell
};

/* Checks that the half cells of the given initial grid states cover the
 * whole initial box. */
CoverageReport check_initial_coverage(const ProblemBounds& bounds,
                                      const std::vector<SymbolicState>& initial_winning,
                                      const Grid& grid);

}  // namespace sirsynth

#endif  // SIRSYNTH_REFINE_HPP_
