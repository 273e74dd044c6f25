/*
 * abstraction.hpp
 *
 * Finite symbolic model of the event-triggered SIRS system: per-state
 * source boxes are propagated through the embedded envelope system, the
 * envelope crossing times at the I-lines eta_I above/below the source
 * determine which event successors exist, and the labels classify the
 * trigger direction and terminal admissibility.
 *
 * Transitions are stored as S-index ranges per direction: the successor
 * set on a target I-line is the outward-rounded grid cover of a connected
 * interval, so a (lo, hi) pair is exact.
 */

#ifndef SIRSYNTH_ABSTRACTION_HPP_
#define SIRSYNTH_ABSTRACTION_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sirsynth/grid.hpp"

namespace sirsynth {

enum class DirectionLabel : std::uint8_t { empty = 0, increase = 1, decrease = 2, mixed = 3 };

struct SuccessorRange {
  bool present = false;
  std::int32_t lo = 0;
  std::int32_t hi = -1;

  std::int32_t count() const { return present ? hi - lo + 1 : 0; }
};

struct TransitionEntry {
  SuccessorRange up;    // successors on the I-line m + k
  SuccessorRange down;  // successors on the I-line m - k

  bool empty() const { return !up.present && !down.present; }
  DirectionLabel label() const {
    if (up.present && down.present) return DirectionLabel::mixed;
    if (up.present) return DirectionLabel::increase;
    if (down.present) return DirectionLabel::decrease;
    return DirectionLabel::empty;
  }
};

struct AbstractionConfig {
  IntegratorConfig integrator;
  /* Adds the guard excluding a prior downward crossing to the increase
   * direction (lower I-envelope must stay above the decrease line on the
   * whole crossing window). Off by default. */
  bool strict_direction_check = false;
  unsigned workers = 0;  // 0 = hardware concurrency
};

/* Per-direction analysis of one (source box, input, threshold) triple. */
struct DirectionOutcome {
  bool crossings_finite = false;  // both envelope crossing times < horizon
  double t_lower = 0.0;           // first crossing of the lower I-envelope
  double t_upper = 0.0;           // first crossing of the upper I-envelope
  bool guard_ok = false;          // side conditions of the direction
  double succ_S_lo = 0.0;         // continuous successor S-interval,
  double succ_S_hi = 0.0;         //   already inflated by eta_S/2
  double min_lower_S_window = 0.0;  // min lower-S envelope on [0, max crossing]
  SuccessorRange range;             // grid successors (present iff admissible)
};

struct TripleOutcome {
  DirectionOutcome up;
  DirectionOutcome down;

  TransitionEntry entry() const { return {up.range, down.range}; }
};

/* Analyze one triple from an explicit source box. The trajectory of the
 * embedded system is recorded internally up to the configured horizon. */
TripleOutcome analyze_transition_triple(const EmbeddedState& source_box,
                                        std::int32_t m, std::int32_t eps_mult, double u,
                                        const ProblemBounds& bounds, const GridGeometry& geom,
                                        const ModelParams& params, const AbstractionConfig& cfg);

/* Transition function for the non-initial time: source box is the
 * horizontal segment of half-width eta_S/2 at the grid point. */
std::vector<SymbolicState> compute_transitions_noninitial(
    SymbolicState x, double u, std::int32_t eps_mult, const ProblemBounds& bounds,
    const GridGeometry& geom, const ModelParams& params, const AbstractionConfig& cfg);

/* Transition function for the initial time: source box is the half-cell
 * rectangle around the grid point. */
std::vector<SymbolicState> compute_transitions_initial(
    SymbolicState x, double u, std::int32_t eps_mult, const ProblemBounds& bounds,
    const GridGeometry& geom, const ModelParams& params, const AbstractionConfig& cfg);

DirectionLabel compute_label(const TransitionEntry& entry);

/* Terminal label: nonempty transitions, the raised line stays at or below
 * the terminal I-bound, and the lower S-envelope keeps the terminal margin
 * on every contributing direction's crossing window. */
bool compute_label_lf(const TripleOutcome& outcome, std::int32_t m, std::int32_t eps_mult,
                      const ProblemBounds& bounds, const GridGeometry& geom);

std::vector<SymbolicState> materialize_successors(const TransitionEntry& entry,
                                                  SymbolicState source, std::int32_t eps_mult);

class SymbolicModel {
 public:
  Grid grid;
  ProblemBounds bounds;
  ModelParams params;
  Thresholds thresholds;
  AbstractionConfig config;
  GridSets sets;

  /* dense records over state x (input, threshold) pairs */
  std::vector<TransitionEntry> trans;   // [state_idx * pair_count + pair]
  std::vector<std::uint8_t> label_lf;   // same shape
  /* initial layer, indexed by position in sets.initial_states */
  std::vector<TransitionEntry> trans0;
  std::vector<std::uint8_t> label_l;    // DirectionLabel values

  std::size_t pair_count() const { return params.u_levels.size() * thresholds.count(); }
  std::size_t pair_index(std::size_t u_idx, std::size_t eps_idx) const {
    return u_idx * thresholds.count() + eps_idx;
  }
  double pair_u(std::size_t pair) const { return params.u_levels[pair / thresholds.count()]; }
  std::int32_t pair_eps_mult(std::size_t pair) const {
    return thresholds.multiples[pair % thresholds.count()];
  }
  double pair_eps(std::size_t pair) const {
    return static_cast<double>(pair_eps_mult(pair)) * grid.eta_I;
  }

  const TransitionEntry& transition(std::size_t state_idx, std::size_t pair) const {
    return trans[state_idx * pair_count() + pair];
  }
  bool lf(std::size_t state_idx, std::size_t pair) const {
    return label_lf[state_idx * pair_count() + pair] != 0;
  }
  /* position of a state in the initial list, or -1 */
  std::ptrdiff_t initial_position(std::size_t state_idx) const;
  const TransitionEntry& transition0(std::size_t init_pos, std::size_t pair) const {
    return trans0[static_cast<std::size_t>(init_pos) * pair_count() + pair];
  }
  DirectionLabel label0(std::size_t init_pos, std::size_t pair) const {
    return static_cast<DirectionLabel>(label_l[static_cast<std::size_t>(init_pos) * pair_count() + pair]);
  }

  /* digest of everything that determines the model content */
  std::uint64_t config_digest() const;
};

/* Build the full model. Transition computation is partitioned over states;
 * the result is independent of the worker count. */
SymbolicModel build_symbolic_model(const ProblemBounds& bounds, const Grid& grid,
                                   const Thresholds& thresholds, const ModelParams& params,
                                   const AbstractionConfig& cfg);

}  // namespace sirsynth

#endif  // SIRSYNTH_ABSTRACTION_HPP_
