/*
 * games.hpp
 *
 * Safety and reachability games on a finite arena. The arena abstracts the
 * symbolic model's transition structure so the solvers also run on small
 * hand-built or randomly generated models.
 *
 * Conventions: a (state, pair) with an empty successor list never counts as
 * a controllable move, and all set iterations are in state-index order, so
 * winning sets, ranks and policies are reproducible bit for bit.
 */

#ifndef SIRSYNTH_GAMES_HPP_
#define SIRSYNTH_GAMES_HPP_

#include <cstdint>
#include <vector>

#include "sirsynth/abstraction.hpp"

namespace sirsynth {

struct Arena {
  std::size_t n_states = 0;
  std::size_t n_pairs = 0;

  /* non-initial transitions, indexed [state * n_pairs + pair] */
  std::vector<std::vector<std::int32_t>> succ;
  std::vector<std::uint8_t> lf;        // terminal label per (state, pair)
  std::vector<std::uint8_t> reach_ok;  // threshold side condition per (state, pair)

  std::vector<std::uint8_t> safe;    // per state
  std::vector<std::uint8_t> target;  // per state

  /* initial layer: states with initial transitions, position-indexed */
  std::vector<std::int32_t> init_states;
  std::vector<std::vector<std::int32_t>> succ0;  // [init_pos * n_pairs + pair]
  std::vector<std::uint8_t> init_ok;             // candidacy per (init_pos, pair)

  std::size_t slot(std::size_t state, std::size_t pair) const { return state * n_pairs + pair; }
};

using StateMask = std::vector<std::uint8_t>;
using PolicyTable = std::vector<std::vector<std::int32_t>>;  // pairs per state

/* States in the target set with some pair whose label is 1 and whose
 * (nonempty) successor set lies in P. */
StateMask pre_f(const Arena& a, const StateMask& P);

/* States in the safe set with some pair satisfying the side condition whose
 * (nonempty) successor set lies in Q. */
StateMask pre(const Arena& a, const StateMask& Q);

/* Initial-layer analogue of pre over the initial transition function. */
StateMask pre_0(const Arena& a, const StateMask& Q);

struct SafetyResult {
  StateMask winning;    // greatest controlled-invariant subset of the target
  PolicyTable policy;   // terminal policy over winning states
  std::size_t iterations = 0;

  bool empty() const;
};

/* Greatest fixed point P = P  ^  pre_f(P) seeded with the target set. */
SafetyResult safety_game(const Arena& a);

struct ReachabilityResult {
  StateMask winning;    // least fixed point Q = Q v pre(Q) from the seed
  StateMask winning0;   // initial states that can enter the winning set
  std::vector<std::int32_t> rank;  // 0 on the seed, -1 outside
  /* rank of the initial layer, one above the final shell; the initial
   * policy descends from here, so its rank filter reduces to membership of
   * all successors in the winning set */
  std::int32_t init_rank = 0;
  PolicyTable policy;    // rank-descending pairs per winning state
  PolicyTable policy0;   // initial policy per state (nonempty only on winning0)
  std::size_t iterations = 0;
};

ReachabilityResult reachability_game(const Arena& a, const StateMask& seed);

/* Full synthesis on a symbolic model. */
struct SynthesisResult {
  SafetyResult safety;
  ReachabilityResult reach;
};

Arena arena_from_model(const SymbolicModel& model);
SynthesisResult synthesize(const SymbolicModel& model);

}  // namespace sirsynth

#endif  // SIRSYNTH_GAMES_HPP_
