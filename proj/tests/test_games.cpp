#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"
#include "sirsynth/games.hpp"

using namespace sirsynth;

namespace {
/* one-input toy arena; every state safe, labels all set, side conditions ok */
Arena toy_arena(std::size_t n, const std::vector<std::vector<std::int32_t>>& succ,
                const std::vector<std::uint8_t>& target) {
  Arena a;
  a.n_states = n;
  a.n_pairs = 1;
  a.succ = succ;
  a.lf.assign(n, 1);
  a.reach_ok.assign(n, 1);
  a.safe.assign(n, 1);
  a.target = target;
  return a;
}
}  // namespace

TEST_CASE("pre_f on the three-state toy model") {
  // a -> {a}, b -> {a,c}, c -> {c}; target {a,b}
  const Arena a = toy_arena(3, {{0}, {0, 2}, {2}}, {1, 1, 0});

  StateMask P(3, 0);
  SECTION("empty argument returns the empty set") {
    CHECK(pre_f(a, P) == StateMask{0, 0, 0});
  }
  SECTION("matches the definition on {a,b}") {
    P = {1, 1, 0};
    CHECK(pre_f(a, P) == StateMask{1, 0, 0});  // b leaks to c
  }
  SECTION("monotone in the argument") {
    const StateMask small = pre_f(a, {1, 0, 0});
    const StateMask big = pre_f(a, {1, 1, 0});
    for (std::size_t i = 0; i < 3; ++i) CHECK(small[i] <= big[i]);
  }
}

TEST_CASE("safety game on toy models") {
  SECTION("three-state model shrinks to the invariant core") {
    const Arena a = toy_arena(3, {{0}, {0, 2}, {2}}, {1, 1, 0});
    const SafetyResult res = safety_game(a);
    CHECK(res.winning == StateMask{1, 0, 0});
    REQUIRE(res.policy[0].size() == 1);
    CHECK(res.policy[0][0] == 0);
    CHECK(res.policy[1].empty());
    // matches the subset-enumeration oracle
    CHECK(res.winning == oracles::brute_force_safety(a));
  }
  SECTION("self-loops make the whole target invariant") {
    const Arena a = toy_arena(3, {{0}, {1}, {2}}, {1, 1, 1});
    const SafetyResult res = safety_game(a);
    CHECK(res.winning == StateMask{1, 1, 1});
    CHECK(res.iterations <= 4);
  }
}

TEST_CASE("pre and the reachability game on toy models") {
  // a -> {a}, b -> {a}, c -> {b,c}
  const Arena a = toy_arena(3, {{0}, {0}, {1, 2}}, {1, 0, 0});

  SECTION("pre of the target") {
    const StateMask pa = pre(a, {1, 0, 0});
    CHECK(pa == StateMask{1, 1, 0});
  }
  SECTION("monotone in the argument") {
    std::mt19937_64 rng(91);
    for (int round = 0; round < 20; ++round) {
      const Arena r = oracles::random_arena(rng, 8, 3);
      StateMask small(r.n_states, 0), big(r.n_states, 0);
      std::uniform_int_distribution<int> coin(0, 1);
      for (std::size_t i = 0; i < r.n_states; ++i) {
        small[i] = coin(rng);
        big[i] = small[i] | coin(rng);
      }
      const StateMask ps = pre(r, small), pb = pre(r, big);
      for (std::size_t i = 0; i < r.n_states; ++i) REQUIRE(ps[i] <= pb[i]);
    }
  }

  SECTION("side condition excludes a pair") {
    Arena b = a;
    b.reach_ok = {1, 0, 1};
    const StateMask pb = pre(b, {1, 0, 0});
    CHECK(pb == StateMask{1, 0, 0});
  }
  SECTION("ranks and winning set") {
    const ReachabilityResult res = reachability_game(a, {1, 0, 0});
    CHECK(res.winning == StateMask{1, 1, 0});
    CHECK(res.rank[0] == 0);
    CHECK(res.rank[1] == 1);
    CHECK(res.rank[2] == -1);
    CHECK(res.policy[1] == std::vector<std::int32_t>{0});
    CHECK(res.policy[0].empty());  // nothing descends below rank zero
    CHECK(res.winning == oracles::brute_force_reach(a, {1, 0, 0}));
  }
  SECTION("seeding with everything is an immediate fixed point") {
    const ReachabilityResult res = reachability_game(a, {1, 1, 1});
    CHECK(res.winning == StateMask{1, 1, 1});
    CHECK(res.rank == std::vector<std::int32_t>{0, 0, 0});
    CHECK(res.iterations == 1);
  }
}

TEST_CASE("initial layer of the reachability game") {
  Arena a = toy_arena(3, {{0}, {0}, {1, 2}}, {1, 0, 0});
  a.init_states = {2};
  a.succ0.assign(1 * a.n_pairs, {});
  a.succ0[0] = {1};  // from c the initial transition reaches b
  a.init_ok.assign(1, 1);
  const ReachabilityResult res = reachability_game(a, {1, 0, 0});
  CHECK(res.winning0 == StateMask{0, 0, 1});
  CHECK(res.rank[2] == 2);  // one above the final shell
  CHECK(res.policy0[2] == std::vector<std::int32_t>{0});
}

TEST_CASE("games match subset-enumeration oracles on random arenas") {
  std::mt19937_64 rng(20240718);
  for (int round = 0; round < 60; ++round) {
    const Arena a = oracles::random_arena(rng, 10, 4);
    const SafetyResult safety = safety_game(a);
    CHECK(safety.winning == oracles::brute_force_safety(a));
    const ReachabilityResult reach = reachability_game(a, safety.winning);
    CHECK(reach.winning == oracles::brute_force_reach(a, safety.winning));

    // structural invariants: closure and strict rank descent
    for (std::size_t x = 0; x < a.n_states; ++x) {
      for (std::int32_t p : safety.policy[x]) {
        REQUIRE(a.lf[a.slot(x, static_cast<std::size_t>(p))]);
        for (std::int32_t s : a.succ[a.slot(x, static_cast<std::size_t>(p))])
          REQUIRE(safety.winning[static_cast<std::size_t>(s)]);
      }
      if (reach.winning[x] && reach.rank[x] > 0) {
        REQUIRE(!reach.policy[x].empty());
        for (std::int32_t p : reach.policy[x])
          for (std::int32_t s : a.succ[a.slot(x, static_cast<std::size_t>(p))])
            REQUIRE(reach.rank[static_cast<std::size_t>(s)] < reach.rank[x]);
      }
    }
    REQUIRE(safety.iterations <= a.n_states + 1);
    REQUIRE(reach.iterations <= a.n_states + 1);
  }
}
