#include <cmath>

#include "doctest.h"
#include "helpers.hpp"

using namespace safecards;
using namespace safecards::test;

TEST_CASE("a single legal move is always chosen") {
  const GameState s = make_state({Ruleset::kV1Base, {{"PM-1"}, {"SP-1"}}, "privacy", 8});
  const auto moves = legal_moves(s);
  REQUIRE(moves.size() == 1);
  const PlayerView v = player_view(s, 0);
  Pcg32 rng(1, 1);
  for (const auto& name : policy_names()) {
    const auto p = make_policy(name);
    CHECK(p->choose(v, moves, rng) == moves[0]);
  }
}

TEST_CASE("empty move set throws") {
  const GameState s = new_game(GameConfig{});
  Pcg32 rng(1, 1);
  for (const auto& name : policy_names()) {
    try {
      make_policy(name)->choose(player_view(s, 0), {}, rng);
      FAIL("expected EmptyMoveSet");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kEmptyMoveSet);
    }
  }
}

TEST_CASE("policies are deterministic for a given generator") {
  GameConfig cfg;
  cfg.seed = 21;
  const GameState s = new_game(cfg);
  const auto moves = legal_moves(s);
  const PlayerView v = player_view(s, 0);
  for (const auto& name : policy_names()) {
    const auto p = make_policy(name);
    Pcg32 a(3, 1), b(3, 1);
    for (int i = 0; i < 50; ++i) CHECK(p->choose(v, moves, a) == p->choose(v, moves, b));
  }
}

TEST_CASE("random policy is uniform over the legal moves") {
  const GameState s = make_state({Ruleset::kV1Base, {{"HS-5", "HS-7", "HS-2"}, {"PM-1"}}, "scams", 3});
  const auto moves = legal_moves(s);
  REQUIRE(moves.size() == 3);
  const PlayerView v = player_view(s, 0);
  Pcg32 rng(99, 1);
  constexpr int kDraws = 30000;
  std::vector<int> counts(moves.size());
  for (int i = 0; i < kDraws; ++i) {
    const Move m = policy_random(v, moves, rng);
    counts[static_cast<std::size_t>(std::find(moves.begin(), moves.end(), m) - moves.begin())]++;
  }
  const double p = 1.0 / 3.0;
  const double sigma = std::sqrt(kDraws * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - kDraws * p) < 4 * sigma);
}

TEST_CASE("greedy prefers more cards, then higher ranks") {
  const GameState runs = make_state({Ruleset::kV1Base, {{"HS-5", "HS-7", "HS-2"}, {"PM-1"}}, "scams", 3});
  Pcg32 rng(1, 1);
  const auto m1 = policy_greedy(player_view(runs, 0), legal_moves(runs), rng);
  CHECK(move_to_string(m1, *runs.deck) == "AscendingRun HS-5,HS-7");

  const GameState mixed = make_state({Ruleset::kV1Base, {{"HS-5", "SP-3"}, {"PM-1"}}, "scams", 3});
  const auto m2 = policy_greedy(player_view(mixed, 0), legal_moves(mixed), rng);
  CHECK(move_to_string(m2, *mixed.deck) == "AscendingRun HS-5");

  // Equal shed and rank sum: lexicographically smallest text.
  const GameState tie = make_state({Ruleset::kV1Base, {{"PM-3", "SP-3"}, {"PM-1"}}, "scams", 3});
  const auto m3 = policy_greedy(player_view(tie, 0), legal_moves(tie), rng);
  CHECK(move_to_string(m3, *tie.deck) == "CrossMatch PM-3,SP-3");
}

TEST_CASE("true/false accuracy is honoured") {
  GameState s = make_state({Ruleset::kV2, {{"PM-1"}, {"SP-1"}}, "privacy", 8});
  s = apply_move(s, 0, Move::flip_challenge()).state;
  // Force a True/False card on top for a deterministic reveal.
  while (s.phase != Phase::kAwaitingChallengeAnswer) {
    GameState fresh = make_state({Ruleset::kV2, {{"PM-1"}, {"SP-1"}}, "privacy", 8});
    fresh.challenge_pile = s.challenge_pile;
    std::rotate(fresh.challenge_pile.begin(), fresh.challenge_pile.end() - 1, fresh.challenge_pile.end());
    s = apply_move(fresh, 0, Move::flip_challenge()).state;
  }
  const bool truth = *s.pack().challenges[s.card(s.revealed_challenge).content].answer;
  const auto moves = legal_moves(s);
  const PlayerView v = player_view(s, 0);
  Pcg32 rng(4, 1);
  for (const auto& name : policy_names()) {
    CHECK(make_policy(name, 1.0)->choose(v, moves, rng).answer == truth);
    CHECK(make_policy(name, 0.0)->choose(v, moves, rng).answer == !truth);
  }
  int correct = 0;
  for (int i = 0; i < 4000; ++i) correct += policy_random(v, moves, rng, 0.75).answer == truth;
  CHECK(std::abs(correct - 3000) < 4 * std::sqrt(4000 * 0.75 * 0.25));
}

TEST_CASE("unknown policy or accuracy is a config error") {
  for (auto call : {+[] { make_policy("minimax"); }, +[] { make_policy("random", 1.5); }}) {
    try {
      call();
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
    }
  }
}
