#include "doctest.h"
#include "helpers.hpp"
#include "oracle/oracle.hpp"

using namespace safecards;

namespace {

std::string join(const GameState& s, const std::vector<Move>& moves) {
  std::string out;
  for (const auto& m : test::move_strings(s, moves)) out += (out.empty() ? "" : " | ") + m;
  return out;
}

// Walks random games and compares the engine's move list with the oracle's
// at every visited state. Returns the number of states compared.
int compare_walk(GameConfig cfg, int min_states) {
  int states = 0;
  for (uint64_t seed = 0; states < min_states || seed < 10; ++seed) {
    cfg.seed = seed;
    GameState s = new_game(cfg);
    Pcg32 rng(seed, 7);
    while (s.phase != Phase::kFinished) {
      auto engine = legal_moves(s);
      const auto oracle = oracle::legal_moves(s);
      std::sort(engine.begin(), engine.end());
      if (engine != oracle) {
        FAIL_CHECK("move sets differ at seed " << seed << " turn " << s.turn_index << " phase "
                                               << phase_name(s.phase) << "\n  engine: " << join(s, engine)
                                               << "\n  oracle: " << join(s, oracle));
        return states;
      }
      ++states;
      s = apply_move(s, s.current_seat, engine[rng.bounded(static_cast<uint32_t>(engine.size()))]).state;
    }
  }
  return states;
}

}  // namespace

TEST_CASE("engine move lists match the brute-force oracle") {
  for (auto ruleset : {Ruleset::kV1Base, Ruleset::kV1Revised, Ruleset::kV2}) {
    CAPTURE(ruleset_name(ruleset));
    GameConfig cfg;
    cfg.ruleset = ruleset;
    CHECK(compare_walk(cfg, 1000) >= 1000);
  }
}

TEST_CASE("oracle agreement without strict precedence") {
  for (auto ruleset : {Ruleset::kV1Base, Ruleset::kV1Revised, Ruleset::kV2}) {
    GameConfig cfg;
    cfg.ruleset = ruleset;
    cfg.strict_precedence = false;
    CHECK(compare_walk(cfg, 300) >= 300);
  }
}

TEST_CASE("oracle agreement with five categories and larger hands") {
  GameConfig cfg;
  cfg.ruleset = Ruleset::kV1Revised;
  cfg.pack = std::make_shared<const ContentPack>(five_category_pack());
  cfg.player_count = 3;
  cfg.hand_size = 10;
  CHECK(compare_walk(cfg, 300) >= 300);
}

TEST_CASE("oracle on the worked examples") {
  using test::make_state;
  const GameState opening = make_state({Ruleset::kV1Base, {{"HS-1", "HS-3", "PM-2", "CHG-1"}, {"SP-1"}}});
  CHECK(test::move_strings(opening, oracle::legal_moves(opening)) ==
        std::vector<std::string>{"OpeningRun HS-1", "OpeningRun HS-1,HS-3", "OpeningRun HS-3", "OpeningRun PM-2"});
  const GameState stuck = make_state({Ruleset::kV1Base, {{"PM-1", "HS-MINUS-1"}, {"SP-1"}}, "privacy", 8});
  CHECK(test::move_strings(stuck, oracle::legal_moves(stuck)) == std::vector<std::string>{"DrawPenalty"});
}
