#include "doctest.h"
#include "helpers.hpp"
#include "safecards/codec.hpp"

using namespace safecards;
using namespace safecards::test;

TEST_CASE("player view reports opponents as counts") {
  GameConfig cfg;
  cfg.seed = 11;
  const GameState s = new_game(cfg);
  const PlayerView v = player_view(s, 2);
  CHECK(v.hand == s.hands[2]);
  CHECK(v.opponent_hand_sizes.size() == 3);
  CHECK(v.opponent_hand_sizes.at(0) == 7);
  CHECK(v.opponent_hand_sizes.count(2) == 0);
  CHECK(v.draw_pile_size == 20);
  CHECK(v.legal_moves.empty());
  CHECK(!player_view(s, 0).legal_moves.empty());
  const Json j = view_to_json(v);
  CHECK(j["opponents"]["0"] == 7);
  CHECK(j["hand"].size() == 7);
  CHECK(leaked_ids(s, 2, j.dump()).empty());
}

TEST_CASE("views and filtered events leak no hidden card over random play") {
  for (auto ruleset : {Ruleset::kV1Base, Ruleset::kV1Revised, Ruleset::kV2}) {
    GameConfig cfg;
    cfg.ruleset = ruleset;
    cfg.seed = 5;
    GameState s = new_game(cfg);
    Pcg32 rng(5, 7);
    while (s.phase != Phase::kFinished && s.turn_index < 150) {
      const auto moves = legal_moves(s);
      const auto t = apply_move(s, s.current_seat, moves[rng.bounded(static_cast<uint32_t>(moves.size()))]);
      for (int seat = 0; seat < cfg.player_count; ++seat) {
        const auto view_text = view_to_json(player_view(t.state, seat)).dump();
        REQUIRE(leaked_ids(t.state, seat, view_text).empty());
        for (const auto& e : t.events) {
          const auto text = event_to_json(filter_event(e, seat, t.state), *s.deck, s.pack()).dump();
          REQUIRE(leaked_ids(t.state, seat, text).empty());
        }
      }
      s = t.state;
    }
  }
}

TEST_CASE("opponent penalty draws keep the count and hide the cards") {
  const GameState s = make_state({Ruleset::kV1Base, {{"PM-1"}, {"SP-1"}}, "privacy", 8});
  const auto t = apply_move(s, 0, Move::draw_penalty());
  const Event mine = filter_event(t.events[0], 0, t.state);
  const Event theirs = filter_event(t.events[0], 1, t.state);
  CHECK(mine.cards == t.events[0].cards);
  CHECK(theirs.count == 2);
  CHECK(theirs.cards.empty());
  const Json j = event_to_json(theirs, *s.deck, s.pack());
  CHECK(j["count"] == 2);
  CHECK(j["cards"].empty());
}

TEST_CASE("state documents round trip") {
  for (auto ruleset : {Ruleset::kV1Base, Ruleset::kV1Revised, Ruleset::kV2}) {
    for (int steps : {0, 1, 17, 80}) {
      GameConfig cfg;
      cfg.ruleset = ruleset;
      cfg.seed = 1234;
      const GameState s = random_prefix(cfg, steps, 9);
      const std::string text = serialize_state(s);
      const GameState back = deserialize_state(text);
      CHECK(back == s);
      CHECK(serialize_state(back) == text);
      CHECK(legal_moves(back) == legal_moves(s));
    }
  }
}

TEST_CASE("state documents with a custom pack carry the pack") {
  GameConfig cfg;
  cfg.pack = std::make_shared<const ContentPack>(five_category_pack());
  cfg.player_count = 5;
  const GameState s = random_prefix(cfg, 10, 2);
  const GameState back = deserialize_state(serialize_state(s));
  CHECK(back == s);
  CHECK(back.pack().categories.size() == 5);
}

TEST_CASE("state decoding errors") {
  GameConfig cfg;
  const GameState s = new_game(cfg);
  Json doc = state_to_json(s);

  auto code_of = [](const std::string& text) {
    try {
      deserialize_state(text);
    } catch (const Error& e) {
      return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::kIo;
  };
  CHECK(code_of("{not json") == ErrorCode::kParse);

  Json future = doc;
  future["schema_version"] = 99;
  CHECK(code_of(future.dump()) == ErrorCode::kVersion);

  Json dup = doc;
  dup["hands"][0].push_back(dup["hands"][1][0]);
  try {
    state_from_json(dup);
    FAIL("expected ValidationError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kValidation);
    REQUIRE(!e.violations().empty());
    CHECK(e.violations()[0].code == "CARD_CONSERVATION");
  }
}

TEST_CASE("moves and events round trip through JSON") {
  GameConfig cfg;
  cfg.ruleset = Ruleset::kV1Revised;
  cfg.seed = 8;
  GameState s = new_game(cfg);
  Pcg32 rng(8, 7);
  std::vector<Event> log;
  while (s.phase != Phase::kFinished) {
    const auto moves = legal_moves(s);
    for (const auto& m : moves) {
      REQUIRE(move_from_json(move_to_json(m, *s.deck, s.pack()), *s.deck, s.pack()) == m);
    }
    auto t = apply_move(s, s.current_seat, moves[rng.bounded(static_cast<uint32_t>(moves.size()))]);
    log.insert(log.end(), t.events.begin(), t.events.end());
    s = t.state;
  }
  const std::string text = events_to_jsonl(log, *s.deck, s.pack());
  CHECK(events_from_jsonl(text, *s.deck, s.pack()) == log);
}

TEST_CASE("move decoding rejects unknown ids") {
  const GameState s = new_game(GameConfig{});
  try {
    move_from_json(Json{{"type", "OpeningRun"}, {"cards", {"HS-9"}}}, *s.deck, s.pack());
    FAIL("expected IllegalMove");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIllegalMove);
    CHECK(e.rule_code() == "UNKNOWN_CARD");
  }
  try {
    move_from_json(Json{{"type", "Teleport"}}, *s.deck, s.pack());
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
  }
}
