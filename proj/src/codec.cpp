#include "safecards/codec.hpp"

#include <sstream>

namespace safecards {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::kParse, what); }

std::string category_id(const ContentPack& pack, int index) {
  return index >= 0 && index < static_cast<int>(pack.categories.size()) ? pack.categories[index].id : std::string();
}

Json category_or_null(const ContentPack& pack, int index) {
  if (index < 0) return nullptr;
  return category_id(pack, index);
}

Json card_id_or_null(const Deck& deck, CardIndex c) {
  if (c == kNoCard || c >= deck.cards.size()) return nullptr;
  return deck.cards[c].id;
}

Json ids(const Deck& deck, const std::vector<CardIndex>& cards) {
  Json arr = Json::array();
  for (CardIndex c : cards) arr.push_back(card_id_or_null(deck, c));
  return arr;
}

CardIndex lookup_card(const Deck& deck, const Json& id) {
  if (!id.is_string()) parse_fail("card id must be a string");
  auto found = deck.find(id.get<std::string>());
  if (!found) throw Error(ErrorCode::kIllegalMove, "unknown card '" + id.get<std::string>() + "'", "UNKNOWN_CARD");
  return *found;
}

std::vector<CardIndex> lookup_cards(const Deck& deck, const Json& arr) {
  if (!arr.is_array()) parse_fail("card list must be an array");
  std::vector<CardIndex> out;
  for (const auto& id : arr) out.push_back(lookup_card(deck, id));
  return out;
}

int lookup_category(const ContentPack& pack, const Json& id) {
  if (!id.is_string()) parse_fail("category must be a string");
  const int i = pack.category_index(id.get<std::string>());
  if (i < 0) {
    throw Error(ErrorCode::kIllegalMove, "unknown category '" + id.get<std::string>() + "'", "UNKNOWN_CATEGORY");
  }
  return i;
}

std::string card_text(const Card& card, const ContentPack& pack) {
  switch (card.kind) {
    case CardKind::kNumbered: return pack.advice[card.content].text;
    case CardKind::kMinus: return pack.misconceptions[card.content].text;
    case CardKind::kChange: {
      std::string out;
      for (const auto& line : pack.change_cards[card.content].lines) out += (out.empty() ? "" : "\n") + line;
      return out;
    }
    case CardKind::kTrueFalse:
    case CardKind::kScenario: return pack.challenges[card.content].statement;
  }
  return {};
}

template <typename T>
T field(const Json& doc, const char* key) {
  if (!doc.contains(key)) parse_fail(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const Json::exception&) {
    parse_fail(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace

Json card_to_json(const Card& card, const ContentPack& pack) {
  Json j;
  j["id"] = card.id;
  j["kind"] = card_kind_name(card.kind);
  switch (card.kind) {
    case CardKind::kNumbered:
      j["category"] = category_id(pack, card.category);
      j["rank"] = card.rank;
      j["text"] = pack.advice[card.content].text;
      break;
    case CardKind::kMinus:
      j["category"] = category_id(pack, card.category);
      j["text"] = pack.misconceptions[card.content].text;
      break;
    case CardKind::kChange:
      j["lines"] = pack.change_cards[card.content].lines;
      j["linked_categories"] = pack.change_cards[card.content].linked_categories;
      break;
    case CardKind::kTrueFalse:
    case CardKind::kScenario: {
      const auto& entry = pack.challenges[card.content];
      j["statement"] = entry.statement;
      if (card.kind == CardKind::kScenario) {
        Json refs = Json::array();
        for (const auto& r : entry.relevant_cards) refs.push_back({{"category", r.category}, {"rank", r.rank}});
        j["relevant_cards"] = std::move(refs);
        j["max_defenses"] = entry.defense_limit();
      }
      break;
    }
  }
  return j;
}

// ---------------------------------------------------------------------------
// Moves

Json move_to_json(const Move& m, const Deck& deck, const ContentPack& pack) {
  Json j;
  j["type"] = move_kind_name(m.kind);
  switch (m.kind) {
    case MoveKind::kOpeningRun:
    case MoveKind::kAscendingRun:
    case MoveKind::kCrossMatch:
    case MoveKind::kScenarioDefense:
      j["cards"] = ids(deck, m.cards);
      break;
    case MoveKind::kPlayChange:
      j["card"] = card_id_or_null(deck, m.special);
      j["declared_category"] = category_or_null(pack, m.declared_category);
      break;
    case MoveKind::kChangeCombo:
      j["card"] = card_id_or_null(deck, m.special);
      j["declared_category"] = category_or_null(pack, m.declared_category);
      j["followup"] = ids(deck, m.cards);
      break;
    case MoveKind::kPlayMinus:
      j["card"] = card_id_or_null(deck, m.special);
      break;
    case MoveKind::kAnswerTrueFalse:
      j["answer"] = m.answer;
      break;
    case MoveKind::kDrawPenalty:
    case MoveKind::kFlipChallenge:
      break;
  }
  return j;
}

Move move_from_json(const Json& doc, const Deck& deck, const ContentPack& pack) {
  if (!doc.is_object()) parse_fail("move must be an object");
  const auto type = field<std::string>(doc, "type");
  const auto kind = parse_move_kind(type);
  if (!kind) parse_fail("unknown move type '" + type + "'");
  Move m;
  m.kind = *kind;
  switch (m.kind) {
    case MoveKind::kOpeningRun:
    case MoveKind::kAscendingRun:
    case MoveKind::kCrossMatch:
    case MoveKind::kScenarioDefense:
      if (!doc.contains("cards")) parse_fail("missing field 'cards'");
      m.cards = lookup_cards(deck, doc["cards"]);
      break;
    case MoveKind::kPlayChange:
    case MoveKind::kChangeCombo:
      if (!doc.contains("card") || !doc.contains("declared_category")) {
        parse_fail("change moves need 'card' and 'declared_category'");
      }
      m.special = lookup_card(deck, doc["card"]);
      m.declared_category = lookup_category(pack, doc["declared_category"]);
      if (m.kind == MoveKind::kChangeCombo) {
        if (!doc.contains("followup")) parse_fail("missing field 'followup'");
        m.cards = lookup_cards(deck, doc["followup"]);
      }
      break;
    case MoveKind::kPlayMinus:
      if (!doc.contains("card")) parse_fail("missing field 'card'");
      m.special = lookup_card(deck, doc["card"]);
      break;
    case MoveKind::kAnswerTrueFalse:
      m.answer = field<bool>(doc, "answer");
      break;
    case MoveKind::kDrawPenalty:
    case MoveKind::kFlipChallenge:
      break;
  }
  return m;
}

// ---------------------------------------------------------------------------
// Events

Json event_to_json(const Event& e, const Deck& deck, const ContentPack& pack) {
  Json j;
  j["type"] = event_kind_name(e.kind);
  switch (e.kind) {
    case EventKind::kCardsPlayed: {
      j["seat"] = e.seat;
      j["move"] = move_kind_name(e.move);
      j["cards"] = ids(deck, e.cards);
      Json texts = Json::array();
      for (CardIndex c : e.cards) {
        if (c == kNoCard || c >= deck.cards.size()) {
          texts.push_back(nullptr);
        } else {
          texts.push_back(card_text(deck.cards[c], pack));
        }
      }
      j["texts"] = std::move(texts);
      break;
    }
    case EventKind::kCategoryChanged:
      j["category"] = category_or_null(pack, e.category);
      j["rank"] = e.rank;
      j["previous_category"] = category_or_null(pack, e.previous_category);
      break;
    case EventKind::kPenaltyDrawn:
      j["seat"] = e.seat;
      j["count"] = e.count;
      j["cards"] = ids(deck, e.cards);
      break;
    case EventKind::kChallengeFlipped: {
      j["seat"] = e.seat;
      j["card"] = e.cards.empty() ? Json(nullptr) : card_id_or_null(deck, e.cards[0]);
      if (!e.cards.empty() && e.cards[0] < deck.cards.size()) {
        const auto& card = deck.cards[e.cards[0]];
        j["kind"] = card_kind_name(card.kind);
        j["statement"] = pack.challenges[card.content].statement;
      }
      break;
    }
    case EventKind::kChallengeResolved:
      j["seat"] = e.seat;
      j["correct"] = e.correct;
      break;
    case EventKind::kPilesReshuffled:
      j["count"] = e.count;
      if (!e.rng_state.empty()) {
        j["draw_pile"] = ids(deck, e.draw_pile);
        j["rng_state"] = e.rng_state;
      }
      break;
    case EventKind::kTurnPassed:
      j["seat"] = e.seat;
      j["turn_index"] = e.turn_index;
      break;
    case EventKind::kGameWon:
      j["seat"] = e.seat;
      break;
    case EventKind::kGameStalled:
      break;
  }
  return j;
}

Event event_from_json(const Json& doc, const Deck& deck, const ContentPack& pack) {
  if (!doc.is_object()) parse_fail("event must be an object");
  const auto type = field<std::string>(doc, "type");
  Event e;
  bool known = false;
  for (int k = 0; k <= static_cast<int>(EventKind::kGameStalled); ++k) {
    if (event_kind_name(static_cast<EventKind>(k)) == type) {
      e.kind = static_cast<EventKind>(k);
      known = true;
    }
  }
  if (!known) parse_fail("unknown event type '" + type + "'");
  auto cat = [&](const char* key) {
    if (!doc.contains(key) || doc[key].is_null()) return -1;
    return lookup_category(pack, doc[key]);
  };
  switch (e.kind) {
    case EventKind::kCardsPlayed: {
      e.seat = field<int>(doc, "seat");
      const auto mk = parse_move_kind(field<std::string>(doc, "move"));
      if (!mk) parse_fail("unknown move kind in event");
      e.move = *mk;
      e.cards = lookup_cards(deck, doc.at("cards"));
      break;
    }
    case EventKind::kCategoryChanged:
      e.category = cat("category");
      e.rank = field<int>(doc, "rank");
      e.previous_category = cat("previous_category");
      break;
    case EventKind::kPenaltyDrawn:
      e.seat = field<int>(doc, "seat");
      e.count = field<int>(doc, "count");
      e.cards = lookup_cards(deck, doc.contains("cards") ? doc["cards"] : Json::array());
      break;
    case EventKind::kChallengeFlipped:
      e.seat = field<int>(doc, "seat");
      e.cards = {lookup_card(deck, doc.contains("card") ? doc["card"] : Json())};
      break;
    case EventKind::kChallengeResolved:
      e.seat = field<int>(doc, "seat");
      e.correct = field<bool>(doc, "correct");
      break;
    case EventKind::kPilesReshuffled:
      e.count = field<int>(doc, "count");
      if (doc.contains("draw_pile")) e.draw_pile = lookup_cards(deck, doc["draw_pile"]);
      if (doc.contains("rng_state")) e.rng_state = field<std::string>(doc, "rng_state");
      break;
    case EventKind::kTurnPassed:
      e.seat = field<int>(doc, "seat");
      e.turn_index = field<int>(doc, "turn_index");
      break;
    case EventKind::kGameWon:
      e.seat = field<int>(doc, "seat");
      break;
    case EventKind::kGameStalled:
      break;
  }
  return e;
}

std::string events_to_jsonl(const std::vector<Event>& events, const Deck& deck, const ContentPack& pack) {
  std::string out;
  for (const auto& e : events) {
    out += event_to_json(e, deck, pack).dump();
    out += '\n';
  }
  return out;
}

std::vector<Event> events_from_jsonl(const std::string& text, const Deck& deck, const ContentPack& pack) {
  std::vector<Event> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json doc;
    try {
      doc = Json::parse(line);
    } catch (const Json::parse_error& e) {
      parse_fail(std::string("bad event line: ") + e.what());
    }
    out.push_back(event_from_json(doc, deck, pack));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Views

Json view_to_json(const PlayerView& v) {
  const auto& pack = *v.pack;
  const auto& deck = *v.deck;
  Json j;
  j["seat"] = v.seat;
  j["ruleset"] = ruleset_name(v.ruleset);
  j["player_count"] = v.player_count;
  j["phase"] = phase_name(v.phase);
  j["current_seat"] = v.current_seat;
  j["turn_index"] = v.turn_index;
  j["turn_cap"] = v.turn_cap;
  j["penalty_draw"] = v.penalty_draw;
  Json hand = Json::array();
  for (CardIndex c : v.hand) hand.push_back(card_to_json(deck.card(c), pack));
  j["hand"] = std::move(hand);
  Json opp = Json::object();
  for (const auto& [seat, n] : v.opponent_hand_sizes) opp[std::to_string(seat)] = n;
  j["opponents"] = std::move(opp);
  j["discard_top"] = v.discard_top == kNoCard ? Json(nullptr) : card_to_json(deck.card(v.discard_top), pack);
  j["discard_size"] = v.discard_size;
  j["active_category"] = category_or_null(pack, v.active_category);
  j["active_rank"] = v.active_rank;
  j["draw_pile_size"] = v.draw_pile_size;
  j["challenge_pile_size"] = v.challenge_pile_size;
  j["revealed_challenge"] =
      v.revealed_challenge == kNoCard ? Json(nullptr) : card_to_json(deck.card(v.revealed_challenge), pack);
  j["winner"] = v.winner < 0 ? Json(nullptr) : Json(v.winner);
  j["stalled"] = v.stalled;
  Json moves = Json::array();
  for (const auto& m : v.legal_moves) moves.push_back(move_to_json(m, deck, pack));
  j["legal_moves"] = std::move(moves);
  Json cats = Json::array();
  for (const auto& c : pack.categories) {
    cats.push_back({{"id", c.id}, {"display_name", c.display_name}, {"color", c.color}});
  }
  j["categories"] = std::move(cats);
  Json pals = Json::array();
  for (const auto& p : pack.palettes) pals.push_back({{"name", p.name}, {"colors", p.colors}});
  j["palettes"] = std::move(pals);
  return j;
}

// ---------------------------------------------------------------------------
// State

Json state_to_json(const GameState& s) {
  const auto& deck = *s.deck;
  const auto& pack = s.pack();
  Json j;
  j["schema_version"] = kStateSchemaVersion;
  j["config"] = {{"ruleset", ruleset_name(s.config.ruleset)},
                 {"player_count", s.config.player_count},
                 {"hand_size", s.config.hand_size},
                 {"penalty_draw", s.config.penalty_draw},
                 {"strict_precedence", s.config.strict_precedence},
                 {"turn_cap", s.config.turn_cap},
                 {"seed", s.config.seed}};
  j["pack"] = Json::parse(serialize_pack(pack));
  Json hands = Json::array();
  for (const auto& h : s.hands) hands.push_back(ids(deck, h));
  j["hands"] = std::move(hands);
  j["draw_pile"] = ids(deck, s.draw_pile);
  j["discard_pile"] = ids(deck, s.discard_pile);
  j["challenge_pile"] = ids(deck, s.challenge_pile);
  j["resolved_challenges"] = ids(deck, s.resolved_challenges);
  j["revealed_challenge"] = card_id_or_null(deck, s.revealed_challenge);
  j["active_category"] = category_or_null(pack, s.active_category);
  j["active_rank"] = s.active_rank;
  j["current_seat"] = s.current_seat;
  j["turn_index"] = s.turn_index;
  j["rng_state"] = s.rng.to_hex();
  j["phase"] = phase_name(s.phase);
  j["winner"] = s.winner < 0 ? Json(nullptr) : Json(s.winner);
  j["stalled"] = s.stalled;
  return j;
}

std::string serialize_state(const GameState& state) { return state_to_json(state).dump(); }

namespace {
GameState state_from_json_impl(const Json& doc);
}

GameState state_from_json(const Json& doc) {
  try {
    return state_from_json_impl(doc);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIllegalMove) throw Error(ErrorCode::kParse, e.what());
    throw;
  }
}

namespace {
GameState state_from_json_impl(const Json& doc) {
  if (!doc.is_object()) parse_fail("state document must be an object");
  const int version = field<int>(doc, "schema_version");
  if (version != kStateSchemaVersion) {
    throw Error(ErrorCode::kVersion, "unsupported state schema_version " + std::to_string(version));
  }
  if (!doc.contains("config") || !doc.contains("pack")) parse_fail("state needs 'config' and 'pack'");
  const auto& c = doc["config"];
  GameState s;
  const auto rs = parse_ruleset(field<std::string>(c, "ruleset"));
  if (!rs) parse_fail("unknown ruleset");
  s.config.ruleset = *rs;
  s.config.player_count = field<int>(c, "player_count");
  s.config.hand_size = field<int>(c, "hand_size");
  s.config.penalty_draw = field<int>(c, "penalty_draw");
  s.config.strict_precedence = field<bool>(c, "strict_precedence");
  s.config.turn_cap = field<int>(c, "turn_cap");
  s.config.seed = field<uint64_t>(c, "seed");
  validate_config(s.config);

  ContentPack pack = load_pack(doc["pack"].dump());
  s.config.pack = pack == default_pack() ? default_pack_ptr() : std::make_shared<const ContentPack>(std::move(pack));
  s.deck = std::make_shared<const Deck>(build_deck(*s.config.pack, s.config.ruleset));
  const auto& deck = *s.deck;
  const auto& p = *s.config.pack;

  if (!doc.contains("hands") || !doc["hands"].is_array()) parse_fail("missing field 'hands'");
  if (static_cast<int>(doc["hands"].size()) != s.config.player_count) {
    throw Error(ErrorCode::kValidation, "hand count differs from player_count", {},
                {{"SEAT", "hands", "hand count differs from player_count"}});
  }
  for (const auto& h : doc["hands"]) s.hands.push_back(lookup_cards(deck, h));
  auto zone = [&](const char* key) {
    if (!doc.contains(key)) parse_fail(std::string("missing field '") + key + "'");
    return lookup_cards(deck, doc[key]);
  };
  s.draw_pile = zone("draw_pile");
  s.discard_pile = zone("discard_pile");
  s.challenge_pile = zone("challenge_pile");
  s.resolved_challenges = zone("resolved_challenges");
  if (!doc.contains("revealed_challenge")) parse_fail("missing field 'revealed_challenge'");
  s.revealed_challenge = doc["revealed_challenge"].is_null() ? kNoCard : lookup_card(deck, doc["revealed_challenge"]);
  s.active_category = doc.contains("active_category") && !doc["active_category"].is_null()
                          ? lookup_category(p, doc["active_category"])
                          : -1;
  s.active_rank = field<int>(doc, "active_rank");
  s.current_seat = field<int>(doc, "current_seat");
  s.turn_index = field<int>(doc, "turn_index");
  s.rng = Pcg32::from_hex(field<std::string>(doc, "rng_state"));
  const auto phase = field<std::string>(doc, "phase");
  bool phase_ok = false;
  for (int k = 0; k <= static_cast<int>(Phase::kFinished); ++k) {
    if (phase_name(static_cast<Phase>(k)) == phase) {
      s.phase = static_cast<Phase>(k);
      phase_ok = true;
    }
  }
  if (!phase_ok) parse_fail("unknown phase '" + phase + "'");
  s.winner = doc.contains("winner") && !doc["winner"].is_null() ? field<int>(doc, "winner") : -1;
  s.stalled = field<bool>(doc, "stalled");

  if (auto v = check_state(s); !v.empty()) {
    const std::string message = v.front().code + ": " + v.front().message;
    throw Error(ErrorCode::kValidation, message, {}, std::move(v));
  }
  return s;
}
}  // namespace

GameState deserialize_state(const std::string& document) {
  Json doc;
  try {
    doc = Json::parse(document);
  } catch (const Json::parse_error& e) {
    parse_fail(std::string("malformed state document: ") + e.what());
  }
  return state_from_json(doc);
}

}  // namespace safecards
