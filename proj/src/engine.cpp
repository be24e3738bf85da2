#include "safecards/engine.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace safecards {

std::string_view ruleset_name(Ruleset r) {
  switch (r) {
    case Ruleset::kV1Base: return "v1-base";
    case Ruleset::kV1Revised: return "v1-revised";
    case Ruleset::kV2: return "v2";
  }
  return "?";
}

std::optional<Ruleset> parse_ruleset(std::string_view name) {
  if (name == "v1-base") return Ruleset::kV1Base;
  if (name == "v1-revised") return Ruleset::kV1Revised;
  if (name == "v2") return Ruleset::kV2;
  return std::nullopt;
}

std::string_view card_kind_name(CardKind k) {
  switch (k) {
    case CardKind::kNumbered: return "Numbered";
    case CardKind::kMinus: return "Minus";
    case CardKind::kChange: return "Change";
    case CardKind::kTrueFalse: return "TrueFalse";
    case CardKind::kScenario: return "Scenario";
  }
  return "?";
}

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::kOpening: return "Opening";
    case Phase::kPlay: return "Play";
    case Phase::kAwaitingChallengeAnswer: return "AwaitingChallengeAnswer";
    case Phase::kAwaitingScenarioDefense: return "AwaitingScenarioDefense";
    case Phase::kFinished: return "Finished";
  }
  return "?";
}

namespace {
constexpr std::array<std::string_view, 10> kMoveNames = {
    "OpeningRun", "AscendingRun",  "CrossMatch",    "PlayChange",      "ChangeCombo",
    "PlayMinus",  "DrawPenalty",   "FlipChallenge", "AnswerTrueFalse", "ScenarioDefense"};
constexpr std::array<std::string_view, 9> kEventNames = {
    "CardsPlayed",     "CategoryChanged", "PenaltyDrawn", "ChallengeFlipped", "ChallengeResolved",
    "PilesReshuffled", "TurnPassed",      "GameWon",      "GameStalled"};
}  // namespace

std::string_view move_kind_name(MoveKind k) { return kMoveNames[static_cast<std::size_t>(k)]; }

std::optional<MoveKind> parse_move_kind(std::string_view name) {
  for (std::size_t i = 0; i < kMoveNames.size(); ++i) {
    if (kMoveNames[i] == name) return static_cast<MoveKind>(i);
  }
  return std::nullopt;
}

std::string_view event_kind_name(EventKind k) { return kEventNames[static_cast<std::size_t>(k)]; }

int precedence_class(MoveKind k) {
  switch (k) {
    case MoveKind::kOpeningRun:
    case MoveKind::kAscendingRun:
    case MoveKind::kCrossMatch: return 1;
    case MoveKind::kPlayChange:
    case MoveKind::kChangeCombo: return 2;
    case MoveKind::kPlayMinus:
    case MoveKind::kFlipChallenge: return 3;
    case MoveKind::kDrawPenalty: return 4;
    case MoveKind::kAnswerTrueFalse:
    case MoveKind::kScenarioDefense: return 0;
  }
  return 0;
}

int cards_shed(const Move& m) {
  return static_cast<int>(m.cards.size()) + (m.special != kNoCard ? 1 : 0);
}

// ---------------------------------------------------------------------------
// Deck

std::optional<CardIndex> Deck::find(std::string_view id) const {
  for (std::size_t i = 0; i < cards.size(); ++i) {
    if (cards[i].id == id) return static_cast<CardIndex>(i);
  }
  return std::nullopt;
}

CardIndex Deck::numbered(int category, int rank) const {
  if (category < 0 || rank < 1 || rank > kRanksPerCategory) return kNoCard;
  const auto slot = static_cast<std::size_t>(category) * kRanksPerCategory + (rank - 1);
  return slot < numbered_lookup.size() ? numbered_lookup[slot] : kNoCard;
}

Deck build_deck(const ContentPack& pack, Ruleset ruleset) {
  if (auto v = validate_pack(pack); !v.empty()) {
    const std::string message = "pack is not valid: " + v.front().code;
    throw Error(ErrorCode::kValidation, message, {}, std::move(v));
  }
  if (ruleset == Ruleset::kV2 && pack.challenges.empty()) {
    throw Error(ErrorCode::kPackRulesetMismatch, "ruleset v2 needs a pack with challenge entries");
  }
  Deck deck;
  deck.ruleset = ruleset;
  const auto n_cat = pack.categories.size();
  deck.numbered_lookup.assign(n_cat * kRanksPerCategory, kNoCard);

  auto add = [&](Card c, bool main) {
    const auto i = static_cast<CardIndex>(deck.cards.size());
    deck.cards.push_back(std::move(c));
    (main ? deck.main_pile : deck.challenge_pile).push_back(i);
    return i;
  };

  for (std::size_t c = 0; c < n_cat; ++c) {
    const auto prefix = category_prefix(pack.categories[c]);
    for (int r = 1; r <= kRanksPerCategory; ++r) {
      int content = -1;
      for (std::size_t a = 0; a < pack.advice.size(); ++a) {
        if (pack.advice[a].category == pack.categories[c].id && pack.advice[a].rank == r) {
          content = static_cast<int>(a);
        }
      }
      const auto i = add({prefix + "-" + std::to_string(r), CardKind::kNumbered, static_cast<int>(c), r, content}, true);
      deck.numbered_lookup[c * kRanksPerCategory + (r - 1)] = i;
    }
  }

  if (ruleset == Ruleset::kV2) {
    int tf = 0;
    int sc = 0;
    for (std::size_t i = 0; i < pack.challenges.size(); ++i) {
      const bool is_tf = pack.challenges[i].kind == ChallengeKind::kTrueFalse;
      const auto id = is_tf ? "TF-" + std::to_string(++tf) : "SC-" + std::to_string(++sc);
      add({id, is_tf ? CardKind::kTrueFalse : CardKind::kScenario, -1, 0, static_cast<int>(i)}, false);
    }
    return deck;
  }

  for (std::size_t c = 0; c < n_cat; ++c) {
    const auto prefix = category_prefix(pack.categories[c]);
    int n = 0;
    for (std::size_t m = 0; m < pack.misconceptions.size(); ++m) {
      if (pack.misconceptions[m].category != pack.categories[c].id) continue;
      add({prefix + "-MINUS-" + std::to_string(++n), CardKind::kMinus, static_cast<int>(c), 0, static_cast<int>(m)},
          true);
    }
  }
  for (std::size_t i = 0; i < pack.change_cards.size(); ++i) {
    add({"CHG-" + std::to_string(pack.change_cards[i].ordinal), CardKind::kChange, -1, 0, static_cast<int>(i)}, true);
  }
  return deck;
}

// ---------------------------------------------------------------------------
// Setup

namespace {

template <typename T>
void fisher_yates(std::vector<T>& v, Pcg32& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = rng.bounded(static_cast<uint32_t>(i));
    std::swap(v[i - 1], v[j]);
  }
}

void insert_sorted(std::vector<CardIndex>& hand, CardIndex c) {
  hand.insert(std::lower_bound(hand.begin(), hand.end(), c), c);
}

bool remove_card(std::vector<CardIndex>& hand, CardIndex c) {
  auto it = std::lower_bound(hand.begin(), hand.end(), c);
  if (it == hand.end() || *it != c) return false;
  hand.erase(it);
  return true;
}

bool has_card(const std::vector<CardIndex>& hand, CardIndex c) {
  return std::binary_search(hand.begin(), hand.end(), c);
}

}  // namespace

void validate_config(const GameConfig& config) {
  if (config.player_count < 2 || config.player_count > 6) {
    throw Error(ErrorCode::kConfig, "player_count must be in 2..6, got " + std::to_string(config.player_count));
  }
  if (config.hand_size < 1) throw Error(ErrorCode::kConfig, "hand_size must be >= 1");
  if (config.penalty_draw < 0) throw Error(ErrorCode::kConfig, "penalty_draw must be >= 0");
  if (config.turn_cap < 1) throw Error(ErrorCode::kConfig, "turn_cap must be >= 1");
}

GameState new_game(GameConfig config) {
  validate_config(config);
  if (!config.pack) config.pack = default_pack_ptr();
  auto deck = std::make_shared<const Deck>(build_deck(*config.pack, config.ruleset));
  const auto main_size = deck->main_pile.size();
  if (static_cast<std::size_t>(config.player_count) * config.hand_size >= main_size) {
    throw Error(ErrorCode::kConfig, "player_count x hand_size must be smaller than the main pile (" +
                                        std::to_string(main_size) + " cards)");
  }

  GameState s;
  s.config = std::move(config);
  s.deck = deck;
  s.rng = Pcg32(s.config.seed);

  std::vector<CardIndex> order = deck->main_pile;
  fisher_yates(order, s.rng);
  const auto players = static_cast<std::size_t>(s.config.player_count);
  const auto dealt = players * s.config.hand_size;
  s.hands.assign(players, {});
  for (std::size_t k = 0; k < dealt; ++k) s.hands[k % players].push_back(order[k]);
  for (auto& h : s.hands) std::sort(h.begin(), h.end());
  s.draw_pile.assign(order.rbegin(), order.rend() - static_cast<std::ptrdiff_t>(dealt));

  if (!deck->challenge_pile.empty()) {
    std::vector<CardIndex> ch = deck->challenge_pile;
    fisher_yates(ch, s.rng);
    s.challenge_pile.assign(ch.rbegin(), ch.rend());
  }
  s.phase = Phase::kOpening;
  return s;
}

bool operator==(const GameState& a, const GameState& b) {
  const auto& ca = a.config;
  const auto& cb = b.config;
  const bool same_pack = ca.pack == cb.pack || (ca.pack && cb.pack && *ca.pack == *cb.pack);
  return ca.ruleset == cb.ruleset && ca.player_count == cb.player_count && ca.hand_size == cb.hand_size &&
         ca.penalty_draw == cb.penalty_draw && ca.strict_precedence == cb.strict_precedence &&
         ca.turn_cap == cb.turn_cap && ca.seed == cb.seed && same_pack && a.hands == b.hands &&
         a.draw_pile == b.draw_pile && a.discard_pile == b.discard_pile && a.challenge_pile == b.challenge_pile &&
         a.resolved_challenges == b.resolved_challenges && a.revealed_challenge == b.revealed_challenge &&
         a.active_category == b.active_category && a.active_rank == b.active_rank &&
         a.current_seat == b.current_seat && a.turn_index == b.turn_index && a.rng == b.rng &&
         a.phase == b.phase && a.winner == b.winner && a.stalled == b.stalled;
}

// ---------------------------------------------------------------------------
// Legal move generation

namespace {

// Calls fn(subset) for every non-empty subset of `pool`, preserving pool order.
template <typename Fn>
void for_each_subset(const std::vector<CardIndex>& pool, Fn&& fn) {
  const auto n = pool.size();
  std::vector<CardIndex> subset;
  for (uint32_t mask = 1; mask < (1u << n); ++mask) {
    subset.clear();
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) subset.push_back(pool[i]);
    }
    fn(subset);
  }
}

// Numbered cards in `hand` of category `cat` with rank > `above`, ascending.
std::vector<CardIndex> numbered_in(const GameState& s, const std::vector<CardIndex>& hand, int cat, int above) {
  std::vector<CardIndex> out;
  for (CardIndex c : hand) {
    const auto& card = s.card(c);
    if (card.kind == CardKind::kNumbered && card.category == cat && card.rank > above) out.push_back(c);
  }
  return out;
}

std::vector<CardIndex> same_rank_cards(const GameState& s, const std::vector<CardIndex>& hand) {
  std::vector<CardIndex> out;
  if (s.active_rank <= 0) return out;
  for (CardIndex c : hand) {
    const auto& card = s.card(c);
    if (card.kind == CardKind::kNumbered && card.rank == s.active_rank && card.category != s.active_category) {
      out.push_back(c);
    }
  }
  return out;
}

bool is_v1(Ruleset r) { return r != Ruleset::kV2; }

void gen_numbered(const GameState& s, std::vector<Move>& out) {
  const auto& hand = s.hands[s.current_seat];
  if (s.phase == Phase::kOpening) {
    for (int cat = 0; cat < static_cast<int>(s.pack().categories.size()); ++cat) {
      for_each_subset(numbered_in(s, hand, cat, 0), [&](const auto& sub) { out.push_back(Move::opening_run(sub)); });
    }
    return;
  }
  for_each_subset(numbered_in(s, hand, s.active_category, s.active_rank),
                  [&](const auto& sub) { out.push_back(Move::ascending_run(sub)); });
  for_each_subset(same_rank_cards(s, hand), [&](auto sub) {
    std::sort(sub.begin(), sub.end());
    do {
      out.push_back(Move::cross_match(sub));
    } while (std::next_permutation(sub.begin(), sub.end()));
  });
}

void gen_change(const GameState& s, std::vector<Move>& out) {
  if (!is_v1(s.config.ruleset) || s.phase != Phase::kPlay) return;
  const auto& hand = s.hands[s.current_seat];
  const auto& pack = s.pack();
  const int n_cat = static_cast<int>(pack.categories.size());
  for (CardIndex c : hand) {
    const auto& card = s.card(c);
    if (card.kind != CardKind::kChange) continue;
    for (int cat = 0; cat < n_cat; ++cat) {
      if (cat != s.active_category) out.push_back(Move::play_change(c, cat));
    }
    if (s.config.ruleset != Ruleset::kV1Revised) continue;
    for (const auto& linked : pack.change_cards[card.content].linked_categories) {
      const int cat = pack.category_index(linked);
      if (cat == s.active_category) continue;
      for_each_subset(numbered_in(s, hand, cat, 0),
                      [&](const auto& sub) { out.push_back(Move::change_combo(c, cat, sub)); });
    }
  }
}

void gen_class3(const GameState& s, std::vector<Move>& out) {
  if (s.phase != Phase::kPlay) return;
  if (is_v1(s.config.ruleset)) {
    for (CardIndex c : s.hands[s.current_seat]) {
      const auto& card = s.card(c);
      if (card.kind == CardKind::kMinus && card.category == s.active_category) out.push_back(Move::play_minus(c));
    }
  } else if (!s.challenge_pile.empty()) {
    out.push_back(Move::flip_challenge());
  }
}

std::vector<CardIndex> defendable_cards(const GameState& s) {
  std::vector<CardIndex> out;
  const auto& entry = s.pack().challenges[s.card(s.revealed_challenge).content];
  for (CardIndex c : s.hands[s.current_seat]) {
    const auto& card = s.card(c);
    if (card.kind != CardKind::kNumbered) continue;
    const auto& cat_id = s.pack().categories[card.category].id;
    for (const auto& ref : entry.relevant_cards) {
      if (ref.category == cat_id && ref.rank == card.rank) {
        out.push_back(c);
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Move> legal_moves(const GameState& s) {
  std::vector<Move> out;
  switch (s.phase) {
    case Phase::kFinished:
      return out;
    case Phase::kAwaitingChallengeAnswer:
      out.push_back(Move::answer_true_false(false));
      out.push_back(Move::answer_true_false(true));
      return out;
    case Phase::kAwaitingScenarioDefense: {
      const auto limit = static_cast<std::size_t>(s.pack().challenges[s.card(s.revealed_challenge).content].defense_limit());
      out.push_back(Move::scenario_defense({}));
      for_each_subset(defendable_cards(s), [&](const auto& sub) {
        if (sub.size() <= limit) out.push_back(Move::scenario_defense(sub));
      });
      return out;
    }
    case Phase::kOpening:
    case Phase::kPlay:
      break;
  }
  const bool strict = s.config.strict_precedence;
  gen_numbered(s, out);
  if (strict && !out.empty()) return out;
  if (s.phase == Phase::kPlay) {
    gen_change(s, out);
    if (strict && !out.empty()) return out;
    gen_class3(s, out);
    if (strict && !out.empty()) return out;
  }
  out.push_back(Move::draw_penalty());
  return out;
}

// ---------------------------------------------------------------------------
// Move checking

namespace {

struct Rejection {
  ErrorCode code;
  std::string rule;
};

bool class_available(const GameState& s, int cls) {
  const auto& hand = s.hands[s.current_seat];
  switch (cls) {
    case 1:
      if (s.phase == Phase::kOpening) {
        return std::any_of(hand.begin(), hand.end(),
                           [&](CardIndex c) { return s.card(c).kind == CardKind::kNumbered; });
      }
      return !numbered_in(s, hand, s.active_category, s.active_rank).empty() || !same_rank_cards(s, hand).empty();
    case 2:
      return is_v1(s.config.ruleset) && s.phase == Phase::kPlay &&
             std::any_of(hand.begin(), hand.end(), [&](CardIndex c) { return s.card(c).kind == CardKind::kChange; });
    case 3: {
      if (s.phase != Phase::kPlay) return false;
      if (!is_v1(s.config.ruleset)) return !s.challenge_pile.empty();
      return std::any_of(hand.begin(), hand.end(), [&](CardIndex c) {
        return s.card(c).kind == CardKind::kMinus && s.card(c).category == s.active_category;
      });
    }
    default:
      return true;
  }
}

std::optional<Rejection> illegal(std::string rule) { return Rejection{ErrorCode::kIllegalMove, std::move(rule)}; }

std::optional<Rejection> check_ascending(const GameState& s, const std::vector<CardIndex>& cards, int category,
                                         int above) {
  int prev = above;
  for (CardIndex c : cards) {
    const auto& card = s.card(c);
    if (card.kind != CardKind::kNumbered) return illegal("NOT_NUMBERED");
    if (category >= 0 && card.category != category) return illegal("WRONG_CATEGORY");
    if (card.rank <= prev) return illegal(prev == above && above > 0 ? "RANK_TOO_LOW" : "NOT_ASCENDING");
    prev = card.rank;
  }
  return std::nullopt;
}

std::optional<Rejection> find_rejection(const GameState& s, int seat, const Move& m) {
  if (seat < 0 || seat >= s.config.player_count) return Rejection{ErrorCode::kNotYourTurn, "BAD_SEAT"};
  if (s.phase == Phase::kFinished) return Rejection{ErrorCode::kWrongPhase, "GAME_FINISHED"};
  if (seat != s.current_seat) return Rejection{ErrorCode::kNotYourTurn, "NOT_YOUR_TURN"};

  const auto wrong_phase = std::optional<Rejection>(Rejection{ErrorCode::kWrongPhase, "WRONG_PHASE"});
  const bool answering = m.kind == MoveKind::kAnswerTrueFalse;
  const bool defending = m.kind == MoveKind::kScenarioDefense;
  if ((s.phase == Phase::kAwaitingChallengeAnswer) != answering) return wrong_phase;
  if ((s.phase == Phase::kAwaitingScenarioDefense) != defending) return wrong_phase;
  if (s.phase == Phase::kOpening) {
    if (m.kind == MoveKind::kAscendingRun || m.kind == MoveKind::kCrossMatch) return wrong_phase;
    if (m.kind != MoveKind::kOpeningRun && m.kind != MoveKind::kDrawPenalty) return illegal("OPENING_REQUIRES_NUMBERED");
  } else if (m.kind == MoveKind::kOpeningRun) {
    return wrong_phase;
  }

  const auto ruleset = s.config.ruleset;
  switch (m.kind) {
    case MoveKind::kPlayChange:
    case MoveKind::kPlayMinus:
      if (!is_v1(ruleset)) return illegal("RULESET");
      break;
    case MoveKind::kChangeCombo:
      if (ruleset != Ruleset::kV1Revised) return illegal("RULESET");
      break;
    case MoveKind::kFlipChallenge:
      if (is_v1(ruleset)) return illegal("RULESET");
      break;
    default:
      break;
  }

  // Ownership.
  const auto& hand = s.hands[seat];
  const auto n_cards = s.deck->cards.size();
  std::vector<CardIndex> all = m.cards;
  if (m.special != kNoCard) all.push_back(m.special);
  for (CardIndex c : all) {
    if (c >= n_cards) return illegal("UNKNOWN_CARD");
    if (!has_card(hand, c)) return illegal("NOT_IN_HAND");
  }
  {
    auto sorted = all;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) return illegal("DUPLICATE_CARD");
  }

  const bool takes_special = m.kind == MoveKind::kPlayChange || m.kind == MoveKind::kChangeCombo ||
                             m.kind == MoveKind::kPlayMinus;
  if (!takes_special && m.special != kNoCard) return illegal("EXTRA_CARDS");
  if (takes_special && m.special == kNoCard) return illegal("MISSING_CARD");
  const bool takes_cards = m.kind != MoveKind::kPlayChange && m.kind != MoveKind::kPlayMinus &&
                           m.kind != MoveKind::kDrawPenalty && m.kind != MoveKind::kFlipChallenge &&
                           m.kind != MoveKind::kAnswerTrueFalse;
  if (!takes_cards && !m.cards.empty()) return illegal("EXTRA_CARDS");
  const bool declares = m.kind == MoveKind::kPlayChange || m.kind == MoveKind::kChangeCombo;
  if (!declares && m.declared_category != -1) return illegal("EXTRA_DECLARATION");

  const int n_cat = static_cast<int>(s.pack().categories.size());
  switch (m.kind) {
    case MoveKind::kOpeningRun: {
      if (m.cards.empty()) return illegal("EMPTY_MOVE");
      if (s.card(m.cards.front()).kind != CardKind::kNumbered) return illegal("NOT_NUMBERED");
      if (auto r = check_ascending(s, m.cards, s.card(m.cards.front()).category, 0)) {
        return r->rule == "WRONG_CATEGORY" ? illegal("MIXED_CATEGORY") : r;
      }
      break;
    }
    case MoveKind::kAscendingRun:
      if (m.cards.empty()) return illegal("EMPTY_MOVE");
      if (auto r = check_ascending(s, m.cards, s.active_category, s.active_rank)) return r;
      break;
    case MoveKind::kCrossMatch: {
      if (m.cards.empty()) return illegal("EMPTY_MOVE");
      std::vector<int> cats;
      for (CardIndex c : m.cards) {
        const auto& card = s.card(c);
        if (card.kind != CardKind::kNumbered) return illegal("NOT_NUMBERED");
        if (s.active_rank <= 0 || card.rank != s.active_rank) return illegal("RANK_MISMATCH");
        if (card.category == s.active_category) return illegal("SAME_CATEGORY");
        if (std::find(cats.begin(), cats.end(), card.category) != cats.end()) return illegal("DUPLICATE_CATEGORY");
        cats.push_back(card.category);
      }
      break;
    }
    case MoveKind::kPlayChange:
    case MoveKind::kChangeCombo: {
      const auto& card = s.card(m.special);
      if (card.kind != CardKind::kChange) return illegal("NOT_CHANGE");
      if (m.declared_category < 0 || m.declared_category >= n_cat) return illegal("UNKNOWN_CATEGORY");
      if (m.declared_category == s.active_category) return illegal("SAME_CATEGORY");
      if (m.kind == MoveKind::kChangeCombo) {
        const auto& links = s.pack().change_cards[card.content].linked_categories;
        const auto& declared = s.pack().categories[m.declared_category].id;
        if (std::find(links.begin(), links.end(), declared) == links.end()) return illegal("UNLINKED_CATEGORY");
        if (m.cards.empty()) return illegal("EMPTY_MOVE");
        if (auto r = check_ascending(s, m.cards, m.declared_category, 0)) return r;
      }
      break;
    }
    case MoveKind::kPlayMinus: {
      const auto& card = s.card(m.special);
      if (card.kind != CardKind::kMinus) return illegal("NOT_MINUS");
      if (card.category != s.active_category) return illegal("WRONG_CATEGORY");
      break;
    }
    case MoveKind::kFlipChallenge:
      if (s.challenge_pile.empty()) return illegal("EMPTY_CHALLENGE_PILE");
      break;
    case MoveKind::kScenarioDefense: {
      const auto& entry = s.pack().challenges[s.card(s.revealed_challenge).content];
      if (static_cast<int>(m.cards.size()) > entry.defense_limit()) return illegal("TOO_MANY_DEFENSES");
      if (!std::is_sorted(m.cards.begin(), m.cards.end())) return illegal("NOT_CANONICAL");
      const auto relevant = defendable_cards(s);
      for (CardIndex c : m.cards) {
        if (std::find(relevant.begin(), relevant.end(), c) == relevant.end()) return illegal("NOT_RELEVANT");
      }
      return std::nullopt;
    }
    case MoveKind::kAnswerTrueFalse:
      return std::nullopt;
    case MoveKind::kDrawPenalty:
      break;
  }

  if (s.config.strict_precedence) {
    const int cls = precedence_class(m.kind);
    for (int lower = 1; lower < cls; ++lower) {
      if (class_available(s, lower)) return illegal("PRECEDENCE");
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Transition

void set_active(GameState& s, int category, int rank, std::vector<Event>& events) {
  if (s.active_category == category && s.active_rank == rank) return;
  Event e{EventKind::kCategoryChanged};
  e.category = category;
  e.rank = rank;
  e.previous_category = s.active_category;
  s.active_category = category;
  s.active_rank = rank;
  events.push_back(std::move(e));
}

void play_cards(GameState& s, int seat, MoveKind kind, const std::vector<CardIndex>& cards,
                std::vector<Event>& events) {
  for (CardIndex c : cards) {
    remove_card(s.hands[seat], c);
    s.discard_pile.push_back(c);
  }
  Event e{EventKind::kCardsPlayed, seat, kind, cards};
  events.push_back(std::move(e));
}

void draw_cards(GameState& s, int seat, int n, std::vector<Event>& events) {
  const auto want = static_cast<std::size_t>(n);
  if (s.draw_pile.size() < want && s.discard_pile.size() > 1) {
    std::vector<CardIndex> recycled(s.discard_pile.begin(), s.discard_pile.end() - 1);
    s.discard_pile.erase(s.discard_pile.begin(), s.discard_pile.end() - 1);
    fisher_yates(recycled, s.rng);
    // Recycled cards go beneath whatever is left, so the remaining cards are
    // still drawn first.
    recycled.insert(recycled.end(), s.draw_pile.begin(), s.draw_pile.end());
    s.draw_pile = std::move(recycled);
    Event e{EventKind::kPilesReshuffled};
    e.count = static_cast<int>(s.draw_pile.size());
    e.draw_pile = s.draw_pile;
    e.rng_state = s.rng.to_hex();
    events.push_back(std::move(e));
  }
  Event e{EventKind::kPenaltyDrawn, seat};
  while (e.cards.size() < want && !s.draw_pile.empty()) {
    const CardIndex c = s.draw_pile.back();
    s.draw_pile.pop_back();
    insert_sorted(s.hands[seat], c);
    e.cards.push_back(c);
  }
  e.count = static_cast<int>(e.cards.size());
  events.push_back(std::move(e));
}

void resolve_challenge(GameState& s, int seat, bool correct, std::vector<Event>& events) {
  s.resolved_challenges.push_back(s.revealed_challenge);
  s.revealed_challenge = kNoCard;
  s.phase = Phase::kPlay;
  Event e{EventKind::kChallengeResolved, seat};
  e.correct = correct;
  events.push_back(std::move(e));
}

}  // namespace

std::string check_move(const GameState& state, int seat, const Move& move) {
  auto r = find_rejection(state, seat, move);
  return r ? r->rule : std::string();
}

Transition apply_move(const GameState& state, int seat, const Move& m) {
  if (auto r = find_rejection(state, seat, m)) {
    std::string msg = std::string(error_code_name(r->code)) + " (" + r->rule + "): " + move_to_string(m, *state.deck);
    throw Error(r->code, msg, r->rule);
  }

  Transition t{state, {}};
  GameState& s = t.state;
  auto& events = t.events;
  const auto& pack = s.pack();

  switch (m.kind) {
    case MoveKind::kOpeningRun:
    case MoveKind::kAscendingRun:
    case MoveKind::kCrossMatch: {
      play_cards(s, seat, m.kind, m.cards, events);
      s.phase = Phase::kPlay;
      const auto& last = s.card(m.cards.back());
      set_active(s, last.category, last.rank, events);
      break;
    }
    case MoveKind::kPlayChange:
      play_cards(s, seat, m.kind, {m.special}, events);
      set_active(s, m.declared_category, 0, events);
      break;
    case MoveKind::kChangeCombo: {
      play_cards(s, seat, m.kind, {m.special}, events);
      set_active(s, m.declared_category, 0, events);
      play_cards(s, seat, m.kind, m.cards, events);
      set_active(s, m.declared_category, s.card(m.cards.back()).rank, events);
      break;
    }
    case MoveKind::kPlayMinus:
      play_cards(s, seat, m.kind, {m.special}, events);
      set_active(s, s.active_category, 0, events);
      draw_cards(s, seat, s.config.penalty_draw, events);
      break;
    case MoveKind::kDrawPenalty:
      draw_cards(s, seat, s.config.penalty_draw, events);
      break;
    case MoveKind::kFlipChallenge: {
      const CardIndex c = s.challenge_pile.back();
      s.challenge_pile.pop_back();
      s.revealed_challenge = c;
      s.phase = s.card(c).kind == CardKind::kTrueFalse ? Phase::kAwaitingChallengeAnswer
                                                        : Phase::kAwaitingScenarioDefense;
      events.push_back(Event{EventKind::kChallengeFlipped, seat, MoveKind::kDrawPenalty, {c}});
      return t;  // same seat responds
    }
    case MoveKind::kAnswerTrueFalse: {
      const auto& entry = pack.challenges[s.card(s.revealed_challenge).content];
      const bool correct = entry.answer.value_or(false) == m.answer;
      resolve_challenge(s, seat, correct, events);
      if (!correct) draw_cards(s, seat, s.config.penalty_draw, events);
      break;
    }
    case MoveKind::kScenarioDefense:
      if (!m.cards.empty()) play_cards(s, seat, m.kind, m.cards, events);
      resolve_challenge(s, seat, true, events);
      set_active(s, s.active_category, 0, events);
      break;
  }

  if (s.hands[seat].empty()) {
    s.phase = Phase::kFinished;
    s.winner = seat;
    events.push_back(Event{EventKind::kGameWon, seat});
    return t;
  }
  s.current_seat = (seat + 1) % s.config.player_count;
  ++s.turn_index;
  Event passed{EventKind::kTurnPassed, s.current_seat};
  passed.turn_index = s.turn_index;
  events.push_back(std::move(passed));
  if (s.turn_index >= s.config.turn_cap) {
    s.phase = Phase::kFinished;
    s.stalled = true;
    events.push_back(Event{EventKind::kGameStalled});
  }
  return t;
}

Outcome is_terminal(const GameState& s) {
  for (std::size_t i = 0; i < s.hands.size(); ++i) {
    if (s.hands[i].empty()) return {Outcome::Kind::kWon, static_cast<int>(i)};
  }
  if (s.stalled || s.turn_index >= s.config.turn_cap) return {Outcome::Kind::kStalled, -1};
  return {};
}

// ---------------------------------------------------------------------------
// Invariants

std::vector<Violation> check_state(const GameState& s) {
  std::vector<Violation> out;
  const auto n = s.deck->cards.size();
  std::vector<int> seen(n, 0);
  bool bad_index = false;
  auto count = [&](const std::vector<CardIndex>& zone) {
    for (CardIndex c : zone) {
      if (c >= n) {
        bad_index = true;
      } else {
        ++seen[c];
      }
    }
  };
  for (const auto& h : s.hands) count(h);
  count(s.draw_pile);
  count(s.discard_pile);
  count(s.challenge_pile);
  count(s.resolved_challenges);
  if (s.revealed_challenge != kNoCard) count({s.revealed_challenge});
  if (bad_index) out.push_back({"CARD_CONSERVATION", "state", "card index outside the deck"});
  for (std::size_t i = 0; i < n; ++i) {
    if (seen[i] != 1) {
      out.push_back({"CARD_CONSERVATION", "state",
                     "card " + s.deck->cards[i].id + " appears " + std::to_string(seen[i]) + " times"});
    }
  }
  for (std::size_t i = 0; i < s.hands.size(); ++i) {
    if (!std::is_sorted(s.hands[i].begin(), s.hands[i].end())) {
      out.push_back({"HAND_ORDER", "hands[" + std::to_string(i) + "]", "hand is not in canonical order"});
    }
  }
  if (s.active_rank > 0) {
    auto it = std::find_if(s.discard_pile.rbegin(), s.discard_pile.rend(),
                           [&](CardIndex c) { return c < n && s.card(c).kind == CardKind::kNumbered; });
    if (it == s.discard_pile.rend() || s.card(*it).rank != s.active_rank ||
        s.card(*it).category != s.active_category) {
      out.push_back({"ACTIVE_RANK", "active_rank", "active rank does not match the top numbered discard"});
    }
  }
  const bool awaiting = s.phase == Phase::kAwaitingChallengeAnswer || s.phase == Phase::kAwaitingScenarioDefense;
  if (awaiting != (s.revealed_challenge != kNoCard)) {
    out.push_back({"PHASE", "phase", "revealed challenge does not match phase"});
  }
  if (s.current_seat < 0 || s.current_seat >= s.config.player_count) {
    out.push_back({"SEAT", "current_seat", "current seat out of range"});
  }
  return out;
}

uint64_t state_hash(const GameState& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xFF;
      h *= 0x100000001b3ull;
    }
  };
  auto zone = [&](const std::vector<CardIndex>& z) {
    mix(z.size());
    for (CardIndex c : z) mix(c);
  };
  mix(static_cast<uint64_t>(s.config.ruleset));
  mix(s.config.player_count);
  mix(s.config.hand_size);
  mix(s.config.penalty_draw);
  mix(s.config.strict_precedence);
  mix(s.config.turn_cap);
  mix(s.config.seed);
  mix(reinterpret_cast<uintptr_t>(s.config.pack.get()));
  mix(reinterpret_cast<uintptr_t>(s.deck.get()));
  mix(s.hands.size());
  for (const auto& hand : s.hands) zone(hand);
  zone(s.draw_pile);
  zone(s.discard_pile);
  zone(s.challenge_pile);
  zone(s.resolved_challenges);
  mix(s.revealed_challenge);
  mix(static_cast<uint64_t>(s.active_category));
  mix(static_cast<uint64_t>(s.active_rank));
  mix(static_cast<uint64_t>(s.current_seat));
  mix(static_cast<uint64_t>(s.turn_index));
  mix(s.rng.state());
  mix(s.rng.inc());
  mix(static_cast<uint64_t>(s.phase));
  mix(static_cast<uint64_t>(s.winner));
  mix(s.stalled);
  return h;
}

// ---------------------------------------------------------------------------
// Replay

namespace {
[[noreturn]] void mismatch(const Event& e, const std::string& why) {
  throw Error(ErrorCode::kReplayMismatch, std::string(event_kind_name(e.kind)) + ": " + why);
}
}  // namespace

void apply_event(GameState& s, const Event& e) {
  if (s.phase == Phase::kFinished) mismatch(e, "event after the game finished");
  const auto seat_ok = [&](int seat) { return seat >= 0 && seat < s.config.player_count; };
  switch (e.kind) {
    case EventKind::kCardsPlayed: {
      if (e.seat != s.current_seat) mismatch(e, "seat is not on turn");
      if (e.cards.empty()) mismatch(e, "no cards");
      for (CardIndex c : e.cards) {
        if (c >= s.deck->cards.size() || !remove_card(s.hands[e.seat], c)) mismatch(e, "card not in hand");
        s.discard_pile.push_back(c);
      }
      if (s.phase == Phase::kOpening) s.phase = Phase::kPlay;
      break;
    }
    case EventKind::kCategoryChanged:
      if (e.previous_category != s.active_category) mismatch(e, "previous category differs");
      if (e.category < 0 || e.category >= static_cast<int>(s.pack().categories.size())) mismatch(e, "bad category");
      s.active_category = e.category;
      s.active_rank = e.rank;
      break;
    case EventKind::kPenaltyDrawn: {
      if (!seat_ok(e.seat)) mismatch(e, "bad seat");
      if (static_cast<int>(e.cards.size()) != e.count) mismatch(e, "count differs from cards");
      for (CardIndex c : e.cards) {
        if (s.draw_pile.empty() || s.draw_pile.back() != c) mismatch(e, "card is not on top of the draw pile");
        s.draw_pile.pop_back();
        insert_sorted(s.hands[e.seat], c);
      }
      break;
    }
    case EventKind::kChallengeFlipped:
      if (e.cards.size() != 1 || s.challenge_pile.empty() || s.challenge_pile.back() != e.cards[0]) {
        mismatch(e, "card is not on top of the challenge pile");
      }
      s.challenge_pile.pop_back();
      s.revealed_challenge = e.cards[0];
      s.phase = s.card(e.cards[0]).kind == CardKind::kTrueFalse ? Phase::kAwaitingChallengeAnswer
                                                                 : Phase::kAwaitingScenarioDefense;
      break;
    case EventKind::kChallengeResolved:
      if (s.revealed_challenge == kNoCard) mismatch(e, "no challenge revealed");
      s.resolved_challenges.push_back(s.revealed_challenge);
      s.revealed_challenge = kNoCard;
      s.phase = Phase::kPlay;
      break;
    case EventKind::kPilesReshuffled: {
      if (s.discard_pile.empty()) mismatch(e, "empty discard pile");
      std::vector<CardIndex> expect(s.discard_pile.begin(), s.discard_pile.end() - 1);
      expect.insert(expect.end(), s.draw_pile.begin(), s.draw_pile.end());
      auto got = e.draw_pile;
      std::sort(expect.begin(), expect.end());
      std::sort(got.begin(), got.end());
      if (expect != got) mismatch(e, "reshuffled pile is not discard-minus-top plus draw pile");
      s.discard_pile.erase(s.discard_pile.begin(), s.discard_pile.end() - 1);
      s.draw_pile = e.draw_pile;
      try {
        s.rng = Pcg32::from_hex(e.rng_state);
      } catch (const Error&) {
        mismatch(e, "bad rng_state");
      }
      break;
    }
    case EventKind::kTurnPassed:
      if (e.seat != (s.current_seat + 1) % s.config.player_count) mismatch(e, "turn did not pass clockwise");
      if (e.turn_index != s.turn_index + 1) mismatch(e, "turn index is not consecutive");
      s.current_seat = e.seat;
      s.turn_index = e.turn_index;
      break;
    case EventKind::kGameWon:
      if (!seat_ok(e.seat) || !s.hands[e.seat].empty()) mismatch(e, "winner still holds cards");
      s.phase = Phase::kFinished;
      s.winner = e.seat;
      break;
    case EventKind::kGameStalled:
      if (s.turn_index < s.config.turn_cap) mismatch(e, "turn cap not reached");
      s.phase = Phase::kFinished;
      s.stalled = true;
      break;
  }
}

GameState replay_events(const GameState& initial, const std::vector<Event>& events) {
  GameState s = initial;
  for (const auto& e : events) apply_event(s, e);
  return s;
}

std::string move_to_string(const Move& m, const Deck& deck) {
  auto ids = [&](const std::vector<CardIndex>& cards) {
    std::string out;
    for (CardIndex c : cards) {
      if (!out.empty()) out += ',';
      out += c < deck.cards.size() ? deck.cards[c].id : "?";
    }
    return out;
  };
  auto special = [&]() { return m.special < deck.cards.size() ? deck.cards[m.special].id : std::string("?"); };
  std::string out(move_kind_name(m.kind));
  switch (m.kind) {
    case MoveKind::kOpeningRun:
    case MoveKind::kAscendingRun:
    case MoveKind::kCrossMatch:
    case MoveKind::kScenarioDefense:
      out += " " + ids(m.cards);
      break;
    case MoveKind::kPlayChange:
      out += " " + special() + " " + std::to_string(m.declared_category);
      break;
    case MoveKind::kChangeCombo:
      out += " " + special() + " " + std::to_string(m.declared_category) + " " + ids(m.cards);
      break;
    case MoveKind::kPlayMinus:
      out += " " + special();
      break;
    case MoveKind::kAnswerTrueFalse:
      out += m.answer ? " true" : " false";
      break;
    case MoveKind::kDrawPenalty:
    case MoveKind::kFlipChallenge:
      break;
  }
  return out;
}

}  // namespace safecards
