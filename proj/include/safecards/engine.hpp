#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "safecards/content.hpp"
#include "safecards/errors.hpp"
#include "safecards/rng.hpp"

namespace safecards {

enum class Ruleset { kV1Base, kV1Revised, kV2 };

std::string_view ruleset_name(Ruleset r);  // "v1-base", "v1-revised", "v2"
std::optional<Ruleset> parse_ruleset(std::string_view name);

enum class CardKind { kNumbered, kMinus, kChange, kTrueFalse, kScenario };

std::string_view card_kind_name(CardKind k);

// Index of a card within its Deck. Stable for a given (pack, ruleset).
using CardIndex = uint16_t;
inline constexpr CardIndex kNoCard = 0xFFFF;

struct Card {
  std::string id;  // "HS-3", "PM-MINUS-1", "CHG-4", "TF-2", "SC-5"
  CardKind kind = CardKind::kNumbered;
  int category = -1;  // pack category index; Numbered and Minus only
  int rank = 0;       // Numbered only
  int content = -1;   // index into advice / misconceptions / change_cards / challenges
};

struct Deck {
  Ruleset ruleset = Ruleset::kV1Base;
  std::vector<Card> cards;              // canonical order
  std::vector<CardIndex> main_pile;     // canonical order of the dealt pile
  std::vector<CardIndex> challenge_pile;

  const Card& card(CardIndex i) const { return cards[i]; }
  std::optional<CardIndex> find(std::string_view id) const;
  // Numbered card for (category index, rank), or kNoCard.
  CardIndex numbered(int category, int rank) const;

  std::vector<CardIndex> numbered_lookup;  // category * 8 + rank - 1
};

using DeckPtr = std::shared_ptr<const Deck>;

// V1: one card per advice entry, misconception and change info.
// V2: numbered main pile plus one challenge card per ChallengeEntry.
// Throws PackRulesetMismatch when the pack cannot support the ruleset.
Deck build_deck(const ContentPack& pack, Ruleset ruleset);

struct GameConfig {
  Ruleset ruleset = Ruleset::kV1Base;
  int player_count = 4;
  int hand_size = 7;
  int penalty_draw = 2;
  bool strict_precedence = true;
  int turn_cap = 500;
  PackPtr pack;  // null means the default pack
  uint64_t seed = 0;
};

enum class Phase { kOpening, kPlay, kAwaitingChallengeAnswer, kAwaitingScenarioDefense, kFinished };

std::string_view phase_name(Phase p);

struct GameState {
  GameConfig config;
  DeckPtr deck;
  std::vector<std::vector<CardIndex>> hands;  // each sorted ascending
  std::vector<CardIndex> draw_pile;           // back() is the top
  std::vector<CardIndex> discard_pile;        // back() is the top
  std::vector<CardIndex> challenge_pile;      // back() is the top
  std::vector<CardIndex> resolved_challenges;
  CardIndex revealed_challenge = kNoCard;
  int active_category = -1;  // -1 before the opening play
  int active_rank = 0;       // 0: any rank of the active category
  int current_seat = 0;
  int turn_index = 0;
  Pcg32 rng;
  Phase phase = Phase::kOpening;
  int winner = -1;
  bool stalled = false;

  const ContentPack& pack() const { return *config.pack; }
  const Card& card(CardIndex i) const { return deck->card(i); }

  friend bool operator==(const GameState& a, const GameState& b);
};

// Shuffles the canonical deck with Fisher-Yates driven by Pcg32(seed), deals
// hand_size cards round-robin from seat 0 and leaves the rest as the draw
// pile. Throws ConfigError.
GameState new_game(GameConfig config);

void validate_config(const GameConfig& config);

enum class MoveKind {
  kOpeningRun,
  kAscendingRun,
  kCrossMatch,
  kPlayChange,
  kChangeCombo,
  kPlayMinus,
  kDrawPenalty,
  kFlipChallenge,
  kAnswerTrueFalse,
  kScenarioDefense,
};

std::string_view move_kind_name(MoveKind k);
std::optional<MoveKind> parse_move_kind(std::string_view name);

struct Move {
  MoveKind kind = MoveKind::kDrawPenalty;
  std::vector<CardIndex> cards;  // runs, cross-matches, combo follow-ups, defenses
  CardIndex special = kNoCard;   // the Change or Minus card
  int declared_category = -1;    // PlayChange / ChangeCombo
  bool answer = false;           // AnswerTrueFalse

  static Move opening_run(std::vector<CardIndex> c) { return {MoveKind::kOpeningRun, std::move(c)}; }
  static Move ascending_run(std::vector<CardIndex> c) { return {MoveKind::kAscendingRun, std::move(c)}; }
  static Move cross_match(std::vector<CardIndex> c) { return {MoveKind::kCrossMatch, std::move(c)}; }
  static Move play_change(CardIndex card, int category) {
    return {MoveKind::kPlayChange, {}, card, category};
  }
  static Move change_combo(CardIndex card, int category, std::vector<CardIndex> followup) {
    return {MoveKind::kChangeCombo, std::move(followup), card, category};
  }
  static Move play_minus(CardIndex card) { return {MoveKind::kPlayMinus, {}, card}; }
  static Move draw_penalty() { return {MoveKind::kDrawPenalty}; }
  static Move flip_challenge() { return {MoveKind::kFlipChallenge}; }
  static Move answer_true_false(bool a) { return {MoveKind::kAnswerTrueFalse, {}, kNoCard, -1, a}; }
  static Move scenario_defense(std::vector<CardIndex> c) { return {MoveKind::kScenarioDefense, std::move(c)}; }

  friend bool operator==(const Move&, const Move&) = default;
  friend auto operator<=>(const Move&, const Move&) = default;
};

// Precedence class of a move: 1 numbered, 2 change, 3 minus / challenge,
// 4 forced draw. Challenge responses are class 0 (outside the ladder).
int precedence_class(MoveKind k);

// Number of cards a move takes out of the acting hand.
int cards_shed(const Move& m);

enum class EventKind {
  kCardsPlayed,
  kCategoryChanged,
  kPenaltyDrawn,
  kChallengeFlipped,
  kChallengeResolved,
  kPilesReshuffled,
  kTurnPassed,
  kGameWon,
  kGameStalled,
};

std::string_view event_kind_name(EventKind k);

// One record of a state transition. Fields not used by a kind keep their
// defaults. The engine log is complete (drawn card identities, reshuffled
// order, generator state); hidden-information filtering is the caller's job.
struct Event {
  EventKind kind = EventKind::kTurnPassed;
  int seat = -1;                  // acting seat; TurnPassed: next seat; GameWon: winner
  MoveKind move = MoveKind::kDrawPenalty;  // CardsPlayed: originating move
  std::vector<CardIndex> cards;   // CardsPlayed / PenaltyDrawn / ChallengeFlipped
  int category = -1;              // CategoryChanged: new active category
  int rank = 0;                   // CategoryChanged: new active rank
  int previous_category = -1;     // CategoryChanged
  int count = 0;                  // PenaltyDrawn: cards drawn; PilesReshuffled: resulting draw-pile size
  bool correct = false;           // ChallengeResolved
  int turn_index = 0;             // TurnPassed: new turn index
  std::vector<CardIndex> draw_pile;  // PilesReshuffled: resulting pile
  std::string rng_state;          // PilesReshuffled: generator after the shuffle

  friend bool operator==(const Event&, const Event&) = default;
};

struct Transition {
  GameState state;
  std::vector<Event> events;
};

// Complete, deterministically ordered legal move list for the seat on turn.
// Empty when the game is finished.
std::vector<Move> legal_moves(const GameState& state);

// Pure transition. Throws NotYourTurn, WrongPhase or IllegalMove (with the
// violated rule code in Error::rule_code()).
Transition apply_move(const GameState& state, int seat, const Move& move);

// Rule code the move would be rejected with, or empty if it is legal.
std::string check_move(const GameState& state, int seat, const Move& move);

struct Outcome {
  enum class Kind { kNone, kWon, kStalled } kind = Kind::kNone;
  int seat = -1;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

Outcome is_terminal(const GameState& state);

// Card conservation plus the active-rank invariant. Empty means consistent.
std::vector<Violation> check_state(const GameState& state);

// Folds an event log over a state. Throws ReplayMismatch when an event does
// not fit the state it is applied to.
GameState replay_events(const GameState& initial, const std::vector<Event>& events);
void apply_event(GameState& state, const Event& event);

// Hash over every field of the state (used to check purity).
uint64_t state_hash(const GameState& state);

// Canonical text of a move, e.g. "AscendingRun HS-5,HS-7". Used for
// deterministic tie-breaking and diagnostics.
std::string move_to_string(const Move& move, const Deck& deck);

}  // namespace safecards
