#include "safecards/view.hpp"

#include <algorithm>

namespace safecards {

PlayerView player_view(const GameState& s, int seat) {
  if (seat < 0 || seat >= s.config.player_count) {
    throw Error(ErrorCode::kNotFound, "seat " + std::to_string(seat) + " does not exist");
  }
  PlayerView v;
  v.seat = seat;
  v.ruleset = s.config.ruleset;
  v.player_count = s.config.player_count;
  v.phase = s.phase;
  v.current_seat = s.current_seat;
  v.turn_index = s.turn_index;
  v.turn_cap = s.config.turn_cap;
  v.penalty_draw = s.config.penalty_draw;
  v.hand = s.hands[seat];
  for (int i = 0; i < s.config.player_count; ++i) {
    if (i != seat) v.opponent_hand_sizes[i] = static_cast<int>(s.hands[i].size());
  }
  if (!s.discard_pile.empty()) v.discard_top = s.discard_pile.back();
  v.discard_size = static_cast<int>(s.discard_pile.size());
  v.active_category = s.active_category;
  v.active_rank = s.active_rank;
  v.draw_pile_size = static_cast<int>(s.draw_pile.size());
  v.challenge_pile_size = static_cast<int>(s.challenge_pile.size());
  v.revealed_challenge = s.revealed_challenge;
  v.winner = s.winner;
  v.stalled = s.stalled;
  if (s.phase != Phase::kFinished && s.current_seat == seat) v.legal_moves = legal_moves(s);
  v.deck = s.deck;
  v.pack = s.config.pack;
  return v;
}

bool card_visible_to(const GameState& current, int viewer, CardIndex c) {
  if (c >= current.deck->cards.size()) return false;
  for (int seat = 0; seat < current.config.player_count; ++seat) {
    if (seat != viewer && std::binary_search(current.hands[seat].begin(), current.hands[seat].end(), c)) {
      return false;
    }
  }
  const auto in = [c](const std::vector<CardIndex>& z) { return std::find(z.begin(), z.end(), c) != z.end(); };
  return !in(current.draw_pile) && !in(current.challenge_pile);
}

Event filter_event(const Event& event, int viewer, const GameState& current) {
  Event e = event;
  const auto visible = [&](CardIndex c) { return card_visible_to(current, viewer, c); };
  const auto redact = [&](std::vector<CardIndex>& cards) {
    for (auto& c : cards) {
      if (!visible(c)) c = kNoCard;
    }
  };

  switch (e.kind) {
    case EventKind::kPenaltyDrawn:
      if (e.seat != viewer) e.cards.clear();
      break;
    case EventKind::kPilesReshuffled:
      e.draw_pile.clear();
      e.rng_state.clear();
      break;
    default:
      break;
  }
  redact(e.cards);
  return e;
}

}  // namespace safecards
