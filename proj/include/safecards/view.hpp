#pragma once

#include <map>
#include <vector>

#include "safecards/engine.hpp"

namespace safecards {

// What one seat may know. Built only from public zones plus the seat's own
// hand; nothing here identifies an opponent's card or the draw-pile order.
struct PlayerView {
  int seat = 0;
  Ruleset ruleset = Ruleset::kV1Base;
  int player_count = 0;
  Phase phase = Phase::kOpening;
  int current_seat = 0;
  int turn_index = 0;
  int turn_cap = 0;
  int penalty_draw = 0;
  std::vector<CardIndex> hand;
  std::map<int, int> opponent_hand_sizes;
  CardIndex discard_top = kNoCard;
  int discard_size = 0;
  int active_category = -1;
  int active_rank = 0;
  int draw_pile_size = 0;
  int challenge_pile_size = 0;
  CardIndex revealed_challenge = kNoCard;
  int winner = -1;
  bool stalled = false;
  std::vector<Move> legal_moves;  // empty unless it is this seat's turn

  DeckPtr deck;
  PackPtr pack;

  const Card& card(CardIndex i) const { return deck->card(i); }
};

PlayerView player_view(const GameState& state, int seat);

// False for cards in another seat's hand, the draw pile or the challenge pile.
bool card_visible_to(const GameState& current, int viewer, CardIndex card);

// Event as seat `viewer` may see it, judged against the current state:
// PenaltyDrawn and PilesReshuffled lose card identities unless they belong to
// the viewer, and any card id that currently sits in a hidden zone (another
// hand, the draw pile, the challenge pile) is redacted.
Event filter_event(const Event& event, int viewer, const GameState& current);

}  // namespace safecards
