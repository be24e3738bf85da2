#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "safecards/engine.hpp"
#include "safecards/policies.hpp"
#include "safecards/view.hpp"

namespace safecards::test {

inline CardIndex id(const GameState& s, const std::string& card_id) {
  auto c = s.deck->find(card_id);
  if (!c) throw std::runtime_error("no card " + card_id);
  return *c;
}

inline std::vector<CardIndex> ids(const GameState& s, const std::vector<std::string>& card_ids) {
  std::vector<CardIndex> out;
  for (const auto& c : card_ids) out.push_back(id(s, c));
  return out;
}

inline int cat(const GameState& s, const std::string& category_id) { return s.pack().category_index(category_id); }

// Hand-built position: the listed hands for seats 0.., seat 0 on turn, the
// given active category/rank (empty category: opening), and every other
// main-pile card in the draw pile. When active_rank > 0 the matching numbered
// card is placed on the discard pile.
struct Setup {
  Ruleset ruleset = Ruleset::kV1Base;
  std::vector<std::vector<std::string>> hands;
  std::string active_category;
  int active_rank = 0;
  std::vector<std::string> discard;
  bool strict = true;
  int players = 0;  // 0: hands.size(), at least 2
};

inline GameState make_state(const Setup& u) {
  GameConfig cfg;
  cfg.ruleset = u.ruleset;
  cfg.player_count = u.players ? u.players : std::max<int>(2, static_cast<int>(u.hands.size()));
  cfg.strict_precedence = u.strict;
  cfg.seed = 1;
  GameState s = new_game(cfg);
  std::vector<CardIndex> used;
  for (auto& h : s.hands) h.clear();
  for (std::size_t seat = 0; seat < u.hands.size(); ++seat) {
    for (const auto& c : u.hands[seat]) {
      s.hands[seat].push_back(id(s, c));
      used.push_back(id(s, c));
    }
    std::sort(s.hands[seat].begin(), s.hands[seat].end());
  }
  s.discard_pile.clear();
  for (const auto& c : u.discard) {
    s.discard_pile.push_back(id(s, c));
    used.push_back(id(s, c));
  }
  if (!u.active_category.empty()) {
    s.phase = Phase::kPlay;
    s.active_category = cat(s, u.active_category);
    s.active_rank = u.active_rank;
    if (u.active_rank > 0 && u.discard.empty()) {
      const CardIndex top = s.deck->numbered(s.active_category, u.active_rank);
      if (std::find(used.begin(), used.end(), top) != used.end()) throw std::runtime_error("active card is in a hand");
      s.discard_pile.push_back(top);
      used.push_back(top);
    }
  }
  s.draw_pile.clear();
  for (CardIndex c : s.deck->main_pile) {
    if (std::find(used.begin(), used.end(), c) == used.end()) s.draw_pile.push_back(c);
  }
  s.current_seat = 0;
  return s;
}

inline std::vector<std::string> move_strings(const GameState& s, std::vector<Move> moves) {
  std::vector<std::string> out;
  for (const auto& m : moves) out.push_back(move_to_string(m, *s.deck));
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<std::string> legal_strings(const GameState& s) { return move_strings(s, legal_moves(s)); }

// Plays `steps` random legal moves (fewer if the game ends).
inline GameState random_prefix(GameConfig cfg, int steps, uint64_t policy_seed) {
  GameState s = new_game(std::move(cfg));
  Pcg32 rng(policy_seed, 7);
  for (int i = 0; i < steps && s.phase != Phase::kFinished; ++i) {
    const auto moves = legal_moves(s);
    const Move m = moves[rng.bounded(static_cast<uint32_t>(moves.size()))];
    s = apply_move(s, s.current_seat, m).state;
  }
  return s;
}

// Ids of cards hidden from `viewer` that appear as quoted strings in `text`.
inline std::vector<std::string> leaked_ids(const GameState& s, int viewer, const std::string& text) {
  std::vector<std::string> out;
  for (CardIndex c = 0; c < s.deck->cards.size(); ++c) {
    if (card_visible_to(s, viewer, c)) continue;
    if (text.find('"' + s.card(c).id + '"') != std::string::npos) out.push_back(s.card(c).id);
  }
  return out;
}

}  // namespace safecards::test
