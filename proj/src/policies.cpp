#include "safecards/policies.hpp"

#include <algorithm>

namespace safecards {

namespace {

void require_moves(std::span<const Move> moves) {
  if (moves.empty()) throw Error(ErrorCode::kEmptyMoveSet, "policy called with no legal moves");
}

// When the seat must answer a True/False card, answers correctly with
// probability `accuracy`. Returns nullptr otherwise.
const Move* answer_challenge(const PlayerView& view, std::span<const Move> moves, Pcg32& rng, double accuracy) {
  if (view.phase != Phase::kAwaitingChallengeAnswer || view.revealed_challenge == kNoCard) return nullptr;
  const auto& entry = view.pack->challenges[view.card(view.revealed_challenge).content];
  const bool truth = entry.answer.value_or(false);
  const bool answer = rng.next_unit() < accuracy ? truth : !truth;
  for (const auto& m : moves) {
    if (m.kind == MoveKind::kAnswerTrueFalse && m.answer == answer) return &m;
  }
  return nullptr;
}

int rank_shed(const PlayerView& view, const Move& m) {
  int total = 0;
  for (CardIndex c : m.cards) total += view.card(c).rank;
  return total;
}

class RandomPolicy final : public Policy {
 public:
  using Policy::Policy;
  std::string_view name() const override { return "random"; }
  Move choose(const PlayerView& view, std::span<const Move> moves, Pcg32& rng) const override {
    return policy_random(view, moves, rng, tf_accuracy());
  }
};

class GreedyPolicy final : public Policy {
 public:
  using Policy::Policy;
  std::string_view name() const override { return "greedy"; }
  Move choose(const PlayerView& view, std::span<const Move> moves, Pcg32& rng) const override {
    return policy_greedy(view, moves, rng, tf_accuracy());
  }
};

}  // namespace

Move policy_random(const PlayerView& view, std::span<const Move> moves, Pcg32& rng, double tf_accuracy) {
  require_moves(moves);
  if (const Move* m = answer_challenge(view, moves, rng, tf_accuracy)) return *m;
  return moves[rng.bounded(static_cast<uint32_t>(moves.size()))];
}

Move policy_greedy(const PlayerView& view, std::span<const Move> moves, Pcg32& rng, double tf_accuracy) {
  require_moves(moves);
  if (const Move* m = answer_challenge(view, moves, rng, tf_accuracy)) return *m;
  const Move* best = &moves[0];
  int best_shed = cards_shed(*best);
  int best_rank = rank_shed(view, *best);
  std::string best_text = move_to_string(*best, *view.deck);
  for (std::size_t i = 1; i < moves.size(); ++i) {
    const Move& m = moves[i];
    const int shed = cards_shed(m);
    if (shed < best_shed) continue;
    const int rank = rank_shed(view, m);
    if (shed == best_shed && rank < best_rank) continue;
    std::string text = move_to_string(m, *view.deck);
    if (shed == best_shed && rank == best_rank && text >= best_text) continue;
    best = &m;
    best_shed = shed;
    best_rank = rank;
    best_text = std::move(text);
  }
  return *best;
}

std::unique_ptr<Policy> make_policy(std::string_view name, double tf_accuracy) {
  if (tf_accuracy < 0.0 || tf_accuracy > 1.0) throw Error(ErrorCode::kConfig, "tf_accuracy must be in [0, 1]");
  if (name == "random") return std::make_unique<RandomPolicy>(tf_accuracy);
  if (name == "greedy") return std::make_unique<GreedyPolicy>(tf_accuracy);
  throw Error(ErrorCode::kConfig, "unknown policy '" + std::string(name) + "' (expected random or greedy)");
}

std::vector<std::string> policy_names() { return {"random", "greedy"}; }

}  // namespace safecards
