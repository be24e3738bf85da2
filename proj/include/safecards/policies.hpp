#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "safecards/rng.hpp"
#include "safecards/view.hpp"

namespace safecards {

// A bot strategy. Input is the seat's PlayerView and the legal move list
// only. True/False answers are correct with probability tf_accuracy.
class Policy {
 public:
  explicit Policy(double tf_accuracy = 0.5) : tf_accuracy_(tf_accuracy) {}
  virtual ~Policy() = default;

  virtual std::string_view name() const = 0;
  // Returns an element of `moves`. Throws EmptyMoveSet if `moves` is empty.
  virtual Move choose(const PlayerView& view, std::span<const Move> moves, Pcg32& rng) const = 0;

  double tf_accuracy() const { return tf_accuracy_; }

 private:
  double tf_accuracy_;
};

Move policy_random(const PlayerView& view, std::span<const Move> moves, Pcg32& rng, double tf_accuracy = 0.5);

// Most cards shed, then highest total rank shed, then the lexicographically
// smallest move text.
Move policy_greedy(const PlayerView& view, std::span<const Move> moves, Pcg32& rng, double tf_accuracy = 0.5);

// "random" or "greedy". Throws ConfigError for other names.
std::unique_ptr<Policy> make_policy(std::string_view name, double tf_accuracy = 0.5);

std::vector<std::string> policy_names();

}  // namespace safecards
