#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "safecards/engine.hpp"

namespace safecards {

struct SimConfig {
  int games = 0;
  GameConfig base;                    // seed is ignored; each game derives its own
  std::vector<std::string> policies;  // one name per seat, or a single name for all seats
  uint64_t master_seed = 0;
  int parallelism = 1;                // worker threads; results do not depend on it
  double tf_accuracy = 0.5;
  bool check_invariants = false;      // run check_state and the purity check after every move
};

// Per-game record. Counts are over the whole game.
struct GameRecord {
  int index = 0;
  uint64_t seed = 0;
  int turns = 0;
  int winner = -1;
  bool stalled = false;
  int penalty_draws = 0;       // PenaltyDrawn events (forced draws, Minus draws, wrong answers)
  int change_plays = 0;        // PlayChange + ChangeCombo
  int minus_plays = 0;
  int challenges_correct = 0;  // True/False answers
  int challenges_incorrect = 0;
  int scenario_cards_shed = 0;
  int category_switches = 0;   // CategoryChanged events that moved to a different category
  int reshuffles = 0;
  int invariant_violations = 0;

  friend bool operator==(const GameRecord&, const GameRecord&) = default;
};

struct SimStats {
  int games_played = 0;
  std::vector<int> wins;  // per seat
  int stalls = 0;
  int turns_min = 0;
  int turns_max = 0;
  double turns_median = 0.0;
  int64_t turns_total = 0;
  int hist_bin_width = 1;
  std::vector<int> histogram;  // bin b counts games with turns in [b*w, (b+1)*w)
  int64_t penalty_draws = 0;
  int64_t change_plays = 0;
  int64_t minus_plays = 0;
  int64_t challenges_correct = 0;
  int64_t challenges_incorrect = 0;
  int64_t scenario_cards_shed = 0;
  int64_t category_switches = 0;
  int64_t reshuffles = 0;
  int64_t invariant_violations = 0;
  std::vector<GameRecord> records;  // ordered by game index; not part of the CSV form

  double turns_mean() const { return games_played ? double(turns_total) / games_played : 0.0; }
  double per_game(int64_t total) const { return games_played ? double(total) / games_played : 0.0; }
  double stall_rate() const { return games_played ? double(stalls) / games_played : 0.0; }

  friend bool operator==(const SimStats&, const SimStats&) = default;
};

struct GameRun {
  GameRecord record;
  GameState initial;
  GameState final_state;
  std::vector<Event> events;
};

// Plays one game to Won or Stalled. Policy decisions use Pcg32(seed, 1).
GameRun play_game(const GameConfig& config, const std::vector<std::string>& policies, double tf_accuracy,
                  bool check_invariants = false);

// Throws ConfigError.
SimStats run_simulation(const SimConfig& sim);

// Merges per-game records (any order) into stats for `seats` seats.
SimStats aggregate(std::vector<GameRecord> records, int seats, int turn_cap);

// Effective per-seat policy list (expands a single name). Throws ConfigError.
std::vector<std::string> expand_policies(const std::vector<std::string>& names, int seats);

enum class StatsFormat { kCsv, kJsonl };

// CSV: one row per seat with the summary columns repeated, header
//   seat,wins,win_share,games_played,stalls,turns_min,turns_median,turns_mean,
//   turns_max,turns_total,hist_bin_width,histogram,penalty_draws,change_plays,
//   minus_plays,challenges_correct,challenges_incorrect,scenario_cards_shed,
//   category_switches,reshuffles,invariant_violations
// histogram is ';'-separated bin counts. JSONL: one {"type":"game"} record
// per game followed by one {"type":"summary"} record.
std::string export_stats(const SimStats& stats, StatsFormat format);
void write_stats_file(const SimStats& stats, StatsFormat format, const std::string& path);  // IoError

// Inverse of export_stats. CSV input yields stats without per-game records.
SimStats read_stats(const std::string& document, StatsFormat format);

}  // namespace safecards
