#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "safecards/simulator.hpp"

using namespace safecards;

namespace {

SimConfig sim(Ruleset r, int games, uint64_t seed, std::vector<std::string> policies = {"random"}) {
  SimConfig c;
  c.games = games;
  c.base.ruleset = r;
  c.master_seed = seed;
  c.policies = std::move(policies);
  return c;
}

}  // namespace

TEST_CASE("one game agrees with play_game") {
  SimConfig c = sim(Ruleset::kV1Base, 1, 77);
  c.check_invariants = true;
  const SimStats st = run_simulation(c);
  GameConfig g = c.base;
  g.seed = derive_game_seed(77, 0);
  const GameRun run = play_game(g, expand_policies(c.policies, 4), c.tf_accuracy, true);
  CHECK(st.games_played == 1);
  REQUIRE(st.records.size() == 1);
  CHECK(st.records[0] == run.record);
  CHECK(st.turns_min == run.record.turns);
  CHECK(st.turns_max == run.record.turns);
  CHECK(st.invariant_violations == 0);
  CHECK(replay_events(run.initial, run.events) == run.final_state);
  CHECK(is_terminal(run.final_state).kind != Outcome::Kind::kNone);
}

TEST_CASE("simulation is deterministic and independent of thread count") {
  for (auto r : {Ruleset::kV1Base, Ruleset::kV1Revised, Ruleset::kV2}) {
    SimConfig c = sim(r, 120, 5, {"random", "greedy", "random", "greedy"});
    const SimStats serial = run_simulation(c);
    c.parallelism = 4;
    const SimStats parallel = run_simulation(c);
    CHECK(serial == parallel);
    CHECK(export_stats(serial, StatsFormat::kCsv) == export_stats(parallel, StatsFormat::kCsv));
    c.master_seed = 6;
    CHECK(!(run_simulation(c) == serial));
  }
}

TEST_CASE("every game ends and the totals add up") {
  for (auto r : {Ruleset::kV1Base, Ruleset::kV1Revised, Ruleset::kV2}) {
    SimConfig c = sim(r, 300, 1);
    c.check_invariants = true;
    const SimStats st = run_simulation(c);
    CHECK(std::accumulate(st.wins.begin(), st.wins.end(), 0) + st.stalls == 300);
    CHECK(std::accumulate(st.histogram.begin(), st.histogram.end(), 0) == 300);
    CHECK(st.invariant_violations == 0);
    CHECK(st.turns_min <= st.turns_median);
    CHECK(st.turns_median <= st.turns_max);
    CHECK(st.turns_max <= c.base.turn_cap);
    int64_t total = 0;
    for (const auto& rec : st.records) total += rec.turns;
    CHECK(total == st.turns_total);
    if (r == Ruleset::kV2) {
      CHECK(st.change_plays == 0);
      CHECK(st.minus_plays == 0);
    } else {
      CHECK(st.challenges_correct + st.challenges_incorrect == 0);
    }
  }
}

TEST_CASE("invalid simulation configs") {
  auto expect_config = [](const SimConfig& c) {
    try {
      run_simulation(c);
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
    }
  };
  expect_config(sim(Ruleset::kV1Base, 0, 1));
  expect_config(sim(Ruleset::kV1Base, 5, 1, {"random", "greedy", "random"}));
  expect_config(sim(Ruleset::kV1Base, 5, 1, {"oracle"}));
}

TEST_CASE("CSV export has one row per seat and the documented columns") {
  const SimStats st = run_simulation(sim(Ruleset::kV1Revised, 50, 3));
  const std::string csv = export_stats(st, StatsFormat::kCsv);
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < csv.size()) {
    const auto end = csv.find('\n', start);
    lines.push_back(csv.substr(start, end - start));
    start = end + 1;
  }
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] ==
        "seat,wins,win_share,games_played,stalls,turns_min,turns_median,turns_mean,turns_max,turns_total,"
        "hist_bin_width,histogram,penalty_draws,change_plays,minus_plays,challenges_correct,challenges_incorrect,"
        "scenario_cards_shed,category_switches,reshuffles,invariant_violations");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 20);
    CHECK(lines[i].rfind(std::to_string(i - 1) + ",", 0) == 0);
  }
  SimStats back = read_stats(csv, StatsFormat::kCsv);
  SimStats expect = st;
  expect.records.clear();
  CHECK(back == expect);
}

TEST_CASE("JSONL export round trips including per-game records") {
  const SimStats st = run_simulation(sim(Ruleset::kV2, 40, 9));
  const std::string text = export_stats(st, StatsFormat::kJsonl);
  CHECK(std::count(text.begin(), text.end(), '\n') == 41);
  CHECK(read_stats(text, StatsFormat::kJsonl) == st);
}

TEST_CASE("aggregate is order independent") {
  SimStats st = run_simulation(sim(Ruleset::kV1Base, 60, 12));
  auto records = st.records;
  std::reverse(records.begin(), records.end());
  CHECK(aggregate(records, 4, 500) == st);
}

TEST_CASE("writing to an unwritable path is an IO error") {
  const SimStats st = run_simulation(sim(Ruleset::kV1Base, 2, 1));
  try {
    write_stats_file(st, StatsFormat::kCsv, "/nonexistent-dir/stats.csv");
    FAIL("expected IoError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}
