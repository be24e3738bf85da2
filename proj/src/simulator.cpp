#include "safecards/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "safecards/policies.hpp"
#include "safecards/view.hpp"

namespace safecards {

namespace {

constexpr const char* kCsvColumns[] = {
    "seat",          "wins",           "win_share",          "games_played",         "stalls",
    "turns_min",     "turns_median",   "turns_mean",         "turns_max",            "turns_total",
    "hist_bin_width", "histogram",     "penalty_draws",      "change_plays",         "minus_plays",
    "challenges_correct", "challenges_incorrect", "scenario_cards_shed", "category_switches", "reshuffles",
    "invariant_violations",
};

void tally(GameRecord& r, const Event& e) {
  switch (e.kind) {
    case EventKind::kCardsPlayed:
      if (e.move == MoveKind::kScenarioDefense) r.scenario_cards_shed += static_cast<int>(e.cards.size());
      break;
    case EventKind::kCategoryChanged:
      if (e.previous_category >= 0 && e.previous_category != e.category) ++r.category_switches;
      break;
    case EventKind::kPenaltyDrawn:
      ++r.penalty_draws;
      break;
    case EventKind::kPilesReshuffled:
      ++r.reshuffles;
      break;
    default:
      break;
  }
}

void tally_move(GameRecord& r, const Move& m, const Transition& t) {
  switch (m.kind) {
    case MoveKind::kPlayChange:
    case MoveKind::kChangeCombo:
      ++r.change_plays;
      break;
    case MoveKind::kPlayMinus:
      ++r.minus_plays;
      break;
    case MoveKind::kAnswerTrueFalse:
      for (const auto& e : t.events) {
        if (e.kind == EventKind::kChallengeResolved) (e.correct ? r.challenges_correct : r.challenges_incorrect)++;
      }
      break;
    default:
      break;
  }
}

std::string fmt_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

int64_t to_int(const std::string& s) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kParse, "stats: not an integer: '" + s + "'");
  }
}

nlohmann::ordered_json record_to_json(const GameRecord& r) {
  return {{"type", "game"},
          {"index", r.index},
          {"seed", r.seed},
          {"turns", r.turns},
          {"winner", r.winner},
          {"stalled", r.stalled},
          {"penalty_draws", r.penalty_draws},
          {"change_plays", r.change_plays},
          {"minus_plays", r.minus_plays},
          {"challenges_correct", r.challenges_correct},
          {"challenges_incorrect", r.challenges_incorrect},
          {"scenario_cards_shed", r.scenario_cards_shed},
          {"category_switches", r.category_switches},
          {"reshuffles", r.reshuffles},
          {"invariant_violations", r.invariant_violations}};
}

GameRecord record_from_json(const nlohmann::json& j) {
  GameRecord r;
  r.index = j.at("index").get<int>();
  r.seed = j.at("seed").get<uint64_t>();
  r.turns = j.at("turns").get<int>();
  r.winner = j.at("winner").get<int>();
  r.stalled = j.at("stalled").get<bool>();
  r.penalty_draws = j.at("penalty_draws").get<int>();
  r.change_plays = j.at("change_plays").get<int>();
  r.minus_plays = j.at("minus_plays").get<int>();
  r.challenges_correct = j.at("challenges_correct").get<int>();
  r.challenges_incorrect = j.at("challenges_incorrect").get<int>();
  r.scenario_cards_shed = j.at("scenario_cards_shed").get<int>();
  r.category_switches = j.at("category_switches").get<int>();
  r.reshuffles = j.at("reshuffles").get<int>();
  r.invariant_violations = j.at("invariant_violations").get<int>();
  return r;
}

}  // namespace

std::vector<std::string> expand_policies(const std::vector<std::string>& names, int seats) {
  if (names.empty()) return std::vector<std::string>(static_cast<std::size_t>(seats), "random");
  std::vector<std::string> out = names;
  if (out.size() == 1) out.resize(static_cast<std::size_t>(seats), names[0]);
  if (static_cast<int>(out.size()) != seats) {
    throw Error(ErrorCode::kConfig, "expected 1 or " + std::to_string(seats) + " policy names, got " +
                                        std::to_string(names.size()));
  }
  for (const auto& n : out) make_policy(n);
  return out;
}

GameRun play_game(const GameConfig& config, const std::vector<std::string>& policies, double tf_accuracy,
                  bool check_invariants) {
  std::vector<std::unique_ptr<Policy>> bots;
  for (const auto& name : expand_policies(policies, config.player_count)) bots.push_back(make_policy(name, tf_accuracy));

  GameRun run{{}, new_game(config), {}, {}};
  run.record.seed = config.seed;
  GameState s = run.initial;
  Pcg32 rng(config.seed, 1);
  GameRecord& r = run.record;

  while (s.phase != Phase::kFinished) {
    const int seat = s.current_seat;
    const PlayerView view = player_view(s, seat);
    const Move move = bots[static_cast<std::size_t>(seat)]->choose(view, view.legal_moves, rng);
    const uint64_t before = check_invariants ? state_hash(s) : 0;
    Transition t = apply_move(s, seat, move);
    if (check_invariants) {
      if (state_hash(s) != before) ++r.invariant_violations;
      if (!check_state(t.state).empty()) ++r.invariant_violations;
    }
    tally_move(r, move, t);
    for (const auto& e : t.events) tally(r, e);
    run.events.insert(run.events.end(), std::make_move_iterator(t.events.begin()),
                      std::make_move_iterator(t.events.end()));
    s = std::move(t.state);
  }

  r.winner = s.winner;
  r.stalled = s.stalled;
  r.turns = s.turn_index + (s.winner >= 0 ? 1 : 0);
  run.final_state = std::move(s);
  return run;
}

SimStats aggregate(std::vector<GameRecord> records, int seats, int turn_cap) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  SimStats st;
  st.games_played = static_cast<int>(records.size());
  st.wins.assign(static_cast<std::size_t>(seats), 0);
  st.hist_bin_width = std::max(1, turn_cap / 20);
  st.histogram.assign(static_cast<std::size_t>(turn_cap / st.hist_bin_width + 1), 0);

  std::vector<int> turns;
  turns.reserve(records.size());
  for (const auto& r : records) {
    if (r.winner >= 0) ++st.wins[static_cast<std::size_t>(r.winner)];
    if (r.stalled) ++st.stalls;
    turns.push_back(r.turns);
    st.turns_total += r.turns;
    const auto bin = std::min<std::size_t>(static_cast<std::size_t>(r.turns / st.hist_bin_width), st.histogram.size() - 1);
    ++st.histogram[bin];
    st.penalty_draws += r.penalty_draws;
    st.change_plays += r.change_plays;
    st.minus_plays += r.minus_plays;
    st.challenges_correct += r.challenges_correct;
    st.challenges_incorrect += r.challenges_incorrect;
    st.scenario_cards_shed += r.scenario_cards_shed;
    st.category_switches += r.category_switches;
    st.reshuffles += r.reshuffles;
    st.invariant_violations += r.invariant_violations;
  }
  if (!turns.empty()) {
    std::sort(turns.begin(), turns.end());
    st.turns_min = turns.front();
    st.turns_max = turns.back();
    const std::size_t n = turns.size();
    st.turns_median = n % 2 ? turns[n / 2] : (turns[n / 2 - 1] + turns[n / 2]) / 2.0;
  }
  st.records = std::move(records);
  return st;
}

SimStats run_simulation(const SimConfig& sim) {
  if (sim.games <= 0) throw Error(ErrorCode::kConfig, "games must be positive");
  if (sim.parallelism <= 0) throw Error(ErrorCode::kConfig, "parallelism must be positive");
  GameConfig base = sim.base;
  if (!base.pack) base.pack = default_pack_ptr();
  validate_config(base);
  const auto policies = expand_policies(sim.policies, base.player_count);
  make_policy(policies[0], sim.tf_accuracy);  // rejects a bad tf_accuracy up front
  // Build the deck once so a pack/ruleset mismatch surfaces before any work.
  build_deck(*base.pack, base.ruleset);

  std::vector<GameRecord> records(static_cast<std::size_t>(sim.games));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < sim.games; i = next++) {
      try {
        GameConfig cfg = base;
        cfg.seed = derive_game_seed(sim.master_seed, static_cast<uint64_t>(i));
        GameRun run = play_game(cfg, policies, sim.tf_accuracy, sim.check_invariants);
        run.record.index = i;
        records[static_cast<std::size_t>(i)] = run.record;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = sim.games;
      }
    }
  };
  const int threads = std::min(sim.parallelism, sim.games);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(std::move(records), base.player_count, base.turn_cap);
}

std::string export_stats(const SimStats& st, StatsFormat format) {
  std::ostringstream out;
  if (format == StatsFormat::kCsv) {
    for (std::size_t i = 0; i < std::size(kCsvColumns); ++i) out << (i ? "," : "") << kCsvColumns[i];
    out << '\n';
    std::string hist;
    for (std::size_t i = 0; i < st.histogram.size(); ++i) hist += (i ? ";" : "") + std::to_string(st.histogram[i]);
    for (std::size_t seat = 0; seat < st.wins.size(); ++seat) {
      out << seat << ',' << st.wins[seat] << ','
          << fmt_double(st.games_played ? double(st.wins[seat]) / st.games_played : 0.0, 6) << ','
          << st.games_played << ',' << st.stalls << ',' << st.turns_min << ',' << fmt_double(st.turns_median, 1)
          << ',' << fmt_double(st.turns_mean(), 6) << ',' << st.turns_max << ',' << st.turns_total << ','
          << st.hist_bin_width << ',' << hist << ',' << st.penalty_draws << ',' << st.change_plays << ','
          << st.minus_plays << ',' << st.challenges_correct << ',' << st.challenges_incorrect << ','
          << st.scenario_cards_shed << ',' << st.category_switches << ',' << st.reshuffles << ','
          << st.invariant_violations << '\n';
    }
    return out.str();
  }

  for (const auto& r : st.records) out << record_to_json(r).dump() << '\n';
  nlohmann::ordered_json summary = {
      {"type", "summary"},
      {"games_played", st.games_played},
      {"wins", st.wins},
      {"stalls", st.stalls},
      {"stall_rate", st.stall_rate()},
      {"turns_min", st.turns_min},
      {"turns_median", st.turns_median},
      {"turns_mean", st.turns_mean()},
      {"turns_max", st.turns_max},
      {"turns_total", st.turns_total},
      {"hist_bin_width", st.hist_bin_width},
      {"histogram", st.histogram},
      {"penalty_draws", st.penalty_draws},
      {"change_plays", st.change_plays},
      {"minus_plays", st.minus_plays},
      {"challenges_correct", st.challenges_correct},
      {"challenges_incorrect", st.challenges_incorrect},
      {"scenario_cards_shed", st.scenario_cards_shed},
      {"category_switches", st.category_switches},
      {"reshuffles", st.reshuffles},
      {"invariant_violations", st.invariant_violations},
  };
  out << summary.dump() << '\n';
  return out.str();
}

void write_stats_file(const SimStats& stats, StatsFormat format, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  f << export_stats(stats, format);
  if (!f.flush()) throw Error(ErrorCode::kIo, "write failed: " + path);
}

SimStats read_stats(const std::string& document, StatsFormat format) {
  SimStats st;
  std::istringstream in(document);
  std::string line;

  if (format == StatsFormat::kCsv) {
    if (!std::getline(in, line)) throw Error(ErrorCode::kParse, "stats: empty CSV");
    const auto header = split(line, ',');
    if (header.size() != std::size(kCsvColumns) || !std::equal(header.begin(), header.end(), std::begin(kCsvColumns))) {
      throw Error(ErrorCode::kParse, "stats: unexpected CSV header");
    }
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split(line, ',');
      if (f.size() != header.size()) throw Error(ErrorCode::kParse, "stats: wrong column count");
      if (to_int(f[0]) != static_cast<int64_t>(st.wins.size())) throw Error(ErrorCode::kParse, "stats: seats out of order");
      st.wins.push_back(static_cast<int>(to_int(f[1])));
      if (!first) continue;
      first = false;
      st.games_played = static_cast<int>(to_int(f[3]));
      st.stalls = static_cast<int>(to_int(f[4]));
      st.turns_min = static_cast<int>(to_int(f[5]));
      st.turns_median = std::stod(f[6]);
      st.turns_max = static_cast<int>(to_int(f[8]));
      st.turns_total = to_int(f[9]);
      st.hist_bin_width = static_cast<int>(to_int(f[10]));
      for (const auto& b : split(f[11], ';')) st.histogram.push_back(static_cast<int>(to_int(b)));
      st.penalty_draws = to_int(f[12]);
      st.change_plays = to_int(f[13]);
      st.minus_plays = to_int(f[14]);
      st.challenges_correct = to_int(f[15]);
      st.challenges_incorrect = to_int(f[16]);
      st.scenario_cards_shed = to_int(f[17]);
      st.category_switches = to_int(f[18]);
      st.reshuffles = to_int(f[19]);
      st.invariant_violations = to_int(f[20]);
    }
    return st;
  }

  bool have_summary = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "game") {
        st.records.push_back(record_from_json(j));
      } else if (type == "summary") {
        have_summary = true;
        st.games_played = j.at("games_played").get<int>();
        st.wins = j.at("wins").get<std::vector<int>>();
        st.stalls = j.at("stalls").get<int>();
        st.turns_min = j.at("turns_min").get<int>();
        st.turns_median = j.at("turns_median").get<double>();
        st.turns_max = j.at("turns_max").get<int>();
        st.turns_total = j.at("turns_total").get<int64_t>();
        st.hist_bin_width = j.at("hist_bin_width").get<int>();
        st.histogram = j.at("histogram").get<std::vector<int>>();
        st.penalty_draws = j.at("penalty_draws").get<int64_t>();
        st.change_plays = j.at("change_plays").get<int64_t>();
        st.minus_plays = j.at("minus_plays").get<int64_t>();
        st.challenges_correct = j.at("challenges_correct").get<int64_t>();
        st.challenges_incorrect = j.at("challenges_incorrect").get<int64_t>();
        st.scenario_cards_shed = j.at("scenario_cards_shed").get<int64_t>();
        st.category_switches = j.at("category_switches").get<int64_t>();
        st.reshuffles = j.at("reshuffles").get<int64_t>();
        st.invariant_violations = j.at("invariant_violations").get<int64_t>();
      } else {
        throw Error(ErrorCode::kParse, "stats: unknown record type '" + type + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("stats: ") + e.what());
  }
  if (!have_summary) throw Error(ErrorCode::kParse, "stats: missing summary record");
  return st;
}

}  // namespace safecards
