// Operator entry point: validate packs, deal, simulate, record and replay
// transcripts, serve the HTTP API.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "safecards/codec.hpp"
#include "safecards/server.hpp"
#include "safecards/simulator.hpp"
#include "safecards/transcript.hpp"

using namespace safecards;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

const std::map<std::string, Ruleset> kRulesets = {
    {"v1-base", Ruleset::kV1Base}, {"v1-revised", Ruleset::kV1Revised}, {"v2", Ruleset::kV2}};

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f || !(f << text) || !f.flush()) throw Error(ErrorCode::kIo, "cannot write " + path);
}

PackPtr load_pack_arg(const std::string& path) {
  if (path.empty()) return default_pack_ptr();
  return std::make_shared<const ContentPack>(load_pack_file(path));
}

// Shared game options for deal / simulate / record.
struct GameOptions {
  std::string ruleset = "v1-base";
  int players = 4;
  int hand_size = 7;
  int penalty_draw = 2;
  int turn_cap = 500;
  bool no_strict = false;
  std::string pack;

  void add_to(CLI::App* app) {
    app->add_option("--ruleset", ruleset, "v1-base, v1-revised or v2")
        ->check(CLI::IsMember({"v1-base", "v1-revised", "v2"}))
        ->capture_default_str();
    app->add_option("--players", players, "Seats (2-6)")->check(CLI::Range(2, 6))->capture_default_str();
    app->add_option("--hand-size", hand_size)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_option("--penalty-draw", penalty_draw)->check(CLI::NonNegativeNumber)->capture_default_str();
    app->add_option("--turn-cap", turn_cap)->check(CLI::PositiveNumber)->capture_default_str();
    app->add_flag("--no-strict", no_strict, "Offer every move class regardless of precedence");
    app->add_option("--pack", pack, "Content pack JSON (default: embedded pack)");
  }

  GameConfig config(uint64_t seed) const {
    GameConfig c;
    c.ruleset = kRulesets.at(ruleset);
    c.player_count = players;
    c.hand_size = hand_size;
    c.penalty_draw = penalty_draw;
    c.turn_cap = turn_cap;
    c.strict_precedence = !no_strict;
    c.pack = load_pack_arg(pack);
    c.seed = seed;
    return c;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

int cmd_validate(const std::string& path, bool lenient) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const auto result = load_pack_with_warnings(text, {lenient});
    for (const auto& w : result.warnings) std::cout << "WARNING " << w << "\n";
    std::cout << "OK " << path << ": " << result.pack.categories.size() << " categories, "
              << result.pack.advice.size() << " advice, " << result.pack.misconceptions.size() << " misconceptions, "
              << result.pack.change_cards.size() << " change cards, " << result.pack.challenges.size()
              << " challenges\n";
    return kExitOk;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kValidation) {
      for (const auto& v : e.violations()) std::cout << v.code << " " << v.path << ": " << v.message << "\n";
      return kExitFailure;
    }
    // Readable but not a usable pack document.
    std::cout << error_code_name(e.code()) << " " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_deal(const GameOptions& opts, uint64_t seed, bool list_deck, bool as_json) {
  const GameState s = new_game(opts.config(seed));
  if (as_json) {
    std::cout << state_to_json(s).dump(2) << "\n";
    return kExitOk;
  }
  const Deck& deck = *s.deck;
  if (list_deck) {
    for (const auto& c : deck.cards) std::cout << c.id << "\t" << card_kind_name(c.kind) << "\n";
    std::cout << "\n";
  }
  int counts[5] = {};
  for (const auto& c : deck.cards) ++counts[static_cast<int>(c.kind)];
  std::cout << "deck: " << deck.cards.size() << " cards (" << counts[0] << " numbered, " << counts[1] << " minus, "
            << counts[2] << " change, " << counts[3] << " true/false, " << counts[4] << " scenario)\n";
  std::cout << "ruleset " << ruleset_name(s.config.ruleset) << ", seed " << seed << "\n";
  for (std::size_t seat = 0; seat < s.hands.size(); ++seat) {
    std::cout << "seat " << seat << ":";
    for (CardIndex c : s.hands[seat]) std::cout << " " << s.card(c).id;
    std::cout << "\n";
  }
  std::cout << "draw pile: " << s.draw_pile.size() << " cards";
  if (!s.challenge_pile.empty()) std::cout << ", challenge pile: " << s.challenge_pile.size() << " cards";
  std::cout << "\n";
  return kExitOk;
}

int cmd_simulate(const GameOptions& opts, int games, const std::string& policies, uint64_t seed,
                 const std::string& out, const std::string& format, int threads, double tf_accuracy) {
  SimConfig sim;
  sim.games = games;
  sim.base = opts.config(0);
  sim.policies = split_list(policies);
  sim.master_seed = seed;
  sim.parallelism = threads;
  sim.tf_accuracy = tf_accuracy;
  const SimStats st = run_simulation(sim);
  const StatsFormat fmt = format == "jsonl" ? StatsFormat::kJsonl : StatsFormat::kCsv;
  if (out.empty()) {
    std::cout << export_stats(st, fmt);
  } else {
    write_stats_file(st, fmt, out);
  }
  std::string wins;
  for (std::size_t i = 0; i < st.wins.size(); ++i) wins += (i ? "/" : "") + std::to_string(st.wins[i]);
  char line[256];
  std::snprintf(line, sizeof line, "%d games, wins %s, stalls %d (%.2f%%), turns mean %.2f median %.1f", st.games_played,
                wins.c_str(), st.stalls, 100.0 * st.stall_rate(), st.turns_mean(), st.turns_median);
  (out.empty() ? std::cerr : std::cout) << line << "\n";
  return kExitOk;
}

int cmd_record(const GameOptions& opts, uint64_t seed, const std::string& policies, double tf_accuracy,
               const std::string& out) {
  const GameRun run = play_game(opts.config(seed), split_list(policies), tf_accuracy);
  const std::string text = write_transcript(run.initial, run.events, run.final_state);
  if (out.empty()) {
    std::cout << text;
  } else {
    write_file(out, text);
    std::cout << run.events.size() << " events, " << outcome_text(is_terminal(run.final_state)) << "\n";
  }
  return kExitOk;
}

int cmd_replay(const std::string& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    const ReplayResult r = replay_transcript(text);
    std::cout << "events: " << r.events.size() << "\n";
    std::cout << "outcome: " << outcome_text(r.outcome) << "\n";
    std::cout << "turn: " << r.final_state.turn_index << "\n";
    std::cout << "hand sizes:";
    for (std::size_t i = 0; i < r.final_state.hands.size(); ++i) {
      std::cout << " " << i << "=" << r.final_state.hands[i].size();
    }
    std::cout << "\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << error_code_name(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::kReplayMismatch ? kExitFailure : kExitUsage;
  }
}

int cmd_serve(ServerOptions options, const std::string& pack_path) {
  if (!pack_path.empty()) options.manager.packs["default"] = load_pack_arg(pack_path);
  options.manager.packs.emplace("five-category-example",
                                std::make_shared<const ContentPack>(five_category_pack()));
  HttpServer server(std::move(options));
  const int port = server.start();
  std::cout << "listening on port " << port << std::endl;
  server.run();
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Card game engine, simulator and server"};
  app.require_subcommand(1);

  auto* validate = app.add_subcommand("validate", "Check a content pack; one violation per line");
  std::string validate_path;
  bool lenient = false;
  validate->add_option("pack", validate_path, "Pack JSON file")->required();
  validate->add_flag("--lenient", lenient, "Report unknown keys as warnings");

  auto* deal = app.add_subcommand("deal", "Build the deck and show the opening deal");
  GameOptions deal_opts;
  deal_opts.add_to(deal);
  uint64_t deal_seed = 0;
  bool list_deck = false;
  bool deal_json = false;
  deal->add_option("--seed", deal_seed)->capture_default_str();
  deal->add_flag("--list-deck", list_deck, "Print every card id");
  deal->add_flag("--json", deal_json, "Print the serialized initial state");

  auto* simulate = app.add_subcommand("simulate", "Run seeded bot games and export statistics");
  GameOptions sim_opts;
  sim_opts.add_to(simulate);
  int games = 1000;
  std::string sim_policy = "random";
  uint64_t sim_seed = 0;
  std::string sim_out;
  std::string sim_format = "csv";
  int threads = 1;
  double tf_accuracy = 0.5;
  simulate->add_option("--games", games)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--policy", sim_policy, "Policy name, or one per seat separated by commas")
      ->capture_default_str();
  simulate->add_option("--seed", sim_seed, "Master seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output file (default: standard output)");
  simulate->add_option("--format", sim_format)->check(CLI::IsMember({"csv", "jsonl"}))->capture_default_str();
  simulate->add_option("--threads", threads)->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--tf-accuracy", tf_accuracy)->check(CLI::Range(0.0, 1.0))->capture_default_str();

  auto* record = app.add_subcommand("record", "Play one bot game and write its transcript");
  GameOptions rec_opts;
  rec_opts.add_to(record);
  uint64_t rec_seed = 0;
  std::string rec_policy = "random";
  std::string rec_out;
  double rec_tf = 0.5;
  record->add_option("--seed", rec_seed)->capture_default_str();
  record->add_option("--policy", rec_policy)->capture_default_str();
  record->add_option("--tf-accuracy", rec_tf)->check(CLI::Range(0.0, 1.0))->capture_default_str();
  record->add_option("--out", rec_out, "Transcript file (default: standard output)");

  auto* replay = app.add_subcommand("replay", "Replay a transcript and verify its final state");
  std::string replay_path;
  replay->add_option("transcript", replay_path)->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  ServerOptions server_opts;
  std::string serve_pack;
  serve->add_option("--host", server_opts.host)->envname("SAFECARDS_HOST")->capture_default_str();
  serve->add_option("--port", server_opts.port)->envname("SAFECARDS_PORT")->capture_default_str();
  serve->add_option("--data-dir", server_opts.manager.data_dir, "Session store directory")
      ->envname("SAFECARDS_DATA_DIR");
  serve->add_option("--pack", serve_pack, "Default content pack")->envname("SAFECARDS_PACK");
  serve->add_option("--bot-delay-ms", server_opts.manager.bot_delay_ms)
      ->envname("SAFECARDS_BOT_DELAY_MS")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  serve->add_option("--web-root", server_opts.web_root, "Static files to serve at /")->envname("SAFECARDS_WEB_ROOT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*validate) return cmd_validate(validate_path, lenient);
    if (*deal) return cmd_deal(deal_opts, deal_seed, list_deck, deal_json);
    if (*simulate) {
      return cmd_simulate(sim_opts, games, sim_policy, sim_seed, sim_out, sim_format, threads, tf_accuracy);
    }
    if (*record) return cmd_record(rec_opts, rec_seed, rec_policy, rec_tf, rec_out);
    if (*replay) return cmd_replay(replay_path);
    if (*serve) return cmd_serve(server_opts, serve_pack);
  } catch (const Error& e) {
    std::cerr << error_code_name(e.code()) << ": " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  " << v.code << " " << v.path << ": " << v.message << "\n";
    return e.code() == ErrorCode::kReplayMismatch || e.code() == ErrorCode::kValidation ? kExitFailure : kExitUsage;
  }
  return kExitUsage;
}
