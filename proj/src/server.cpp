#include "safecards/server.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <set>

#include "safecards/view.hpp"

namespace safecards {

namespace {

constexpr int kSnapshotEvery = 16;  // move batches between snapshots

std::string random_hex(int bytes) {
  static thread_local std::random_device rd;
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (int i = 0; i < bytes; ++i) {
    const auto b = rd() & 0xFF;
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xF]);
  }
  return out;
}

uint64_t random_seed() {
  std::random_device rd;
  return (uint64_t(rd()) << 32) ^ rd();
}

std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json config_to_json(const SessionConfig& c) {
  Json j = {{"ruleset", ruleset_name(c.ruleset)}, {"players", c.players},
            {"humans", c.humans},                 {"bot_policy", c.bot_policy},
            {"pack", c.pack},                     {"strict_precedence", c.strict_precedence},
            {"hand_size", c.hand_size},           {"penalty_draw", c.penalty_draw},
            {"turn_cap", c.turn_cap},             {"tf_accuracy", c.tf_accuracy}};
  j["seed"] = c.seed ? Json(*c.seed) : Json(nullptr);
  return j;
}

}  // namespace

SessionConfig session_config_from_json(const Json& body) {
  if (!body.is_object()) throw Error(ErrorCode::kConfig, "session config must be a JSON object");
  static const std::set<std::string> known = {"ruleset",   "players",      "humans",    "bot_policy",
                                              "pack",      "seed",         "strict_precedence",
                                              "hand_size", "penalty_draw", "turn_cap",  "tf_accuracy"};
  for (const auto& [key, _] : body.items()) {
    if (!known.count(key)) throw Error(ErrorCode::kConfig, "unknown session option '" + key + "'");
  }
  SessionConfig c;
  try {
    if (body.contains("ruleset")) {
      const auto name = body["ruleset"].get<std::string>();
      const auto r = parse_ruleset(name);
      if (!r) throw Error(ErrorCode::kConfig, "unknown ruleset '" + name + "'");
      c.ruleset = *r;
    }
    if (body.contains("players")) c.players = body["players"].get<int>();
    if (body.contains("humans")) c.humans = body["humans"].get<int>();
    if (body.contains("bot_policy")) c.bot_policy = body["bot_policy"].get<std::string>();
    if (body.contains("pack")) c.pack = body["pack"].get<std::string>();
    if (body.contains("seed") && !body["seed"].is_null()) c.seed = body["seed"].get<uint64_t>();
    if (body.contains("strict_precedence")) c.strict_precedence = body["strict_precedence"].get<bool>();
    if (body.contains("hand_size")) c.hand_size = body["hand_size"].get<int>();
    if (body.contains("penalty_draw")) c.penalty_draw = body["penalty_draw"].get<int>();
    if (body.contains("turn_cap")) c.turn_cap = body["turn_cap"].get<int>();
    if (body.contains("tf_accuracy")) c.tf_accuracy = body["tf_accuracy"].get<double>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("bad session option: ") + e.what());
  }
  return c;
}

struct SessionManager::Session {
  std::string id;
  SessionConfig config;
  uint64_t seed = 0;
  std::vector<SeatAssignment> seats;
  std::vector<std::unique_ptr<Policy>> bots;  // null for human seats
  GameState initial;
  GameState state;
  std::vector<Event> log;
  Pcg32 bot_rng;
  std::string created;
  std::string updated;
  int batches = 0;
  mutable std::mutex mu;
  std::condition_variable cv;

  int64_t feed_size() const { return static_cast<int64_t>(log.size()) + 1; }

  Json deal_entry(int viewer) const {
    Json hand = Json::array();
    if (viewer >= 0) {
      for (CardIndex c : initial.hands[static_cast<std::size_t>(viewer)]) {
        hand.push_back(card_visible_to(state, viewer, c) ? Json(state.card(c).id) : Json(nullptr));
      }
    }
    Json sizes = Json::array();
    for (const auto& h : initial.hands) sizes.push_back(h.size());
    return {{"index", 0},
            {"type", "Dealt"},
            {"seat", viewer},
            {"hand", std::move(hand)},
            {"hand_sizes", std::move(sizes)},
            {"draw_pile_size", initial.draw_pile.size()},
            {"challenge_pile_size", initial.challenge_pile.size()},
            {"first_seat", initial.current_seat}};
  }

  Json feed_entry(int64_t index, int viewer) const {
    if (index == 0) return deal_entry(viewer);
    Json j = event_to_json(filter_event(log[static_cast<std::size_t>(index - 1)], viewer, state), *state.deck,
                           state.pack());
    j["index"] = index;
    return j;
  }

  Json feed(int64_t from, int viewer) const {
    Json out = Json::array();
    for (int64_t i = std::max<int64_t>(from, 0); i < feed_size(); ++i) out.push_back(feed_entry(i, viewer));
    return out;
  }

  void commit(const Transition& t) {
    log.insert(log.end(), t.events.begin(), t.events.end());
    state = t.state;
    updated = now_iso();
    cv.notify_all();
  }
};

SessionManager::SessionManager(ManagerOptions options) : options_(std::move(options)) {
  if (!options_.packs.count("default")) options_.packs["default"] = default_pack_ptr();
  if (!options_.data_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options_.data_dir, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot create data directory " + options_.data_dir + ": " + ec.message());
    store_path_ = (std::filesystem::path(options_.data_dir) / "sessions.jsonl").string();
    load();
  }
}

SessionManager::~SessionManager() { shutdown(); }

void SessionManager::shutdown() {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(sessions_mutex_);
    stopping_ = true;
    for (auto& [_, s] : sessions_) all.push_back(s);
  }
  for (auto& s : all) {
    std::lock_guard lock(s->mu);
    s->cv.notify_all();
  }
}

PackPtr SessionManager::pack(const std::string& id) const {
  const auto it = options_.packs.find(id);
  if (it == options_.packs.end()) throw Error(ErrorCode::kConfig, "unknown pack '" + id + "'");
  return it->second;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "no session '" + id + "'");
  return it->second;
}

int SessionManager::authorize(const Session& s, const std::string& token) const {
  if (!token.empty()) {
    for (std::size_t i = 0; i < s.seats.size(); ++i) {
      if (s.seats[i].human && s.seats[i].token == token) return static_cast<int>(i);
    }
  }
  throw Error(ErrorCode::kUnauthorized, "token does not belong to this session");
}

void SessionManager::append_record(const Json& record) {
  if (store_path_.empty()) return;
  std::lock_guard lock(store_mutex_);
  std::ofstream f(store_path_, std::ios::app | std::ios::binary);
  f << record.dump() << '\n';
  f.flush();
  if (!f) throw Error(ErrorCode::kIo, "cannot append to " + store_path_);
}

SessionInfo SessionManager::create_session(const SessionConfig& config) {
  if (config.humans < 0 || config.humans > config.players) {
    throw Error(ErrorCode::kConfig, "humans must be between 0 and players");
  }
  auto s = std::make_shared<Session>();
  s->config = config;
  s->seed = config.seed ? *config.seed : random_seed();
  s->config.seed = s->seed;

  GameConfig gc;
  gc.ruleset = config.ruleset;
  gc.player_count = config.players;
  gc.hand_size = config.hand_size;
  gc.penalty_draw = config.penalty_draw;
  gc.strict_precedence = config.strict_precedence;
  gc.turn_cap = config.turn_cap;
  gc.pack = pack(config.pack);
  gc.seed = s->seed;
  s->initial = new_game(gc);  // validates the rest of the config
  s->state = s->initial;
  s->bot_rng = Pcg32(s->seed, 2);

  for (int i = 0; i < config.players; ++i) {
    SeatAssignment seat;
    if (i < config.humans) {
      seat.human = true;
      seat.token = random_hex(16);
      s->bots.push_back(nullptr);
    } else {
      seat.policy = config.bot_policy;
      s->bots.push_back(make_policy(config.bot_policy, config.tf_accuracy));
    }
    s->seats.push_back(std::move(seat));
  }
  s->created = s->updated = now_iso();

  std::unique_lock lock(s->mu);
  {
    std::lock_guard map_lock(sessions_mutex_);
    do {
      s->id = random_hex(12);
    } while (sessions_.count(s->id));
    sessions_[s->id] = s;
  }

  Json seats = Json::array();
  for (const auto& seat : s->seats) {
    seats.push_back(seat.human ? Json{{"human", true}, {"token", seat.token}}
                               : Json{{"human", false}, {"policy", seat.policy}});
  }
  append_record({{"type", "create"},
                 {"session", s->id},
                 {"at", s->created},
                 {"config", config_to_json(s->config)},
                 {"seats", seats},
                 {"state", state_to_json(s->initial)}});

  std::vector<Event> fresh;
  autoplay(*s, fresh);
  return {s->id, s->seed, s->seats};
}

// Plays bot seats until a human seat is on turn or the game ends, then
// records the batch. Called with the session lock held.
void SessionManager::autoplay(Session& s, std::vector<Event>& fresh) {
  Json moves = Json::array();
  while (s.state.phase != Phase::kFinished && !s.seats[static_cast<std::size_t>(s.state.current_seat)].human) {
    if (options_.bot_delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(options_.bot_delay_ms));
    const int seat = s.state.current_seat;
    const PlayerView view = player_view(s.state, seat);
    const Move move = s.bots[static_cast<std::size_t>(seat)]->choose(view, view.legal_moves, s.bot_rng);
    Transition t = apply_move(s.state, seat, move);
    moves.push_back({{"seat", seat}, {"move", move_to_json(move, *s.state.deck, s.state.pack())}});
    fresh.insert(fresh.end(), t.events.begin(), t.events.end());
    s.commit(t);
  }
  if (!moves.empty()) {
    append_record({{"type", "moves"},
                   {"session", s.id},
                   {"at", s.updated},
                   {"moves", std::move(moves)},
                   {"bot_rng", s.bot_rng.to_hex()}});
  }
  ++s.batches;
  if (s.batches % kSnapshotEvery == 0 || s.state.phase == Phase::kFinished) {
    append_record({{"type", "snapshot"},
                   {"session", s.id},
                   {"at", s.updated},
                   {"events", s.log.size()},
                   {"state", state_to_json(s.state)}});
  }
}

Json SessionManager::get_view(const std::string& session_id, const std::string& token) {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  const int seat = authorize(*s, token);
  Json v = view_to_json(player_view(s->state, seat));
  v["session_id"] = s->id;
  return v;
}

Json SessionManager::get_view(const std::string& session_id, const std::string& token, int seat) {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  if (authorize(*s, token) != seat) throw Error(ErrorCode::kUnauthorized, "token does not belong to seat " + std::to_string(seat));
  Json v = view_to_json(player_view(s->state, seat));
  v["session_id"] = s->id;
  return v;
}

Json SessionManager::submit_move(const std::string& session_id, const std::string& token, const Json& move_doc) {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  const int seat = authorize(*s, token);
  const int64_t cursor = s->feed_size();
  const Move move = move_from_json(move_doc, *s->state.deck, s->state.pack());
  Transition t = apply_move(s->state, seat, move);
  std::vector<Event> fresh = t.events;
  s->commit(t);
  append_record({{"type", "moves"},
                 {"session", s->id},
                 {"at", s->updated},
                 {"moves", Json::array({{{"seat", seat}, {"move", move_to_json(move, *s->state.deck, s->state.pack())}}})},
                 {"bot_rng", s->bot_rng.to_hex()}});
  autoplay(*s, fresh);

  Json view = view_to_json(player_view(s->state, seat));
  view["session_id"] = s->id;
  return {{"view", std::move(view)}, {"events", s->feed(cursor, seat)}, {"cursor", s->feed_size()}};
}

Json SessionManager::events(const std::string& session_id, const std::string& token, int64_t cursor, int wait_ms) {
  if (cursor < 0) throw Error(ErrorCode::kParse, "cursor must be non-negative");
  auto s = find(session_id);
  std::unique_lock lock(s->mu);
  const int seat = authorize(*s, token);
  if (wait_ms > 0) {
    s->cv.wait_for(lock, std::chrono::milliseconds(wait_ms), [&] {
      std::lock_guard map_lock(sessions_mutex_);
      return stopping_ || cursor < s->feed_size() || s->state.phase == Phase::kFinished;
    });
  }
  return {{"events", s->feed(cursor, seat)},
          {"cursor", std::max(cursor, s->feed_size())},
          {"finished", s->state.phase == Phase::kFinished}};
}

std::vector<std::string> SessionManager::session_ids() const {
  std::lock_guard lock(sessions_mutex_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

GameState SessionManager::state(const std::string& session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  return s->state;
}

SessionInfo SessionManager::info(const std::string& session_id) const {
  auto s = find(session_id);
  std::lock_guard lock(s->mu);
  return {s->id, s->seed, s->seats};
}

// Rebuilds sessions from the store: each session starts from its recorded
// initial state and re-applies its logged moves; snapshots are cross-checked.
void SessionManager::load() {
  std::ifstream f(store_path_, std::ios::binary);
  if (!f) return;
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json rec;
    try {
      rec = Json::parse(line);
    } catch (const Json::exception&) {
      if (f.peek() == std::char_traits<char>::eof()) {
        std::cerr << "store: ignoring torn final record at line " << line_no << "\n";
        break;
      }
      throw Error(ErrorCode::kParse, store_path_ + ":" + std::to_string(line_no) + ": malformed record");
    }
    try {
      const auto type = rec.at("type").get<std::string>();
      const auto id = rec.at("session").get<std::string>();
      if (type == "create") {
        auto s = std::make_shared<Session>();
        s->id = id;
        const auto& c = rec.at("config");
        Json summary = c;
        summary.erase("seed");
        s->config = session_config_from_json(summary);
        s->seed = c.at("seed").get<uint64_t>();
        s->config.seed = s->seed;
        s->initial = state_from_json(rec.at("state"));
        s->state = s->initial;
        s->bot_rng = Pcg32(s->seed, 2);
        for (const auto& seat : rec.at("seats")) {
          SeatAssignment a;
          a.human = seat.at("human").get<bool>();
          if (a.human) {
            a.token = seat.at("token").get<std::string>();
            s->bots.push_back(nullptr);
          } else {
            a.policy = seat.at("policy").get<std::string>();
            s->bots.push_back(make_policy(a.policy, s->config.tf_accuracy));
          }
          s->seats.push_back(std::move(a));
        }
        s->created = s->updated = rec.at("at").get<std::string>();
        sessions_[id] = s;
        continue;
      }
      const auto it = sessions_.find(id);
      if (it == sessions_.end()) throw Error(ErrorCode::kParse, "record for unknown session " + id);
      Session& s = *it->second;
      if (type == "moves") {
        for (const auto& entry : rec.at("moves")) {
          const int seat = entry.at("seat").get<int>();
          const Move m = move_from_json(entry.at("move"), *s.state.deck, s.state.pack());
          s.commit(apply_move(s.state, seat, m));
        }
        s.bot_rng = Pcg32::from_hex(rec.at("bot_rng").get<std::string>());
        s.updated = rec.at("at").get<std::string>();
      } else if (type == "snapshot") {
        if (!(state_from_json(rec.at("state")) == s.state) || rec.at("events").get<std::size_t>() != s.log.size()) {
          throw Error(ErrorCode::kReplayMismatch, "session " + id + " diverges from its snapshot");
        }
      } else {
        throw Error(ErrorCode::kParse, "unknown record type '" + type + "'");
      }
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::kParse, store_path_ + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  // A crash between a human move and the bot replies leaves a bot on turn.
  for (auto& [_, s] : sessions_) {
    std::lock_guard lock(s->mu);
    const auto& st = s->state;
    if (st.phase != Phase::kFinished && !s->seats[static_cast<std::size_t>(st.current_seat)].human) {
      std::vector<Event> fresh;
      autoplay(*s, fresh);
    }
  }
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kSchema:
    case ErrorCode::kValidation:
    case ErrorCode::kVersion:
    case ErrorCode::kConfig:
    case ErrorCode::kPackRulesetMismatch:
      return 400;
    case ErrorCode::kUnauthorized:
      return 401;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kNotYourTurn:
    case ErrorCode::kWrongPhase:
      return 409;
    case ErrorCode::kIllegalMove:
      return 422;
    case ErrorCode::kEmptyMoveSet:
    case ErrorCode::kReplayMismatch:
    case ErrorCode::kIo:
      return 500;
  }
  return 500;
}

Json error_body(const Error& e) {
  Json j = {{"code", error_code_name(e.code())}, {"message", e.what()}};
  if (!e.rule_code().empty()) j["rule_code"] = e.rule_code();
  return j;
}

}  // namespace safecards
