#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <atomic>
#include <chrono>
#include <set>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "safecards/server.hpp"

using namespace safecards;
namespace fs = std::filesystem;

namespace {

SessionConfig one_human(uint64_t seed, Ruleset r = Ruleset::kV1Revised) {
  SessionConfig c;
  c.ruleset = r;
  c.seed = seed;
  return c;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int n = 0;
    path = fs::temp_directory_path() / ("safecards-test-" + std::to_string(::getpid()) + "-" + std::to_string(n++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Submits the first legal move until the game ends or `limit` human turns pass.
void play_first_moves(SessionManager& m, const SessionInfo& info, int limit) {
  for (int i = 0; i < limit; ++i) {
    const Json view = m.get_view(info.id, info.seats[0].token);
    if (view["phase"] == "Finished") return;
    REQUIRE(!view["legal_moves"].empty());
    m.submit_move(info.id, info.seats[0].token, view["legal_moves"][0]);
  }
}

}  // namespace

TEST_CASE("session creation assigns one human and three bots") {
  SessionManager m;
  const SessionInfo info = m.create_session(one_human(5));
  REQUIRE(info.seats.size() == 4);
  CHECK(info.seats[0].human);
  CHECK(info.seats[0].token.size() == 32);
  for (int i = 1; i < 4; ++i) {
    CHECK(!info.seats[static_cast<std::size_t>(i)].human);
    CHECK(info.seats[static_cast<std::size_t>(i)].policy == "greedy");
  }
  CHECK(info.seed == 5);
  const Json view = m.get_view(info.id, info.seats[0].token);
  CHECK(view["seat"] == 0);
  CHECK(view["hand"].size() == 7);
  CHECK(view["opponents"].size() == 3);
  CHECK(m.session_ids().size() == 1);
}

TEST_CASE("session configuration errors") {
  SessionManager m;
  SessionConfig c = one_human(1);
  c.players = 7;
  CHECK(code_of([&] { m.create_session(c); }) == ErrorCode::kConfig);
  c = one_human(1);
  c.bot_policy = "oracle";
  CHECK(code_of([&] { m.create_session(c); }) == ErrorCode::kConfig);
  c = one_human(1);
  c.pack = "missing";
  CHECK(code_of([&] { m.create_session(c); }) != ErrorCode::kIo);
  CHECK(code_of([] { session_config_from_json(Json{{"players", 4}, {"colour", "red"}}); }) == ErrorCode::kConfig);
  CHECK(code_of([] { session_config_from_json(Json{{"ruleset", "v9"}}); }) == ErrorCode::kConfig);
  const SessionConfig parsed = session_config_from_json(Json{{"ruleset", "v2"}, {"players", 3}, {"seed", 9}});
  CHECK(parsed.ruleset == Ruleset::kV2);
  CHECK(parsed.players == 3);
  CHECK(parsed.seed == 9u);
}

TEST_CASE("tokens are checked") {
  SessionManager m;
  SessionConfig c = one_human(2);
  c.humans = 2;
  const SessionInfo info = m.create_session(c);
  CHECK(code_of([&] { m.get_view(info.id, "nope"); }) == ErrorCode::kUnauthorized);
  CHECK(code_of([&] { m.get_view("nope", info.seats[0].token); }) == ErrorCode::kNotFound);
  CHECK(code_of([&] { m.get_view(info.id, info.seats[1].token, 0); }) == ErrorCode::kUnauthorized);
  CHECK(m.get_view(info.id, info.seats[1].token, 1)["seat"] == 1);
  const Json any = m.get_view(info.id, info.seats[0].token)["legal_moves"][0];
  CHECK(code_of([&] { m.submit_move(info.id, info.seats[1].token, any); }) == ErrorCode::kNotYourTurn);
  CHECK(code_of([&] { m.submit_move(info.id, "", any); }) == ErrorCode::kUnauthorized);
}

TEST_CASE("illegal submissions carry the rule code and change nothing") {
  SessionManager m;
  const SessionInfo info = m.create_session(one_human(3));
  const GameState before = m.state(info.id);
  REQUIRE(before.phase == Phase::kOpening);
  const Json view = m.get_view(info.id, info.seats[0].token);
  REQUIRE(view["legal_moves"][0]["type"] == "OpeningRun");
  try {
    m.submit_move(info.id, info.seats[0].token, Json{{"type", "DrawPenalty"}});
    FAIL("expected IllegalMove");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIllegalMove);
    CHECK(e.rule_code() == "PRECEDENCE");
    CHECK(http_status(e.code()) == 422);
    CHECK(error_body(e)["rule_code"] == "PRECEDENCE");
  }
  CHECK(m.state(info.id) == before);
  CHECK(code_of([&] { m.submit_move(info.id, info.seats[0].token, Json{{"type", 3}}); }) == ErrorCode::kParse);
}

TEST_CASE("a human move triggers bot turns and a filtered feed") {
  SessionManager m;
  const SessionInfo info = m.create_session(one_human(4));
  const std::string token = info.seats[0].token;
  const Json first = m.get_view(info.id, token)["legal_moves"][0];
  const Json res = m.submit_move(info.id, token, first);
  CHECK(res["view"]["current_seat"] == 0);
  const auto& events = res["events"];
  REQUIRE(!events.empty());
  CHECK(events[0]["index"] == 1);
  CHECK(events[0]["type"] == "CardsPlayed");
  CHECK(events[0]["seat"] == 0);
  CHECK(res["cursor"] == events.back()["index"].get<int>() + 1);
  std::set<int> bot_seats;
  for (const auto& e : events) {
    if (e["type"] == "TurnPassed") continue;
    if (e.contains("seat") && e["seat"] != 0) bot_seats.insert(e["seat"].get<int>());
    if (e["type"] == "PenaltyDrawn" && e["seat"] != 0) CHECK(e["cards"].empty());
  }
  CHECK(bot_seats == std::set<int>{1, 2, 3});
  CHECK(test::leaked_ids(m.state(info.id), 0, res.dump()).empty());
}

TEST_CASE("event cursor replays from any point") {
  SessionManager m;
  const SessionInfo info = m.create_session(one_human(6));
  const std::string token = info.seats[0].token;
  play_first_moves(m, info, 5);
  const Json all = m.events(info.id, token, 0);
  REQUIRE(all["events"].size() >= 2);
  CHECK(all["events"][0]["type"] == "Dealt");
  CHECK(all["events"][0]["hand"].size() == 7);
  CHECK(all["cursor"] == all["events"].size());
  const Json tail = m.events(info.id, token, 3);
  CHECK(tail["events"].size() + 3 == all["events"].size());
  CHECK(tail["events"][0] == all["events"][3]);
  const Json none = m.events(info.id, token, all["cursor"].get<int64_t>(), 0);
  CHECK(none["events"].empty());
  CHECK(code_of([&] { m.events(info.id, token, -1); }) == ErrorCode::kParse);
}

TEST_CASE("a bot-only session plays itself out") {
  SessionManager m;
  SessionConfig c = one_human(8);
  c.humans = 0;
  const SessionInfo info = m.create_session(c);
  const GameState s = m.state(info.id);
  CHECK(s.phase == Phase::kFinished);
  CHECK(check_state(s).empty());
}

TEST_CASE("a human game runs to completion") {
  SessionManager m;
  for (auto r : {Ruleset::kV1Base, Ruleset::kV1Revised, Ruleset::kV2}) {
    const SessionInfo info = m.create_session(one_human(10, r));
    play_first_moves(m, info, 1000);
    const GameState s = m.state(info.id);
    CHECK(s.phase == Phase::kFinished);
    const Json feed = m.events(info.id, info.seats[0].token, 0);
    CHECK(feed["finished"] == true);
  }
}

TEST_CASE("sessions survive a restart") {
  TempDir dir;
  ManagerOptions opts;
  opts.data_dir = dir.path.string();
  SessionInfo info;
  SessionInfo finished;
  GameState state;
  Json feed;
  {
    SessionManager m(opts);
    info = m.create_session(one_human(12, Ruleset::kV2));
    play_first_moves(m, info, 20);
    finished = m.create_session(one_human(13));
    play_first_moves(m, finished, 1000);
    state = m.state(info.id);
    feed = m.events(info.id, info.seats[0].token, 0);
  }
  SessionManager again(opts);
  CHECK(again.session_ids().size() == 2);
  CHECK(again.state(info.id) == state);
  CHECK(again.info(info.id).seats == info.seats);
  CHECK(again.events(info.id, info.seats[0].token, 0) == feed);
  CHECK(again.state(finished.id).phase == Phase::kFinished);
  // Play continues identically after the reload.
  play_first_moves(again, info, 1000);
  CHECK(again.state(info.id).phase == Phase::kFinished);
}

TEST_CASE("a torn final record is ignored on load") {
  TempDir dir;
  ManagerOptions opts;
  opts.data_dir = dir.path.string();
  SessionInfo info;
  {
    SessionManager m(opts);
    info = m.create_session(one_human(14));
    play_first_moves(m, info, 3);
  }
  std::ofstream(dir.path / "sessions.jsonl", std::ios::app) << "{\"type\":\"moves\",\"sess";
  SessionManager again(opts);
  CHECK(again.session_ids() == std::vector<std::string>{info.id});
  CHECK(check_state(again.state(info.id)).empty());
}

TEST_CASE("error codes map to HTTP statuses") {
  CHECK(http_status(ErrorCode::kParse) == 400);
  CHECK(http_status(ErrorCode::kConfig) == 400);
  CHECK(http_status(ErrorCode::kUnauthorized) == 401);
  CHECK(http_status(ErrorCode::kNotFound) == 404);
  CHECK(http_status(ErrorCode::kNotYourTurn) == 409);
  CHECK(http_status(ErrorCode::kWrongPhase) == 409);
  CHECK(http_status(ErrorCode::kIllegalMove) == 422);
  CHECK(http_status(ErrorCode::kIo) == 500);
}

TEST_CASE("a fresh feed holds only the deal summary") {
  SessionManager m;
  SessionConfig c = one_human(15);
  c.humans = 4;
  const SessionInfo info = m.create_session(c);
  const Json feed = m.events(info.id, info.seats[2].token, 0);
  REQUIRE(feed["events"].size() == 1);
  const Json& dealt = feed["events"][0];
  CHECK(dealt["type"] == "Dealt");
  CHECK(dealt["seat"] == 2);
  CHECK(dealt["hand_sizes"] == Json::array({7, 7, 7, 7}));
  CHECK(test::leaked_ids(m.state(info.id), 2, feed.dump()).empty());
}

TEST_CASE("concurrent submissions are linearized") {
  SessionManager m;
  SessionConfig c = one_human(16);
  c.humans = 4;
  const SessionInfo info = m.create_session(c);
  const Json move = m.get_view(info.id, info.seats[0].token)["legal_moves"][0];
  std::atomic<int> accepted{0}, rejected{0};
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] {
      try {
        m.submit_move(info.id, info.seats[0].token, move);
        ++accepted;
      } catch (const Error& e) {
        if (e.code() == ErrorCode::kIllegalMove || e.code() == ErrorCode::kNotYourTurn) ++rejected;
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(accepted == 1);
  CHECK(rejected == 7);
  const GameState s = m.state(info.id);
  CHECK(s.turn_index == 1);
  CHECK(check_state(s).empty());
}

TEST_CASE("HTTP routes, status codes and the event stream") {
  ServerOptions opts;
  opts.port = 0;
  HttpServer server(opts);
  const int port = server.start();
  httplib::Client cli("127.0.0.1", port);

  auto bad = cli.Post("/v1/sessions", R"({"players": 7})", "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(Json::parse(bad->body)["code"] == "ConfigError");
  CHECK(cli.Post("/v1/sessions", "{oops", "application/json")->status == 400);

  auto created = cli.Post("/v1/sessions", R"({"humans": 0, "seed": 3, "ruleset": "v2"})", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const Json info = Json::parse(created->body);
  const std::string id = info["session_id"];
  CHECK(cli.Get("/v1/sessions/" + id + "/view")->status == 401);
  CHECK(cli.Get("/v1/sessions/nope/view?token=x")->status == 404);

  // The stream authorizes before switching to event-stream mode.
  auto sse = cli.Get("/v1/sessions/" + id + "/events?stream=sse&token=");
  REQUIRE(sse);
  CHECK(sse->status == 401);

  SessionConfig human = one_human(21);
  const SessionInfo live = server.manager().create_session(human);
  const std::string token = live.seats[0].token;
  auto view = cli.Get("/v1/sessions/" + live.id + "/view", {{"Authorization", "Bearer " + token}});
  REQUIRE(view);
  CHECK(view->status == 200);
  const Json move = Json::parse(view->body)["legal_moves"][0];
  auto posted = cli.Post("/v1/sessions/" + live.id + "/moves", {{"Authorization", "Bearer " + token}},
                         Json{{"move", move}}.dump(), "application/json");
  REQUIRE(posted);
  CHECK(posted->status == 200);
  const int64_t cursor = Json::parse(posted->body)["cursor"];
  auto again = cli.Post("/v1/sessions/" + live.id + "/moves", {{"Authorization", "Bearer " + token}},
                        Json{{"move", move}}.dump(), "application/json");
  CHECK((again->status == 422 || again->status == 409));

  auto poll = cli.Get("/v1/sessions/" + live.id + "/events?cursor=1&wait_ms=10&token=" + token);
  REQUIRE(poll);
  const Json page = Json::parse(poll->body);
  CHECK(page["cursor"] == cursor);
  CHECK(page["events"][0]["index"] == 1);

  // SSE from cursor 0 until the first keepalive-free batch arrives.
  std::string received;
  httplib::Client stream("127.0.0.1", port);
  stream.set_read_timeout(5, 0);
  std::thread closer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(500));
    server.stop();
  });
  stream.Get("/v1/sessions/" + live.id + "/events?cursor=0&token=" + token, {{"Accept", "text/event-stream"}},
             [&](const char* data, size_t len) {
               received.append(data, len);
               return received.find("id: " + std::to_string(cursor - 1) + "\n") == std::string::npos;
             });
  closer.join();
  CHECK(received.rfind("id: 0\nevent: game\ndata: ", 0) == 0);
  CHECK(received.find("\"type\":\"Dealt\"") != std::string::npos);
  CHECK(received.find("id: " + std::to_string(cursor - 1) + "\n") != std::string::npos);
}
