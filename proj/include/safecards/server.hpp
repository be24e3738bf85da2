#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "safecards/codec.hpp"
#include "safecards/engine.hpp"
#include "safecards/policies.hpp"

namespace safecards {

struct SessionConfig {
  Ruleset ruleset = Ruleset::kV1Revised;
  int players = 4;
  int humans = 1;  // seats 0..humans-1 are human; the rest are bots
  std::string bot_policy = "greedy";
  std::string pack = "default";
  std::optional<uint64_t> seed;
  bool strict_precedence = true;
  int hand_size = 7;
  int penalty_draw = 2;
  int turn_cap = 500;
  double tf_accuracy = 0.5;
};

// Parses the POST /v1/sessions body. Unknown keys are rejected. Throws ConfigError.
SessionConfig session_config_from_json(const Json& body);

struct SeatAssignment {
  bool human = false;
  std::string token;   // human seats
  std::string policy;  // bot seats

  friend bool operator==(const SeatAssignment&, const SeatAssignment&) = default;
};

struct SessionInfo {
  std::string id;
  uint64_t seed = 0;
  std::vector<SeatAssignment> seats;
};

struct ManagerOptions {
  std::string data_dir;                 // empty: in-memory only
  std::map<std::string, PackPtr> packs;  // pack id -> pack; "default" is always present
  int bot_delay_ms = 0;
};

// Hosts live sessions. Every public call is safe from any thread; within a
// session, moves are applied one at a time under the session lock.
class SessionManager {
 public:
  explicit SessionManager(ManagerOptions options = {});
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  SessionInfo create_session(const SessionConfig& config);

  // Serialized player_view for the token's seat. Unauthorized / NotFound.
  Json get_view(const std::string& session_id, const std::string& token);
  // Seat-checked view lookup: the token must belong to `seat`.
  Json get_view(const std::string& session_id, const std::string& token, int seat);

  // Applies the move, then autoplays bot seats. Returns
  // {"view": ..., "events": [feed entries], "cursor": next cursor}.
  Json submit_move(const std::string& session_id, const std::string& token, const Json& move);

  // Feed entries with index >= cursor, filtered for the token's seat. Waits up
  // to wait_ms for at least one entry. Returns {"events", "cursor", "finished"}.
  // Entry 0 is the deal summary; entry k > 0 is engine event k - 1.
  Json events(const std::string& session_id, const std::string& token, int64_t cursor, int wait_ms = 0);

  // Unblocks every waiting events() call.
  void shutdown();

  // Diagnostics and tests.
  std::vector<std::string> session_ids() const;
  GameState state(const std::string& session_id) const;
  SessionInfo info(const std::string& session_id) const;
  PackPtr pack(const std::string& id) const;

 private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;
  int authorize(const Session& s, const std::string& token) const;
  void autoplay(Session& s, std::vector<Event>& fresh);
  void load();
  void append_record(const Json& record);

  ManagerOptions options_;
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mutex store_mutex_;
  std::string store_path_;
  bool stopping_ = false;
};

// HTTP+JSON front end over a SessionManager, all routes under /v1.
struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string web_root;  // optional static files
  ManagerOptions manager;
};

class HttpServer {
 public:
  explicit HttpServer(ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and serves on a background thread. Returns the bound port. Throws IoError.
  int start();
  // Starts if needed, then blocks until stop().
  void run();
  void stop();
  int port() const { return port_; }
  SessionManager& manager() { return *manager_; }

 private:
  struct Impl;
  ServerOptions options_;
  std::unique_ptr<SessionManager> manager_;
  std::unique_ptr<Impl> impl_;
  std::thread thread_;
  int port_ = 0;
};

// HTTP status for an error code.
int http_status(ErrorCode code);
Json error_body(const Error& e);

}  // namespace safecards
