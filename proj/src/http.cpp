#include <atomic>
#include <chrono>

#include "httplib.h"
#include "safecards/server.hpp"

namespace safecards {

namespace {

constexpr int kSseIdleMs = 15000;  // keepalive interval on the event stream
constexpr int kMaxWaitMs = 60000;

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) { send_json(res, http_status(e.code()), error_body(e)); }

std::string bearer_token(const httplib::Request& req) {
  const auto auth = req.get_header_value("Authorization");
  constexpr std::string_view prefix = "Bearer ";
  if (auth.size() > prefix.size() && auth.compare(0, prefix.size(), prefix) == 0) return auth.substr(prefix.size());
  // EventSource cannot set headers, so the stream also accepts ?token=.
  if (req.has_param("token")) return req.get_param_value("token");
  return {};
}

int64_t int_param(const httplib::Request& req, const char* name, int64_t fallback) {
  if (!req.has_param(name)) return fallback;
  const auto text = req.get_param_value(name);
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kParse, std::string("query parameter '") + name + "' must be an integer");
}

Json parse_body(const httplib::Request& req) {
  try {
    return req.body.empty() ? Json::object() : Json::parse(req.body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("request body is not JSON: ") + e.what());
  }
}

template <typename F>
auto guarded(F handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const Error& e) {
      send_error(res, e);
    } catch (const std::exception& e) {
      send_json(res, 500, {{"code", "InternalError"}, {"message", e.what()}});
    }
  };
}

}  // namespace

struct HttpServer::Impl {
  httplib::Server http;
  std::atomic<bool> stopping{false};
};

HttpServer::HttpServer(ServerOptions options)
    : options_(std::move(options)),
      manager_(std::make_unique<SessionManager>(options_.manager)),
      impl_(std::make_unique<Impl>()) {
  auto& http = impl_->http;
  SessionManager& mgr = *manager_;
  std::atomic<bool>& stopping = impl_->stopping;

  http.Get("/v1/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, {{"status", "ok"}});
  });

  http.Post("/v1/sessions", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
              const SessionInfo info = mgr.create_session(session_config_from_json(parse_body(req)));
              Json seats = Json::array();
              for (std::size_t i = 0; i < info.seats.size(); ++i) {
                const auto& s = info.seats[i];
                seats.push_back(s.human ? Json{{"seat", i}, {"type", "human"}, {"token", s.token}}
                                        : Json{{"seat", i}, {"type", "bot"}, {"policy", s.policy}});
              }
              send_json(res, 201, {{"session_id", info.id}, {"seed", info.seed}, {"seats", std::move(seats)}});
            }));

  http.Get(R"(/v1/sessions/([^/]+)/view)", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             const auto token = bearer_token(req);
             if (req.has_param("seat")) {
               send_json(res, 200, mgr.get_view(id, token, static_cast<int>(int_param(req, "seat", 0))));
             } else {
               send_json(res, 200, mgr.get_view(id, token));
             }
           }));

  http.Post(R"(/v1/sessions/([^/]+)/moves)", guarded([&mgr](const httplib::Request& req, httplib::Response& res) {
              Json body = parse_body(req);
              // Accept either {"move": {...}} or the move object itself.
              const Json move = body.contains("move") ? body["move"] : body;
              send_json(res, 200, mgr.submit_move(req.matches[1], bearer_token(req), move));
            }));

  http.Get(R"(/v1/sessions/([^/]+)/events)",
           guarded([&mgr, &stopping](const httplib::Request& req, httplib::Response& res) {
             const std::string id = req.matches[1];
             const auto token = bearer_token(req);
             int64_t cursor = int_param(req, "cursor", 0);
             if (req.has_header("Last-Event-ID")) {
               try {
                 cursor = std::stoll(req.get_header_value("Last-Event-ID")) + 1;
               } catch (const std::exception&) {
                 throw Error(ErrorCode::kParse, "Last-Event-ID must be an integer");
               }
             }
             const bool sse = req.get_header_value("Accept").find("text/event-stream") != std::string::npos ||
                              req.get_param_value("stream") == "sse";
             if (!sse) {
               const int wait = static_cast<int>(std::clamp<int64_t>(int_param(req, "wait_ms", 0), 0, kMaxWaitMs));
               send_json(res, 200, mgr.events(id, token, cursor, wait));
               return;
             }
             // Authorize before switching to streaming so errors get a JSON body.
             mgr.events(id, token, cursor, 0);
             res.set_header("Cache-Control", "no-cache");
             res.set_chunked_content_provider(
                 "text/event-stream", [&mgr, &stopping, id, token, cursor](size_t, httplib::DataSink& sink) mutable {
                   while (!stopping) {
                     Json page;
                     try {
                       page = mgr.events(id, token, cursor, kSseIdleMs);
                     } catch (const Error&) {
                       sink.done();
                       return true;
                     }
                     std::string chunk;
                     for (const auto& e : page["events"]) {
                       chunk += "id: " + e["index"].dump() + "\nevent: game\ndata: " + e.dump() + "\n\n";
                     }
                     cursor = page["cursor"].get<int64_t>();
                     if (chunk.empty()) chunk = ": keepalive\n\n";
                     if (!sink.write(chunk.data(), chunk.size())) return false;
                     if (page["finished"].get<bool>() && page["events"].empty()) break;
                   }
                   sink.done();
                   return true;
                 });
           }));

  if (!options_.web_root.empty() && !http.set_mount_point("/", options_.web_root)) {
    throw Error(ErrorCode::kIo, "web root not found: " + options_.web_root);
  }
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start() {
  auto& http = impl_->http;
  if (options_.port == 0) {
    port_ = http.bind_to_any_port(options_.host);
  } else {
    port_ = http.bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (port_ < 0) throw Error(ErrorCode::kIo, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  thread_ = std::thread([&http] { http.listen_after_bind(); });
  return port_;
}

void HttpServer::run() {
  if (!thread_.joinable()) start();
  thread_.join();
}

void HttpServer::stop() {
  impl_->stopping = true;
  manager_->shutdown();
  impl_->http.stop();
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

}  // namespace safecards
