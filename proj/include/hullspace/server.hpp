#pragma once

#include <atomic>
#include <memory>
#include <string>

#include "hullspace/engine.hpp"
#include "hullspace/error.hpp"

namespace httplib {
class Server;
}

namespace hullspace {

/// HTTP status for a library error kind.
int http_status(ErrorKind kind);

/// JSON API over an Engine plus a server-sent event stream per session.
///
///   GET  /api/health
///   POST /api/participants                      {"seed"?}
///   GET  /api/participants/{pid}
///   POST /api/participants/{pid}/modes          {"mode": "REM"|"SAEM"|"AEM"}
///   POST /api/participants/{pid}/questionnaire  {"Q1.1": "REM", ...}
///   GET  /api/sessions/{sid}
///   POST /api/sessions/{sid}/actions            {"verb": ..., ...}
///   POST /api/sessions/{sid}/query              {"query": ..., ...}
///   GET  /api/sessions/{sid}/events?since=n
///   GET  /api/sessions/{sid}/stream?since=n     text/event-stream
///   GET  /api/export[?participant=pid]
///
/// Errors come back as {"error": kind, "message": text}.
class HttpServer {
 public:
  explicit HttpServer(std::shared_ptr<Engine> engine);
  ~HttpServer();

  /// Binds; port 0 picks a free port. Returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); blocks.
  void listen();
  void stop();

 private:
  std::shared_ptr<Engine> engine_;
  std::unique_ptr<httplib::Server> server_;
  std::shared_ptr<std::atomic<bool>> stopping_;
};

}  // namespace hullspace
