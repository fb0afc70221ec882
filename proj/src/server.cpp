#include "hullspace/server.hpp"

#include <httplib.h>

#include <charconv>

namespace hullspace {

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUnknownId: return 404;
    case ErrorKind::kOrdering:
    case ErrorKind::kPrematureQuestionnaire:
    case ErrorKind::kIncompleteSelection:
    case ErrorKind::kPrematureTermination:
    case ErrorKind::kInteractionCap:
    case ErrorKind::kShrinkStall: return 409;
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kInvalidSelection:
    case ErrorKind::kMalformedAnswers:
    case ErrorKind::kOutOfBounds: return 400;
    default: return 500;
  }
}

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
  }
}

std::uint64_t since_of(const httplib::Request& req) {
  if (!req.has_param("since")) return 0;
  const std::string text = req.get_param_value("since");
  std::uint64_t since = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), since);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorKind::kInvalidArgument, "since must be a non-negative integer");
  }
  return since;
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_json(res, {{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}, http_status(e.kind()));
    } catch (const std::exception& e) {
      send_json(res, {{"error", "internal"}, {"message", e.what()}}, 500);
    }
  };
}

std::string sse_frame(const SessionEvent& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.kind + "\ndata: " + e.to_json().dump() + "\n\n";
}

}  // namespace

HttpServer::HttpServer(std::shared_ptr<Engine> engine)
    : engine_(std::move(engine)),
      server_(std::make_unique<httplib::Server>()),
      stopping_(std::make_shared<std::atomic<bool>>(false)) {
  auto& s = *server_;
  auto engine_ptr = engine_;

  s.Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) {
          send_json(res, {{"status", "ok"}});
        }));

  s.Post("/api/participants", guarded([engine_ptr](const httplib::Request& req, httplib::Response& res) {
           const json body = body_of(req);
           std::optional<std::uint64_t> seed;
           if (body.contains("seed")) {
             if (!body.at("seed").is_number_unsigned()) {
               throw Error(ErrorKind::kInvalidArgument, "seed must be a non-negative integer");
             }
             seed = body.at("seed").get<std::uint64_t>();
           }
           send_json(res, engine_ptr->create_participant(seed).to_json(), 201);
         }));

  s.Get(R"(/api/participants/([^/]+))", guarded([engine_ptr](const httplib::Request& req, httplib::Response& res) {
          send_json(res, engine_ptr->participant(req.matches[1]).to_json());
        }));

  s.Post(R"(/api/participants/([^/]+)/modes)",
         guarded([engine_ptr](const httplib::Request& req, httplib::Response& res) {
           const json body = body_of(req);
           if (!body.contains("mode") || !body.at("mode").is_string()) {
             throw Error(ErrorKind::kInvalidArgument, "body needs \"mode\": REM, SAEM or AEM");
           }
           const std::string sid =
               engine_ptr->start_mode(req.matches[1], mode_from_string(body.at("mode").get<std::string>()));
           send_json(res, {{"session_id", sid}, {"state", engine_ptr->session_state(sid)}}, 201);
         }));

  s.Post(R"(/api/participants/([^/]+)/questionnaire)",
         guarded([engine_ptr](const httplib::Request& req, httplib::Response& res) {
           engine_ptr->submit_questionnaire(req.matches[1], body_of(req));
           send_json(res, engine_ptr->participant(req.matches[1]).to_json());
         }));

  s.Get(R"(/api/sessions/([^/]+))", guarded([engine_ptr](const httplib::Request& req, httplib::Response& res) {
          send_json(res, engine_ptr->session_state(req.matches[1]));
        }));

  s.Post(R"(/api/sessions/([^/]+)/actions)",
         guarded([engine_ptr](const httplib::Request& req, httplib::Response& res) {
           send_json(res, engine_ptr->act(req.matches[1], body_of(req)));
         }));

  s.Post(R"(/api/sessions/([^/]+)/query)", guarded([engine_ptr](const httplib::Request& req, httplib::Response& res) {
           send_json(res, engine_ptr->query(req.matches[1], body_of(req)));
         }));

  s.Get(R"(/api/sessions/([^/]+)/events)", guarded([engine_ptr](const httplib::Request& req, httplib::Response& res) {
          const auto all = engine_ptr->events(req.matches[1]);
          const std::uint64_t since = since_of(req);
          json out = json::array();
          for (const auto& e : all) {
            if (e.seq >= since) out.push_back(e.to_json());
          }
          send_json(res, out);
        }));

  auto stopping = stopping_;
  s.Get(R"(/api/sessions/([^/]+)/stream)",
        guarded([engine_ptr, stopping](const httplib::Request& req, httplib::Response& res) {
          const std::string sid = req.matches[1];
          engine_ptr->events(sid);  // unknown ids fail before streaming starts
          auto next = std::make_shared<std::uint64_t>(since_of(req));
          res.set_header("Cache-Control", "no-cache");
          res.set_chunked_content_provider(
              "text/event-stream", [engine_ptr, stopping, sid, next](std::size_t, httplib::DataSink& sink) {
                if (stopping->load()) return false;
                const auto events = engine_ptr->wait_events(sid, *next, std::chrono::milliseconds(250));
                if (events.empty()) {
                  const std::string ping = ": keep-alive\n\n";
                  return sink.write(ping.data(), ping.size());
                }
                for (const auto& e : events) {
                  const std::string frame = sse_frame(e);
                  if (!sink.write(frame.data(), frame.size())) return false;
                  *next = e.seq + 1;
                  if (e.kind == event_kind::kTerminated) {
                    sink.done();
                    return true;
                  }
                }
                return true;
              });
        }));

  s.Get("/api/export", guarded([engine_ptr](const httplib::Request& req, httplib::Response& res) {
          std::optional<std::string> pid;
          if (req.has_param("participant")) pid = req.get_param_value("participant");
          res.status = 200;
          res.set_content(engine_ptr->export_telemetry(pid).to_json_text(), "application/json");
        }));
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::kIo, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) {
    throw Error(ErrorKind::kIo, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  stopping_->store(true);
  if (server_->is_running()) server_->stop();
}

}  // namespace hullspace
