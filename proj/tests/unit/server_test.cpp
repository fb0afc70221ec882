#include <doctest.h>

#include <sstream>
#include <thread>

#include "hullspace/engine.hpp"
#include "hullspace/events.hpp"
#include "hullspace/server.hpp"
#include "support.hpp"

// After Eigen: <resolv.h> defines a _res macro.
#include <httplib.h>

using namespace hullspace;

namespace {

struct Harness {
  std::shared_ptr<ManualClock> clock = std::make_shared<ManualClock>(0);
  std::shared_ptr<Engine> engine;
  std::unique_ptr<HttpServer> server;
  std::thread thread;
  int port = 0;

  Harness() {
    PlatformConfig c = testing::small_config();
    c.aem.population = 10;
    c.aem.steps_per_interaction = 4;
    engine = std::make_shared<Engine>(c, testing::toy_predictor(), clock);
    server = std::make_unique<HttpServer>(engine);
    port = server->bind("127.0.0.1", 0);
    thread = std::thread([this] { server->listen(); });
  }
  ~Harness() {
    server->stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(10, 0);
    return c;
  }
  std::pair<int, json> get(const std::string& path) const {
    auto res = client().Get(path.c_str());
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> post(const std::string& path, const json& body) const {
    auto res = client().Post(path.c_str(), body.dump(), "application/json");
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> post_raw(const std::string& path, const std::string& body) const {
    auto res = client().Post(path.c_str(), body, "application/json");
    REQUIRE(res);
    return {res->status, json::parse(res->body)};
  }
};

struct Frame {
  std::uint64_t id = 0;
  std::string event;
  json data;
};

std::vector<Frame> parse_frames(const std::string& text) {
  std::vector<Frame> out;
  std::istringstream in(text);
  std::string line;
  Frame f;
  bool open = false;
  while (std::getline(in, line)) {
    if (line.empty()) {
      if (open) out.push_back(f);
      f = Frame{};
      open = false;
    } else if (line.rfind("id: ", 0) == 0) {
      f.id = std::stoull(line.substr(4));
      open = true;
    } else if (line.rfind("event: ", 0) == 0) {
      f.event = line.substr(7);
    } else if (line.rfind("data: ", 0) == 0) {
      f.data = json::parse(line.substr(6));
    }
  }
  return out;
}

// Drives a SAEM-or-AEM session through the API until it terminates.
void finish_generations(const Harness& h, const std::string& sid) {
  for (int k = 0; k < 16; ++k) {
    const auto [s, state] = h.post("/api/sessions/" + sid + "/actions", {{"verb", "next"}});
    REQUIRE(s == 200);
    const std::string id = state.at("generation")[0].at("id");
    REQUIRE(h.post("/api/sessions/" + sid + "/actions", {{"verb", "select"}, {"design_id", id}, {"rationale", "form"}})
                .first == 200);
  }
  REQUIRE(h.post("/api/sessions/" + sid + "/actions", {{"verb", "terminate"}}).first == 200);
}

}  // namespace

TEST_CASE("HTTP API") {
  Harness h;
  CHECK(h.get("/api/health") == std::pair<int, json>{200, {{"status", "ok"}}});

  const auto [created, participant] = h.post("/api/participants", {{"seed", 42}});
  REQUIRE(created == 201);
  const std::string pid = participant.at("participant_id");
  CHECK(h.get("/api/participants/" + pid).second == participant);
  CHECK(h.post("/api/participants", {{"seed", 42}}).first == 400);
  CHECK(h.post("/api/participants", {{"seed", -1}}).first == 400);
  CHECK(h.post("/api/participants", json::object()).first == 201);

  const auto missing = h.get("/api/participants/nobody");
  CHECK(missing.first == 404);
  CHECK(missing.second.at("error") == std::string(to_string(ErrorKind::kUnknownId)));
  CHECK(missing.second.at("message").is_string());
  CHECK(h.get("/api/sessions/nobody").first == 404);
  CHECK(h.get("/api/sessions/nobody/events").first == 404);
  CHECK(h.get("/api/sessions/nobody/stream").first == 404);

  const auto order = participant.at("mode_order");
  const auto modes = "/api/participants/" + pid + "/modes";
  CHECK(h.post(modes, {{"mode", order[1]}}).first == 409);
  CHECK(h.post(modes, {{"mode", "GA"}}).first == 400);
  CHECK(h.post(modes, json::object()).first == 400);
  CHECK(h.post_raw(modes, "{not json").first == 400);
  CHECK(h.post("/api/participants/" + pid + "/questionnaire", json::object()).first == 409);

  const auto [started, body] = h.post(modes, {{"mode", order[0]}});
  REQUIRE(started == 201);
  const std::string sid = body.at("session_id");
  CHECK(sid == pid + "-" + [&] {
          std::string m = order[0];
          for (auto& ch : m) ch = static_cast<char>(std::tolower(ch));
          return m;
        }());
  CHECK(h.get("/api/sessions/" + sid).second == body.at("state"));

  const auto actions = "/api/sessions/" + sid + "/actions";
  CHECK(h.post(actions, {{"verb", "dance"}}).first == 400);
  CHECK(h.post(actions, {{"verb", "terminate"}}).first == 409);
  if (order[0] == "REM") {
    const auto [s, design] = h.post(actions, {{"verb", "view"}, {"design_id", "d000004"}});
    CHECK(s == 200);
    CHECK(design.at("id") == "d000004");
    CHECK_FALSE(design.contains("cw"));
    const auto [qs, near] = h.post("/api/sessions/" + sid + "/query", {{"query", "design"}, {"design_id", "d000004"}});
    CHECK(qs == 200);
    CHECK(near.at("id") == "d000004");
    CHECK(h.post(actions, {{"verb", "select"}, {"slot", 9}, {"design_id", "d000004"}, {"rationale", "form"}}).first ==
          400);
  } else {
    const auto [s, state] = h.post(actions, {{"verb", "next"}});
    CHECK(s == 200);
    CHECK(state.at("generation").size() == 5);
    CHECK(h.post(actions, {{"verb", "select"}, {"design_id", "zz"}, {"rationale", "form"}}).first == 400);
  }

  const auto [es, events] = h.get("/api/sessions/" + sid + "/events");
  CHECK(es == 200);
  REQUIRE(events.size() == h.engine->events(sid).size());
  CHECK(events[0].at("kind") == "started");
  CHECK(h.get("/api/sessions/" + sid + "/events?since=1").second.size() == events.size() - 1);
  CHECK(h.get("/api/sessions/" + sid + "/events?since=x").first == 400);

  const auto [xs, archive] = h.get("/api/export?participant=" + pid);
  CHECK(xs == 200);
  CHECK(archive.dump() == json::parse(h.engine->export_telemetry(pid).to_json_text()).dump());
  CHECK(h.get("/api/export?participant=nobody").first == 404);
}

TEST_CASE("event stream replays and follows a session") {
  Harness h;
  // A participant whose first mode generates designs.
  std::string pid, sid;
  for (std::uint64_t seed = 1; sid.empty(); ++seed) {
    const auto p = h.post("/api/participants", {{"seed", seed}}).second;
    if (p.at("mode_order")[0] == "REM") continue;
    pid = p.at("participant_id");
    sid = h.post("/api/participants/" + pid + "/modes", {{"mode", p.at("mode_order")[0]}}).second.at("session_id");
  }
  std::string live;
  std::thread reader([&] {
    auto c = h.client();
    c.Get(("/api/sessions/" + sid + "/stream?since=1").c_str(), [&](const char* data, std::size_t n) {
      live.append(data, n);
      return true;
    });
  });
  // On a failed assertion the server stops first so the stream ends.
  struct Joiner {
    Harness& h;
    std::thread& t;
    ~Joiner() {
      if (t.joinable()) {
        h.server->stop();
        t.join();
      }
    }
  } joiner{h, reader};
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  finish_generations(h, sid);
  reader.join();

  const auto log = h.engine->events(sid);
  const auto frames = parse_frames(live);
  REQUIRE(frames.size() == log.size() - 1);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(frames[i].id == log[i + 1].seq);
    CHECK(frames[i].event == log[i + 1].kind);
    CHECK(frames[i].data == log[i + 1].to_json());
  }
  CHECK(frames.back().event == "terminated");

  // A finished session streams its remaining log and closes.
  std::string tail;
  auto res = h.client().Get(("/api/sessions/" + sid + "/stream?since=" + std::to_string(log.size() - 3)).c_str(),
                            [&](const char* data, std::size_t n) {
                              tail.append(data, n);
                              return true;
                            });
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(res->get_header_value("Content-Type") == "text/event-stream");
  const auto last = parse_frames(tail);
  REQUIRE(last.size() == 3);
  CHECK(last[0].id == log.size() - 3);
  CHECK(h.get("/api/sessions/" + sid + "/stream?since=-4").first == 400);
}

TEST_CASE("a whole study over HTTP") {
  Harness h;
  const auto p = h.post("/api/participants", {{"seed", 77}}).second;
  const std::string pid = p.at("participant_id");
  for (const auto& mode : p.at("mode_order")) {
    const auto [s, body] = h.post("/api/participants/" + pid + "/modes", {{"mode", mode}});
    REQUIRE(s == 201);
    const std::string sid = body.at("session_id");
    const auto actions = "/api/sessions/" + sid + "/actions";
    if (mode == "REM") {
      for (int slot = 1; slot <= 5; ++slot) {
        const std::string id = design_id("d", static_cast<std::size_t>(slot * 11));
        h.clock->advance(3000);
        REQUIRE(h.post(actions, {{"verb", "view"}, {"design_id", id}}).first == 200);
        REQUIRE(h.post(actions, {{"verb", "evaluate"}, {"design_id", id}}).first == 200);
        REQUIRE(h.post(actions, {{"verb", "select"}, {"slot", slot}, {"design_id", id}, {"rationale", "both"}}).first ==
                200);
      }
      REQUIRE(h.post(actions, {{"verb", "terminate"}}).first == 200);
    } else {
      finish_generations(h, sid);
    }
    CHECK(h.get("/api/sessions/" + sid).second.at("terminated") == true);
  }
  const json answers{{"Q1.1", "REM"}, {"Q1.2", "SAEM"}, {"Q1.3", "AEM"}, {"Q2.1", "AEM"}, {"Q2.2", "AEM"},
                     {"Q2.3", "REM"}, {"Q3", "SAEM"},   {"Q4", "REM"},     {"Q5", "AEM"}};
  json partial = answers;
  partial.erase("Q5");
  CHECK(h.post("/api/participants/" + pid + "/questionnaire", partial).first == 400);
  const auto [qs, stored] = h.post("/api/participants/" + pid + "/questionnaire", answers);
  CHECK(qs == 200);
  CHECK(stored.at("questionnaire") == answers);
  CHECK(stored.at("completed").size() == 3);

  const auto archive = h.get("/api/export").second;
  CHECK(archive.dump() == json::parse(h.engine->export_telemetry().to_json_text()).dump());
}
