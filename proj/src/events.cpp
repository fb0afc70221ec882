#include "hullspace/events.hpp"

#include <algorithm>
#include <array>
#include <sstream>

#include "hullspace/error.hpp"

namespace hullspace {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::kRem: return "REM";
    case Mode::kSaem: return "SAEM";
    case Mode::kAem: return "AEM";
  }
  return "REM";
}

Mode mode_from_string(std::string_view text) {
  if (text == "REM") return Mode::kRem;
  if (text == "SAEM") return Mode::kSaem;
  if (text == "AEM") return Mode::kAem;
  throw Error(ErrorKind::kInvalidArgument, "unknown mode '" + std::string(text) + "' (REM, SAEM, AEM)");
}

std::string_view to_string(Rationale rationale) {
  switch (rationale) {
    case Rationale::kForm: return "form";
    case Rationale::kPerformance: return "performance";
    case Rationale::kBoth: return "both";
  }
  return "form";
}

Rationale rationale_from_string(std::string_view text) {
  if (text == "form") return Rationale::kForm;
  if (text == "performance") return Rationale::kPerformance;
  if (text == "both") return Rationale::kBoth;
  throw Error(ErrorKind::kInvalidSelection,
              "rationale must be form, performance or both, got '" + std::string(text) + "'");
}

json SessionEvent::to_json() const {
  return json{{"seq", seq}, {"t", t_ms}, {"kind", kind}, {"payload", payload}};
}

SessionEvent SessionEvent::from_json(const json& j) {
  try {
    SessionEvent e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.t_ms = j.at("t").get<std::int64_t>();
    e.kind = j.at("kind").get<std::string>();
    e.payload = j.at("payload");
    return e;
  } catch (const json::exception& ex) {
    throw Error(ErrorKind::kLogIntegrity, std::string("malformed event: ") + ex.what());
  }
}

std::string to_jsonl(const std::vector<SessionEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    out += e.to_json().dump();
    out += '\n';
  }
  return out;
}

std::vector<SessionEvent> parse_jsonl(const std::string& text) {
  std::vector<SessionEvent> events;
  std::istringstream in(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& ex) {
      throw Error(ErrorKind::kLogIntegrity,
                  "line " + std::to_string(number) + " is not JSON: " + ex.what());
    }
    events.push_back(SessionEvent::from_json(j));
  }
  return events;
}

void check_log_integrity(const std::vector<SessionEvent>& events) {
  static constexpr std::array<std::string_view, 7> known{
      event_kind::kStarted,  event_kind::kViewed,          event_kind::kEvaluated,
      event_kind::kSelected, event_kind::kGenerationShown, event_kind::kWeightsChanged,
      event_kind::kTerminated};
  if (events.empty()) throw Error(ErrorKind::kLogIntegrity, "empty event log");
  if (events.front().kind != event_kind::kStarted) {
    throw Error(ErrorKind::kLogIntegrity, "event log must begin with a started event");
  }
  std::int64_t last = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    const std::string where = "event " + std::to_string(i);
    if (e.seq != i) throw Error(ErrorKind::kLogIntegrity, where + " has sequence number " + std::to_string(e.seq));
    if (e.t_ms < 0 || e.t_ms < last) {
      throw Error(ErrorKind::kLogIntegrity, where + " timestamp " + std::to_string(e.t_ms) +
                                                " precedes " + std::to_string(last));
    }
    last = e.t_ms;
    if (std::find(known.begin(), known.end(), e.kind) == known.end()) {
      throw Error(ErrorKind::kLogIntegrity, where + " has unknown kind '" + e.kind + "'");
    }
    if (i > 0 && e.kind == event_kind::kStarted) {
      throw Error(ErrorKind::kLogIntegrity, where + " repeats the started event");
    }
    if (e.kind == event_kind::kTerminated && i + 1 != events.size()) {
      throw Error(ErrorKind::kLogIntegrity, "events follow termination at " + where);
    }
  }
}

}  // namespace hullspace
