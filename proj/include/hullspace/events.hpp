#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hullspace {

using json = nlohmann::json;

enum class Mode { kRem, kSaem, kAem };

/// "REM", "SAEM", "AEM".
std::string_view to_string(Mode mode);
Mode mode_from_string(std::string_view text);
inline constexpr Mode kAllModes[] = {Mode::kRem, Mode::kSaem, Mode::kAem};

/// What drove a selection.
enum class Rationale { kForm, kPerformance, kBoth };

std::string_view to_string(Rationale rationale);
/// Throws kInvalidSelection for anything but form, performance or both.
Rationale rationale_from_string(std::string_view text);

namespace event_kind {
inline constexpr std::string_view kStarted = "started";
inline constexpr std::string_view kViewed = "viewed";
inline constexpr std::string_view kEvaluated = "evaluated";
inline constexpr std::string_view kSelected = "selected";
inline constexpr std::string_view kGenerationShown = "generationShown";
inline constexpr std::string_view kWeightsChanged = "weightsChanged";
inline constexpr std::string_view kTerminated = "terminated";
}  // namespace event_kind

struct SessionEvent {
  std::uint64_t seq = 0;
  std::int64_t t_ms = 0;  // since session start
  std::string kind;
  json payload = json::object();

  json to_json() const;
  static SessionEvent from_json(const json& j);
  bool operator==(const SessionEvent&) const = default;
};

/// One compact JSON object per line.
std::string to_jsonl(const std::vector<SessionEvent>& events);
std::vector<SessionEvent> parse_jsonl(const std::string& text);

/// Throws kLogIntegrity unless: the log starts with a started event,
/// sequence numbers run 0, 1, 2, ..., timestamps are non-negative and
/// non-decreasing, kinds are known, and nothing follows a terminated event.
void check_log_integrity(const std::vector<SessionEvent>& events);

}  // namespace hullspace
