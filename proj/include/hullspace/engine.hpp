#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hullspace/config.hpp"
#include "hullspace/session.hpp"

namespace hullspace {

/// Milliseconds on some fixed epoch.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ms() const = 0;
};

/// Wall clock (Unix epoch), so session times survive a restart.
class SystemClock final : public Clock {
 public:
  std::int64_t now_ms() const override;
};

/// Clock advanced by hand; used by simulations and tests.
class ManualClock final : public Clock {
 public:
  explicit ManualClock(std::int64_t start = 0) : now_(start) {}
  std::int64_t now_ms() const override { return now_.load(); }
  void set(std::int64_t t) { now_.store(t); }
  void advance(std::int64_t dt) { now_.fetch_add(dt); }

 private:
  std::atomic<std::int64_t> now_;
};

/// Post-study questionnaire items; every answer names a mode.
inline constexpr std::array<const char*, 9> kQuestionnaireItems{"Q1.1", "Q1.2", "Q1.3", "Q2.1", "Q2.2",
                                                                "Q2.3", "Q3",   "Q4",   "Q5"};

/// Throws kMalformedAnswers listing missing, unknown or invalid items.
std::map<std::string, Mode> validate_questionnaire(const json& answers);

/// Anonymous study participant. Only the seed, the mode order and study
/// data are stored.
struct Participant {
  std::string id;
  std::uint64_t seed = 0;
  std::array<Mode, 3> mode_order{Mode::kRem, Mode::kSaem, Mode::kAem};
  std::set<Mode> completed;
  std::map<Mode, std::string> sessions;
  std::optional<std::map<std::string, Mode>> questionnaire;

  /// First mode of the order not yet completed.
  std::optional<Mode> next_mode() const;
  json to_json() const;
  static Participant from_json(const json& j);
};

/// Uniformly random permutation of the three modes drawn from `seed`.
std::array<Mode, 3> random_mode_order(std::uint64_t seed);
std::string participant_id_for(std::uint64_t seed);

/// Set of files with a manifest; identical logs give byte-identical content.
struct TelemetryArchive {
  std::map<std::string, std::string> files;  // relative path -> content, includes manifest.json

  /// Every file in one JSON document {"files": {path: content}}.
  std::string to_json_text() const;
  void write_to(const std::string& directory) const;
};

/// Builds an archive from session logs: sessions/<id>.jsonl, a one-row
/// summary sessions/<id>.csv, per-design times sessions/<id>.times.csv and
/// manifest.json listing participants and files with sizes and FNV-1a hashes.
TelemetryArchive build_archive(const std::vector<Participant>& participants,
                               const std::vector<std::vector<SessionEvent>>& logs);

/// Longest recommended session; reported, never enforced.
inline constexpr std::int64_t kSessionGuidanceMs = 40 * 60 * 1000;

/// In-process study server: participants, mode ordering, one event-sourced
/// session per participant and mode, append-only JSONL persistence and
/// replay-based recovery. Thread-safe; actions on one session are
/// serialized, different sessions proceed independently.
class Engine {
 public:
  /// With a non-empty data_dir, existing participants and sessions there are
  /// recovered by replaying their logs.
  Engine(PlatformConfig config, std::shared_ptr<const CwPredictor> predictor, std::shared_ptr<Clock> clock,
         std::string data_dir = "");

  /// seed unset: derived from the server seed and the participant count.
  Participant create_participant(std::optional<std::uint64_t> seed = std::nullopt);
  Participant participant(const std::string& participant_id) const;
  std::vector<Participant> participants() const;

  /// Opens (or resumes) the participant's session for `mode`; kOrdering
  /// unless it is the next mode of the participant's order.
  std::string start_mode(const std::string& participant_id, Mode mode);

  json session_state(const std::string& session_id) const;
  json act(const std::string& session_id, const json& action);
  json query(const std::string& session_id, const json& request) const;
  json summary(const std::string& session_id) const;
  std::vector<SessionEvent> events(const std::string& session_id) const;
  /// Events with seq >= since, waiting up to `timeout` for at least one.
  std::vector<SessionEvent> wait_events(const std::string& session_id, std::uint64_t since,
                                        std::chrono::milliseconds timeout) const;
  std::vector<std::string> session_ids() const;

  /// kPrematureQuestionnaire before all three modes are complete.
  void submit_questionnaire(const std::string& participant_id, const json& answers);

  /// One participant, or everyone when unset.
  TelemetryArchive export_telemetry(const std::optional<std::string>& participant_id = std::nullopt) const;

  const PlatformConfig& config() const { return config_; }

 private:
  struct Live {
    mutable std::mutex mutex;
    mutable std::condition_variable changed;
    std::unique_ptr<ModeSession> session;
    std::int64_t wall_start = 0;
    std::string log_path;
  };

  std::shared_ptr<Live> live(const std::string& session_id) const;
  void persist_participant(const Participant& p) const;
  void attach_log(Live& live) const;
  void recover();

  PlatformConfig config_;
  std::shared_ptr<const CwPredictor> predictor_;
  std::shared_ptr<Clock> clock_;
  std::string data_dir_;

  mutable std::mutex mutex_;
  std::map<std::string, Participant> participants_;
  std::map<std::string, std::shared_ptr<Live>> sessions_;
};

}  // namespace hullspace
