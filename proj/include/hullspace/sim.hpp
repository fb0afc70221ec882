#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "hullspace/engine.hpp"
#include "hullspace/session.hpp"

namespace hullspace {

enum class PolicyKind { kNoveltySeeker, kPerformanceSeeker, kMixed };

/// Scripted participant. Novelty seekers pick the shown design farthest from
/// their earlier picks, performance seekers the lowest Cw, and mixed(alpha)
/// maximizes alpha * novelty + (1 - alpha) * performance with both scores
/// min-max normalized over the candidates.
struct Policy {
  PolicyKind kind = PolicyKind::kMixed;
  double alpha = 0.5;
  std::uint64_t seed = 0;

  /// "novelty", "performance" or "mixed:<alpha>".
  static Policy parse(const std::string& text, std::uint64_t seed = 0);
  std::string name() const;
  /// Chance that a REM participant presses evaluate on a viewed design.
  double evaluate_probability() const;
  Rationale rationale() const;
};

/// Minimal surface a policy needs: actions, queries and the passage of time.
class SessionDriver {
 public:
  virtual ~SessionDriver() = default;
  virtual json act(const json& action) = 0;
  virtual json query(const json& request) = 0;
  virtual void wait(std::int64_t ms) = 0;
};

/// Drives a ModeSession directly; time is a local counter.
class DirectDriver final : public SessionDriver {
 public:
  explicit DirectDriver(ModeSession& session) : session_(session), t_(session.last_timestamp()) {}
  json act(const json& action) override { return session_.act(action, t_); }
  json query(const json& request) override { return session_.query(request); }
  void wait(std::int64_t ms) override { t_ += ms; }

 private:
  ModeSession& session_;
  std::int64_t t_;
};

/// Drives a session held by an Engine whose clock is a ManualClock.
class EngineDriver final : public SessionDriver {
 public:
  EngineDriver(Engine& engine, std::string session_id, std::shared_ptr<ManualClock> clock)
      : engine_(engine), session_id_(std::move(session_id)), clock_(std::move(clock)) {}
  json act(const json& action) override { return engine_.act(session_id_, action); }
  json query(const json& request) override { return engine_.query(session_id_, request); }
  void wait(std::int64_t ms) override { clock_->advance(ms); }

 private:
  Engine& engine_;
  std::string session_id_;
  std::shared_ptr<ManualClock> clock_;
};

struct SimOptions {
  /// SAEM and AEM interactions before terminating.
  std::size_t interactions = 20;
  /// REM views before the slots are filled.
  std::size_t rem_views = 40;
};

/// Plays one whole session of `mode` and terminates it.
void run_policy(SessionDriver& driver, Mode mode, const Policy& policy, const SimOptions& options = {});

/// Opens a session for `spec`, plays it with `policy` and returns it terminated.
std::unique_ptr<ModeSession> run_session(const Policy& policy, const SessionSpec& spec,
                                         std::shared_ptr<const CwPredictor> predictor,
                                         const SimOptions& options = {});

}  // namespace hullspace
