#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hullspace/events.hpp"
#include "hullspace/generator.hpp"
#include "hullspace/latent.hpp"

namespace hullspace {

class GprModel;

/// Cw estimate for a latent vector; implementations must be thread-safe.
class CwPredictor {
 public:
  virtual ~CwPredictor() = default;
  virtual double predict(const LatentVector& x) const = 0;
  virtual std::vector<double> predict(const std::vector<LatentVector>& xs) const;
  virtual std::string name() const = 0;
};

/// Posterior mean of a fitted GPR model.
class GprPredictor final : public CwPredictor {
 public:
  explicit GprPredictor(std::shared_ptr<const GprModel> model) : model_(std::move(model)) {}
  double predict(const LatentVector& x) const override;
  std::vector<double> predict(const std::vector<LatentVector>& xs) const override;
  std::string name() const override { return "gpr"; }
  const GprModel& model() const { return *model_; }

 private:
  std::shared_ptr<const GprModel> model_;
};

/// Wraps an arbitrary callable; used by tests and by direct-solver runs.
class FunctionPredictor final : public CwPredictor {
 public:
  FunctionPredictor(std::function<double(const LatentVector&)> fn, std::string name = "function")
      : fn_(std::move(fn)), name_(std::move(name)) {}
  double predict(const LatentVector& x) const override { return fn_(x); }
  std::string name() const override { return name_; }

 private:
  std::function<double(const LatentVector&)> fn_;
  std::string name_;
};

struct SessionSpec {
  std::string session_id;
  std::string participant_id;
  Mode mode = Mode::kRem;
  std::uint64_t seed = 0;
  json config = json::object();  // mode configuration, see config.hpp

  json to_json() const;
  static SessionSpec from_json(const json& j);
};

json latent_to_json(const LatentVector& x);
LatentVector latent_from_json(const json& j);
json bounds_to_json(const DesignSpaceBounds& b);
DesignSpaceBounds bounds_from_json(const json& j);
/// id, latent, principal dimensions, constraint flag and, when present, Cw
/// with its source.
json design_to_json(const DesignRecord& record);

/// One exploration-mode session. State changes only by applying events:
/// each command validates its input, computes the outcome, records it as an
/// event and applies that event. Replaying a log through apply() therefore
/// reproduces the live state exactly.
class ModeSession {
 public:
  using Listener = std::function<void(const SessionEvent&)>;

  virtual ~ModeSession() = default;

  const SessionSpec& spec() const { return spec_; }
  Mode mode() const { return spec_.mode; }
  const std::vector<SessionEvent>& events() const { return events_; }
  bool terminated() const { return terminated_; }
  std::int64_t last_timestamp() const { return events_.empty() ? 0 : events_.back().t_ms; }
  void set_listener(Listener listener) { listener_ = std::move(listener); }

  /// Runs a mode-specific verb ({"verb": ..., ...}) at time t_ms and returns
  /// the response body.
  virtual json act(const json& action, std::int64_t t_ms) = 0;
  /// Read-only requests that log nothing ({"query": ..., ...}).
  virtual json query(const json& request) const = 0;
  /// What a client should display.
  virtual json state() const = 0;
  /// Complete logical state, for comparing a live session with its replay.
  virtual json summary() const = 0;

  /// Appends an already-recorded event (crash recovery).
  void replay(const SessionEvent& event);

 protected:
  explicit ModeSession(SessionSpec spec) : spec_(std::move(spec)) {}

  const SessionEvent& emit(std::string_view kind, json payload, std::int64_t t_ms);
  virtual void apply(const SessionEvent& event) = 0;
  void require_open() const;
  json base_summary() const;

  bool terminated_ = false;

 private:
  friend std::unique_ptr<ModeSession> open_session(const SessionSpec&, std::shared_ptr<const CwPredictor>,
                                                   std::int64_t);
  SessionSpec spec_;
  std::vector<SessionEvent> events_;
  Listener listener_;
};

/// Builds the mode session described by `spec` and records its started event.
std::unique_ptr<ModeSession> open_session(const SessionSpec& spec,
                                          std::shared_ptr<const CwPredictor> predictor,
                                          std::int64_t t_ms = 0);

/// Rebuilds a session from its full event log.
std::unique_ptr<ModeSession> replay_session(const std::vector<SessionEvent>& events,
                                            std::shared_ptr<const CwPredictor> predictor);

}  // namespace hullspace
