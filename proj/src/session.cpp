#include "hullspace/session.hpp"

#include "hullspace/aem.hpp"
#include "hullspace/config.hpp"
#include "hullspace/error.hpp"
#include "hullspace/rem.hpp"
#include "hullspace/saem.hpp"
#include "hullspace/surrogate.hpp"

namespace hullspace {

std::vector<double> CwPredictor::predict(const std::vector<LatentVector>& xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(predict(x));
  return out;
}

double GprPredictor::predict(const LatentVector& x) const {
  return model_->predict_mean(to_eigen(x).transpose())[0];
}

std::vector<double> GprPredictor::predict(const std::vector<LatentVector>& xs) const {
  if (xs.empty()) return {};
  const Eigen::VectorXd means = model_->predict_mean(latent_matrix(xs));
  return {means.data(), means.data() + means.size()};
}

json SessionSpec::to_json() const {
  return json{{"session_id", session_id},
              {"participant_id", participant_id},
              {"mode", std::string(hullspace::to_string(mode))},
              {"seed", seed},
              {"config", config}};
}

SessionSpec SessionSpec::from_json(const json& j) {
  try {
    SessionSpec s;
    s.session_id = j.at("session_id").get<std::string>();
    s.participant_id = j.at("participant_id").get<std::string>();
    s.mode = mode_from_string(j.at("mode").get<std::string>());
    s.seed = j.at("seed").get<std::uint64_t>();
    s.config = j.value("config", json::object());
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed session spec: ") + e.what());
  }
}

json latent_to_json(const LatentVector& x) { return json(x.values); }

LatentVector latent_from_json(const json& j) {
  if (!j.is_array() || j.size() != kLatentDim) {
    throw Error(ErrorKind::kInvalidArgument, "latent must be an array of 20 numbers");
  }
  LatentVector x;
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    if (!j[d].is_number()) throw Error(ErrorKind::kInvalidArgument, "latent entries must be numbers");
    x[d] = j[d].get<double>();
  }
  return x;
}

json bounds_to_json(const DesignSpaceBounds& b) {
  return json{{"lower", b.lowers()}, {"upper", b.uppers()}};
}

DesignSpaceBounds bounds_from_json(const json& j) {
  try {
    return DesignSpaceBounds(j.at("lower").get<std::array<double, kLatentDim>>(),
                             j.at("upper").get<std::array<double, kLatentDim>>());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed bounds: ") + e.what());
  }
}

json design_to_json(const DesignRecord& record) {
  json j{{"id", record.id},
         {"latent", latent_to_json(record.latent)},
         {"dimensions",
          {{"length_waterline", record.dimensions.length_waterline},
           {"beam_waterline", record.dimensions.beam_waterline},
           {"draft", record.dimensions.draft},
           {"displacement", record.dimensions.displacement_volume}}},
         {"feasible", record.constraints.all_satisfied},
         {"violation", record.constraints.normalized_violation()},
         {"cw_source", std::string(to_string(record.cw_source))}};
  if (record.cw) j["cw"] = *record.cw;
  return j;
}

const SessionEvent& ModeSession::emit(std::string_view kind, json payload, std::int64_t t_ms) {
  if (t_ms < last_timestamp()) {
    throw Error(ErrorKind::kInvalidArgument, "timestamps must not decrease");
  }
  SessionEvent event{events_.size(), t_ms, std::string(kind), std::move(payload)};
  if (event.kind != event_kind::kStarted) apply(event);
  events_.push_back(std::move(event));
  if (listener_) listener_(events_.back());
  return events_.back();
}

void ModeSession::replay(const SessionEvent& event) {
  if (event.seq != events_.size()) {
    throw Error(ErrorKind::kLogIntegrity, "event " + std::to_string(event.seq) + " out of sequence");
  }
  if (events_.empty() != (event.kind == event_kind::kStarted)) {
    throw Error(ErrorKind::kLogIntegrity, "a log has exactly one started event, first");
  }
  if (event.t_ms < last_timestamp()) throw Error(ErrorKind::kLogIntegrity, "timestamps decrease");
  if (terminated_) throw Error(ErrorKind::kLogIntegrity, "event after termination");
  if (event.kind != event_kind::kStarted) apply(event);
  events_.push_back(event);
}

void ModeSession::require_open() const {
  if (terminated_) throw Error(ErrorKind::kInvalidSelection, "session " + spec_.session_id + " is terminated");
}

json ModeSession::base_summary() const {
  return json{{"spec", spec_.to_json()},
              {"event_count", events_.size()},
              {"terminated", terminated_},
              {"last_t", last_timestamp()}};
}

namespace {

std::unique_ptr<ModeSession> construct(const SessionSpec& spec, std::shared_ptr<const CwPredictor> predictor) {
  if (!predictor) throw Error(ErrorKind::kInvalidArgument, "a session needs a Cw predictor");
  switch (spec.mode) {
    case Mode::kRem: return std::make_unique<RemSession>(spec, std::move(predictor));
    case Mode::kSaem: return std::make_unique<SaemSession>(spec, std::move(predictor));
    case Mode::kAem: return std::make_unique<AemSession>(spec, std::move(predictor));
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown mode");
}

}  // namespace

std::unique_ptr<ModeSession> open_session(const SessionSpec& spec, std::shared_ptr<const CwPredictor> predictor,
                                          std::int64_t t_ms) {
  const std::string predictor_name = predictor ? predictor->name() : "";
  auto session = construct(spec, std::move(predictor));
  session->emit(event_kind::kStarted, json{{"spec", spec.to_json()}, {"predictor", predictor_name}}, t_ms);
  return session;
}

std::unique_ptr<ModeSession> replay_session(const std::vector<SessionEvent>& events,
                                            std::shared_ptr<const CwPredictor> predictor) {
  check_log_integrity(events);
  const SessionSpec spec = SessionSpec::from_json(events.front().payload.at("spec"));
  auto session = construct(spec, std::move(predictor));
  for (const auto& e : events) session->replay(e);
  return session;
}

}  // namespace hullspace
