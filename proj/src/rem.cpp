#include "hullspace/rem.hpp"

#include <mutex>

#include "hullspace/config.hpp"
#include "hullspace/error.hpp"
#include "hullspace/surrogate.hpp"

namespace hullspace {

const DesignRecord& RemPool::at(const std::string& id) const { return designs[index_of(id)]; }

std::size_t RemPool::index_of(const std::string& id) const {
  const auto it = index.find(id);
  if (it == index.end()) throw Error(ErrorKind::kUnknownId, "no design '" + id + "' in the pool");
  return it->second;
}

std::shared_ptr<const RemPool> build_rem_pool(std::uint64_t seed, const RemConfig& config) {
  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const RemPool>> cache;

  const std::uint64_t pool_seed = config.pool_seed.value_or(seed);
  const std::string key = std::to_string(pool_seed) + json(config).dump();
  std::lock_guard lock(mutex);
  if (const auto it = cache.find(key); it != cache.end()) return it->second;

  auto pool = std::make_shared<RemPool>();
  pool->designs = sample_constrained(config.pool_size, pool_seed, config.generator);
  std::vector<std::string> ids;
  std::vector<LatentVector> latents;
  for (std::size_t i = 0; i < pool->designs.size(); ++i) {
    ids.push_back(pool->designs[i].id);
    latents.push_back(pool->designs[i].latent);
    pool->index.emplace(pool->designs[i].id, i);
  }
  TsneConfig tsne = config.tsne;
  tsne.seed = derive_seed(pool_seed, tsne.seed);
  pool->embedding = embed_2d(ids, latent_matrix(latents), tsne);
  cache.emplace(key, pool);
  return pool;
}

RemSession::RemSession(SessionSpec spec, std::shared_ptr<const CwPredictor> predictor)
    : ModeSession(std::move(spec)), predictor_(std::move(predictor)) {
  pool_ = build_rem_pool(this->spec().seed, this->spec().config.get<RemConfig>());
}

const DesignRecord& RemSession::view(const std::string& design_id, std::int64_t t_ms) {
  require_open();
  const DesignRecord& record = pool_->at(design_id);
  const Point2 p = pool_->embedding.points[pool_->index_of(design_id)];
  emit(event_kind::kViewed, json{{"design_id", design_id}, {"source", "view"}, {"u", p.u}, {"v", p.v}}, t_ms);
  return record;
}

const DesignRecord& RemSession::click(double u, double v, std::int64_t t_ms) {
  require_open();
  const DesignRecord& record = nearest_design(u, v);
  const Point2 p = pool_->embedding.points[pool_->index_of(record.id)];
  emit(event_kind::kViewed,
       json{{"design_id", record.id}, {"source", "click"}, {"click", {u, v}}, {"u", p.u}, {"v", p.v}}, t_ms);
  return record;
}

double RemSession::evaluate(const std::string& design_id, std::int64_t t_ms) {
  require_open();
  const DesignRecord& record = pool_->at(design_id);
  if (const auto cached = evaluated_cw(design_id)) {
    emit(event_kind::kEvaluated, json{{"design_id", design_id}, {"cw", *cached}, {"cached", true}}, t_ms);
    return *cached;
  }
  ++predictor_calls_;
  const double cw = predictor_->predict(record.latent);
  emit(event_kind::kEvaluated,
       json{{"design_id", design_id}, {"cw", cw}, {"cached", false}, {"source", "surrogate"}}, t_ms);
  return cw;
}

void RemSession::select(std::size_t slot, const std::string& design_id, Rationale rationale, std::int64_t t_ms) {
  require_open();
  if (slot < 1 || slot > kSlots) {
    throw Error(ErrorKind::kInvalidSelection, "slot must be 1..5, got " + std::to_string(slot));
  }
  const DesignRecord& record = pool_->at(design_id);
  const auto& previous = slots_[slot - 1];
  emit(event_kind::kSelected,
       json{{"slot", slot},
            {"design_id", design_id},
            {"latent", latent_to_json(record.latent)},
            {"rationale", std::string(to_string(rationale))},
            {"previous", previous ? json(previous->design_id) : json(nullptr)}},
       t_ms);
}

void RemSession::terminate(std::int64_t t_ms) {
  require_open();
  json slots = json::array();
  for (std::size_t s = 0; s < kSlots; ++s) {
    if (!slots_[s]) {
      throw Error(ErrorKind::kIncompleteSelection,
                  "select all five designs before finishing (slot " + std::to_string(s + 1) + " is empty)");
    }
    const DesignRecord& record = pool_->at(slots_[s]->design_id);
    json entry{{"slot", s + 1},
               {"design_id", record.id},
               {"rationale", std::string(to_string(slots_[s]->rationale))},
               {"latent", latent_to_json(record.latent)}};
    if (const auto cw = evaluated_cw(record.id)) entry["cw"] = *cw;
    slots.push_back(std::move(entry));
  }
  emit(event_kind::kTerminated, json{{"slots", slots}, {"views", visited_.size()}}, t_ms);
}

void RemSession::apply(const SessionEvent& event) {
  const json& p = event.payload;
  if (event.kind == event_kind::kViewed) {
    current_ = p.at("design_id").get<std::string>();
    visited_.push_back(*current_);
  } else if (event.kind == event_kind::kEvaluated) {
    evaluated_[p.at("design_id").get<std::string>()] = p.at("cw").get<double>();
  } else if (event.kind == event_kind::kSelected) {
    const auto slot = p.at("slot").get<std::size_t>();
    if (slot < 1 || slot > kSlots) throw Error(ErrorKind::kLogIntegrity, "selected event with a bad slot");
    slots_[slot - 1] = Slot{p.at("design_id").get<std::string>(),
                            rationale_from_string(p.at("rationale").get<std::string>())};
  } else if (event.kind == event_kind::kTerminated) {
    terminated_ = true;
  } else {
    throw Error(ErrorKind::kLogIntegrity, "unexpected " + event.kind + " event in a REM session");
  }
}

const DesignRecord& RemSession::nearest_design(double u, double v) const {
  return pool_->designs[pool_->embedding.nearest(u, v)];
}

std::optional<double> RemSession::evaluated_cw(const std::string& design_id) const {
  const auto it = evaluated_.find(design_id);
  if (it == evaluated_.end()) return std::nullopt;
  return it->second;
}

json RemSession::design_view(const DesignRecord& record) const {
  DesignRecord shown = record;
  if (const auto cw = evaluated_cw(record.id)) shown.attach_cw(*cw, CwSource::kSurrogate);
  json j = design_to_json(shown);
  const Point2 p = pool_->embedding.points[pool_->index_of(record.id)];
  j["u"] = p.u;
  j["v"] = p.v;
  return j;
}

json RemSession::act(const json& action, std::int64_t t_ms) {
  try {
    const std::string verb = action.at("verb").get<std::string>();
    if (verb == "view") return design_view(view(action.at("design_id").get<std::string>(), t_ms));
    if (verb == "click") {
      return design_view(click(action.at("u").get<double>(), action.at("v").get<double>(), t_ms));
    }
    if (verb == "evaluate") {
      const std::string id = action.at("design_id").get<std::string>();
      evaluate(id, t_ms);
      return design_view(pool_->at(id));
    }
    if (verb == "select") {
      select(action.at("slot").get<std::size_t>(), action.at("design_id").get<std::string>(),
             rationale_from_string(action.at("rationale").get<std::string>()), t_ms);
      return state();
    }
    if (verb == "terminate") {
      terminate(t_ms);
      return summary();
    }
    throw Error(ErrorKind::kInvalidArgument,
                "unknown REM verb '" + verb + "' (view, click, evaluate, select, terminate)");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed REM action: ") + e.what());
  }
}

json RemSession::query(const json& request) const {
  try {
    const std::string what = request.at("query").get<std::string>();
    if (what == "nearest") return design_view(nearest_design(request.at("u").get<double>(), request.at("v").get<double>()));
    if (what == "design") return design_view(pool_->at(request.at("design_id").get<std::string>()));
    if (what == "embedding") {
      json points = json::array();
      for (std::size_t i = 0; i < pool_->designs.size(); ++i) {
        points.push_back({pool_->designs[i].id, pool_->embedding.points[i].u, pool_->embedding.points[i].v});
      }
      json hull = json::array();
      for (const auto i : pool_->embedding.hull.vertices) {
        hull.push_back({pool_->embedding.points[i].u, pool_->embedding.points[i].v});
      }
      return json{{"points", points}, {"hull", hull}, {"degenerate", pool_->embedding.hull.degenerate}};
    }
    throw Error(ErrorKind::kInvalidArgument, "unknown REM query '" + what + "' (nearest, design, embedding)");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed REM query: ") + e.what());
  }
}

json RemSession::state() const {
  json slots = json::array();
  for (std::size_t s = 0; s < kSlots; ++s) {
    if (slots_[s]) {
      slots.push_back({{"slot", s + 1},
                       {"design", design_view(pool_->at(slots_[s]->design_id))},
                       {"rationale", std::string(to_string(slots_[s]->rationale))}});
    } else {
      slots.push_back({{"slot", s + 1}, {"design", nullptr}});
    }
  }
  bool complete = true;
  for (const auto& s : slots_) complete = complete && s.has_value();
  return json{{"mode", "REM"},
              {"session_id", spec().session_id},
              {"pool_size", pool_->designs.size()},
              {"current", current_ ? design_view(pool_->at(*current_)) : json(nullptr)},
              {"slots", slots},
              {"can_terminate", complete && !terminated_},
              {"terminated", terminated_}};
}

json RemSession::summary() const {
  json j = base_summary();
  json slots = json::array();
  for (const auto& s : slots_) {
    slots.push_back(s ? json{{"design_id", s->design_id}, {"rationale", std::string(to_string(s->rationale))}}
                      : json(nullptr));
  }
  j["slots"] = slots;
  j["evaluated"] = evaluated_;
  j["current"] = current_ ? json(*current_) : json(nullptr);
  j["visited"] = visited_;
  return j;
}

}  // namespace hullspace
