#include "hullspace/saem.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "hullspace/config.hpp"
#include "hullspace/error.hpp"
#include "hullspace/metrics.hpp"

namespace hullspace {

DesignSpaceBounds shrink_bounds(const DesignSpaceBounds& current, const LatentVector& chosen, double beta) {
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorKind::kInvalidArgument, "beta must lie in (0, 1)");
  std::array<double, kLatentDim> lower{};
  std::array<double, kLatentDim> upper{};
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    const double width = beta * current.width(d);
    lower[d] = chosen[d] - 0.5 * width;
    upper[d] = chosen[d] + 0.5 * width;
    if (lower[d] < current.lower(d)) {
      lower[d] = current.lower(d);
      upper[d] = std::min(current.upper(d), lower[d] + width);
    } else if (upper[d] > current.upper(d)) {
      upper[d] = current.upper(d);
      lower[d] = std::max(current.lower(d), upper[d] - width);
    }
  }
  return DesignSpaceBounds(lower, upper);
}

namespace {

std::string saem_id(std::size_t interaction, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "s%02zu-%zu", interaction, k);
  return buf;
}

}  // namespace

SaemSession::SaemSession(SessionSpec spec, std::shared_ptr<const CwPredictor> predictor)
    : ModeSession(std::move(spec)), predictor_(std::move(predictor)) {
  config_ = this->spec().config.get<SaemConfig>();
  if (config_.designs_per_interaction == 0) {
    throw Error(ErrorKind::kInvalidArgument, "designs_per_interaction must be positive");
  }
  trajectory_.push_back(bounds_);
}

std::vector<DesignRecord> SaemSession::draw_generation(std::size_t interaction) const {
  const std::uint64_t seed = derive_seed(spec().seed, interaction);
  const auto latents = uniform_sample(bounds_, config_.designs_per_interaction, seed);
  std::vector<DesignRecord> designs;
  std::size_t feasible = 0;
  for (std::size_t k = 0; k < latents.size(); ++k) {
    DesignRecord record = make_design_record(saem_id(interaction, k), latents[k], config_.generator);
    if (!record.constraints.all_satisfied) {
      // Resample the point i.i.d. in the bounds; keep the least violating
      // draw if none is feasible.
      const auto retries = random_sample(bounds_, config_.retry_cap, derive_seed(seed, 1000 + k));
      double least = record.constraints.normalized_violation();
      for (const auto& x : retries) {
        DesignRecord candidate = make_design_record(record.id, x, config_.generator);
        const double violation = candidate.constraints.normalized_violation();
        if (candidate.constraints.all_satisfied) {
          record = std::move(candidate);
          break;
        }
        if (violation < least) {
          least = violation;
          record = std::move(candidate);
        }
      }
    }
    if (record.constraints.all_satisfied) ++feasible;
    designs.push_back(std::move(record));
  }
  if (feasible == 0) {
    throw Error(ErrorKind::kShrinkStall,
                "no feasible design found in the current bounds after " + std::to_string(config_.retry_cap) +
                    " retries per point; reset the bounds");
  }
  std::vector<LatentVector> xs;
  for (const auto& d : designs) xs.push_back(d.latent);
  const auto cws = predictor_->predict(xs);
  for (std::size_t k = 0; k < designs.size(); ++k) designs[k].attach_cw(cws[k], CwSource::kSurrogate);
  return designs;
}

const std::vector<DesignRecord>& SaemSession::next_generation(std::int64_t t_ms) {
  require_open();
  if (pending_) throw Error(ErrorKind::kInvalidSelection, "select a design from the current generation first");
  if (interaction_count() >= config_.max_interactions) {
    throw Error(ErrorKind::kInteractionCap,
                "the session allows at most " + std::to_string(config_.max_interactions) + " interactions");
  }
  const std::size_t interaction = interaction_count() + 1;
  const auto designs = draw_generation(interaction);
  json shown = json::array();
  for (const auto& d : designs) shown.push_back(design_to_json(d));
  emit(event_kind::kGenerationShown,
       json{{"interaction", interaction}, {"bounds", bounds_to_json(bounds_)}, {"designs", shown}}, t_ms);
  return generation_;
}

void SaemSession::select(const std::string& design_id, Rationale rationale, std::int64_t t_ms) {
  require_open();
  if (!pending_) throw Error(ErrorKind::kInvalidSelection, "no generation is awaiting a selection");
  const auto it = std::find_if(generation_.begin(), generation_.end(),
                               [&](const DesignRecord& d) { return d.id == design_id; });
  if (it == generation_.end()) {
    throw Error(ErrorKind::kInvalidSelection, "design '" + design_id + "' is not in the current generation");
  }
  const DesignSpaceBounds next = shrink_bounds(bounds_, it->latent, config_.beta);
  emit(event_kind::kSelected,
       json{{"interaction", interaction_count() + 1},
            {"design_id", design_id},
            {"rationale", std::string(to_string(rationale))},
            {"latent", latent_to_json(it->latent)},
            {"cw", *it->cw},
            {"shown_ids", [&] {
               json ids = json::array();
               for (const auto& d : generation_) ids.push_back(d.id);
               return ids;
             }()},
            {"bounds_before", bounds_to_json(bounds_)},
            {"bounds_after", bounds_to_json(next)}},
       t_ms);
}

void SaemSession::terminate(std::int64_t t_ms) {
  require_open();
  if (interaction_count() < config_.min_interactions) {
    throw Error(ErrorKind::kPrematureTermination,
                "at least " + std::to_string(config_.min_interactions) + " interactions are required, " +
                    std::to_string(interaction_count()) + " done");
  }
  std::vector<LatentVector> chosen;
  for (const auto& d : selections_) chosen.push_back(d.latent);
  emit(event_kind::kTerminated,
       json{{"interactions", interaction_count()},
            {"final_design", selections_.back().id},
            {"sc", sparseness_at_centre(chosen).sc},
            {"shown", shown_}},
       t_ms);
}

void SaemSession::apply(const SessionEvent& event) {
  const json& p = event.payload;
  if (event.kind == event_kind::kGenerationShown) {
    generation_.clear();
    for (const auto& d : p.at("designs")) {
      DesignRecord record =
          make_design_record(d.at("id").get<std::string>(), latent_from_json(d.at("latent")), config_.generator);
      record.attach_cw(d.at("cw").get<double>(), CwSource::kSurrogate);
      generation_.push_back(std::move(record));
    }
    shown_ += generation_.size();
    pending_ = true;
  } else if (event.kind == event_kind::kSelected) {
    const std::string id = p.at("design_id").get<std::string>();
    const auto it = std::find_if(generation_.begin(), generation_.end(),
                                 [&](const DesignRecord& d) { return d.id == id; });
    if (it == generation_.end()) throw Error(ErrorKind::kLogIntegrity, "selection of a design never shown");
    selections_.push_back(*it);
    rationales_.push_back(rationale_from_string(p.at("rationale").get<std::string>()));
    bounds_ = bounds_from_json(p.at("bounds_after"));
    trajectory_.push_back(bounds_);
    pending_ = false;
  } else if (event.kind == event_kind::kTerminated) {
    terminated_ = true;
  } else {
    throw Error(ErrorKind::kLogIntegrity, "unexpected " + event.kind + " event in a SAEM session");
  }
}

json SaemSession::act(const json& action, std::int64_t t_ms) {
  try {
    const std::string verb = action.at("verb").get<std::string>();
    if (verb == "next") {
      next_generation(t_ms);
      return state();
    }
    if (verb == "select") {
      select(action.at("design_id").get<std::string>(),
             rationale_from_string(action.at("rationale").get<std::string>()), t_ms);
      return state();
    }
    if (verb == "terminate") {
      terminate(t_ms);
      return summary();
    }
    throw Error(ErrorKind::kInvalidArgument, "unknown SAEM verb '" + verb + "' (next, select, terminate)");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed SAEM action: ") + e.what());
  }
}

json SaemSession::query(const json& request) const {
  const std::string what = request.value("query", "");
  if (what == "bounds") {
    json trajectory = json::array();
    for (const auto& b : trajectory_) trajectory.push_back(bounds_to_json(b));
    return json{{"current", bounds_to_json(bounds_)}, {"trajectory", trajectory}};
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown SAEM query '" + what + "' (bounds)");
}

json SaemSession::state() const {
  json designs = json::array();
  if (pending_) {
    for (const auto& d : generation_) designs.push_back(design_to_json(d));
  }
  return json{{"mode", "SAEM"},
              {"session_id", spec().session_id},
              {"interaction", interaction_count()},
              {"generation", designs},
              {"awaiting_selection", pending_},
              {"bounds", bounds_to_json(bounds_)},
              {"can_terminate", !terminated_ && interaction_count() >= config_.min_interactions},
              {"can_continue", !terminated_ && !pending_ && interaction_count() < config_.max_interactions},
              {"terminated", terminated_}};
}

json SaemSession::summary() const {
  json j = base_summary();
  json selected = json::array();
  for (std::size_t i = 0; i < selections_.size(); ++i) {
    selected.push_back({{"design", design_to_json(selections_[i])},
                        {"rationale", std::string(to_string(rationales_[i]))}});
  }
  json generation = json::array();
  for (const auto& d : generation_) generation.push_back(design_to_json(d));
  json trajectory = json::array();
  for (const auto& b : trajectory_) trajectory.push_back(bounds_to_json(b));
  j["selected"] = selected;
  j["generation"] = generation;
  j["pending"] = pending_;
  j["bounds_trajectory"] = trajectory;
  j["shown"] = shown_;
  return j;
}

}  // namespace hullspace
