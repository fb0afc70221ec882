#include "hullspace/aem.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "hullspace/config.hpp"
#include "hullspace/error.hpp"
#include "hullspace/jaya.hpp"
#include "hullspace/metrics.hpp"

namespace hullspace {

CwNormalization CwNormalization::over(const std::vector<double>& cws) {
  if (cws.empty()) return {};
  const auto [lo, hi] = std::minmax_element(cws.begin(), cws.end());
  return {*lo, *hi};
}

double normalized_distance(const LatentVector& a, const LatentVector& b) {
  return distance(a, b) / DesignSpaceBounds::root().diagonal();
}

double preference_objective(double cw_normalized, double distance_normalized, double violation,
                            const PreferenceWeights& weights) {
  const double penalty = violation > 0.0 ? weights.gamma1 + weights.gamma2 + violation : 0.0;
  return weights.gamma1 * cw_normalized + weights.gamma2 * distance_normalized + penalty;
}

double preference_objective(double cw_normalized, const LatentVector& x, const std::optional<LatentVector>& preferred,
                            double violation, const PreferenceWeights& weights) {
  if (!preferred) {
    if (weights.gamma2 > 0.0) {
      throw Error(ErrorKind::kInvalidArgument, "gamma2 > 0 needs a preferred design");
    }
    return preference_objective(cw_normalized, 0.0, violation, weights);
  }
  return preference_objective(cw_normalized, normalized_distance(x, *preferred), violation, weights);
}

AemCandidate evaluate_candidate(const LatentVector& x, const CwPredictor& predictor, const GeneratorConfig& generator) {
  const DesignRecord record = make_design_record("", x, generator);
  return {x, predictor.predict(x), record.constraints.normalized_violation()};
}

std::vector<std::size_t> present_top(const std::vector<AemCandidate>& population, const std::vector<double>& objective,
                                     std::size_t n) {
  std::vector<std::size_t> order(population.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return objective[a] < objective[b]; });
  std::vector<std::size_t> picked;
  auto take = [&](bool feasible) {
    for (const auto i : order) {
      if (picked.size() == n) return;
      if ((population[i].violation == 0.0) != feasible) continue;
      const bool duplicate = std::any_of(picked.begin(), picked.end(), [&](std::size_t j) {
        return population[j].latent == population[i].latent;
      });
      if (!duplicate) picked.push_back(i);
    }
  };
  take(true);
  take(false);
  return picked;
}

namespace {

std::string aem_id(std::size_t interaction, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "a%02zu-%zu", interaction, k);
  return buf;
}

void check_weights(const PreferenceWeights& w) {
  if (!(w.gamma1 >= 0.0 && w.gamma1 <= 1.0 && w.gamma2 >= 0.0 && w.gamma2 <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "weights must lie in [0, 1]");
  }
}

LatentVector to_latent(const std::vector<double>& v) {
  LatentVector x;
  std::copy(v.begin(), v.end(), x.values.begin());
  return x;
}

json candidate_to_json(const AemCandidate& c) {
  return json{{"latent", latent_to_json(c.latent)}, {"cw", c.cw}, {"violation", c.violation}};
}

}  // namespace

AemSession::AemSession(SessionSpec spec, std::shared_ptr<const CwPredictor> predictor)
    : ModeSession(std::move(spec)), predictor_(std::move(predictor)) {
  config_ = this->spec().config.get<AemConfig>();
  check_weights(config_.initial_weights);
  if (config_.population < 2 || config_.top_n == 0 || config_.steps_per_interaction == 0) {
    throw Error(ErrorKind::kInvalidArgument, "AEM needs a population of at least 2, top_n >= 1 and steps >= 1");
  }
  sliders_ = config_.initial_weights;
}

PreferenceWeights AemSession::effective_weights() const {
  PreferenceWeights w = sliders_;
  if (selections_.empty()) w.gamma2 = 0.0;
  return w;
}

std::optional<LatentVector> AemSession::preferred() const {
  if (selections_.empty()) return std::nullopt;
  return selections_.back().latent;
}

void AemSession::set_weights(const PreferenceWeights& weights, std::int64_t t_ms) {
  require_open();
  check_weights(weights);
  emit(event_kind::kWeightsChanged, json{{"gamma1", weights.gamma1}, {"gamma2", weights.gamma2}}, t_ms);
}

const std::vector<DesignRecord>& AemSession::next_generation(std::int64_t t_ms) {
  require_open();
  if (pending_) throw Error(ErrorKind::kInvalidSelection, "select a design from the current generation first");
  if (interaction_count() >= config_.max_interactions) {
    throw Error(ErrorKind::kInteractionCap,
                "the session allows at most " + std::to_string(config_.max_interactions) + " interactions");
  }
  const std::size_t interaction = interaction_count() + 1;
  const PreferenceWeights weights = effective_weights();
  const std::optional<LatentVector> target = preferred();

  std::vector<AemCandidate> start = population_;
  if (start.empty() || !config_.warm_start) {
    start.clear();
    for (const auto& x : uniform_sample(DesignSpaceBounds::root(), config_.population,
                                        derive_seed(spec().seed, interaction))) {
      start.push_back(evaluate_candidate(x, *predictor_, config_.generator));
    }
  }
  std::vector<double> start_cw;
  for (const auto& c : start) start_cw.push_back(c.cw);
  const CwNormalization norm = CwNormalization::over(start_cw);

  std::map<std::array<double, kLatentDim>, AemCandidate> known;
  for (const auto& c : start) known.emplace(c.latent.values, c);
  const Objective f = [&](const std::vector<double>& v) {
    const LatentVector x = to_latent(v);
    auto it = known.find(x.values);
    if (it == known.end()) it = known.emplace(x.values, evaluate_candidate(x, *predictor_, config_.generator)).first;
    return preference_objective(norm(it->second.cw), x, target, it->second.violation, weights);
  };

  std::vector<std::vector<double>> solutions;
  for (const auto& c : start) solutions.emplace_back(c.latent.values.begin(), c.latent.values.end());
  JayaPopulation pop = make_population(std::move(solutions), f);
  const Box box{std::vector<double>(kLatentDim, 0.0), std::vector<double>(kLatentDim, 1.0)};
  std::mt19937_64 rng(derive_seed(spec().seed, 0x1a7a0000ULL + interaction));
  json trace = json::array();
  for (std::size_t s = 0; s < config_.steps_per_interaction; ++s) {
    jaya_step(pop, f, box, rng);
    trace.push_back(pop.best_value());
  }

  std::vector<AemCandidate> population;
  json population_json = json::array();
  for (const auto& v : pop.solutions) {
    population.push_back(known.at(to_latent(v).values));
    population_json.push_back(candidate_to_json(population.back()));
  }
  const auto top = present_top(population, pop.objective, config_.top_n);
  json designs = json::array();
  for (std::size_t k = 0; k < top.size(); ++k) {
    DesignRecord record = make_design_record(aem_id(interaction, k), population[top[k]].latent, config_.generator);
    record.attach_cw(population[top[k]].cw, CwSource::kSurrogate);
    json d = design_to_json(record);
    d["objective"] = pop.objective[top[k]];
    d["population_index"] = top[k];
    designs.push_back(std::move(d));
  }
  emit(event_kind::kGenerationShown,
       json{{"interaction", interaction},
            {"weights", weights},
            {"normalization", {{"lo", norm.lo}, {"hi", norm.hi}}},
            {"population", population_json},
            {"objective", pop.objective},
            {"designs", designs},
            {"best_trace", trace}},
       t_ms);
  return presented_;
}

void AemSession::select(const std::string& design_id, Rationale rationale,
                        std::optional<PreferenceWeights> next_weights, std::int64_t t_ms) {
  require_open();
  if (!pending_) throw Error(ErrorKind::kInvalidSelection, "no generation is awaiting a selection");
  const auto it = std::find_if(presented_.begin(), presented_.end(),
                               [&](const DesignRecord& d) { return d.id == design_id; });
  if (it == presented_.end()) {
    throw Error(ErrorKind::kInvalidSelection, "design '" + design_id + "' is not among the presented designs");
  }
  if (next_weights) check_weights(*next_weights);
  json payload{{"interaction", interaction_count() + 1},
               {"design_id", design_id},
               {"rationale", std::string(to_string(rationale))},
               {"latent", latent_to_json(it->latent)},
               {"cw", *it->cw},
               {"weights_used", generation_weights_}};
  payload["next_weights"] = next_weights ? json(*next_weights) : json(nullptr);
  emit(event_kind::kSelected, std::move(payload), t_ms);
}

void AemSession::terminate(std::int64_t t_ms) {
  require_open();
  if (interaction_count() < config_.min_interactions) {
    throw Error(ErrorKind::kPrematureTermination,
                "at least " + std::to_string(config_.min_interactions) + " interactions are required, " +
                    std::to_string(interaction_count()) + " done");
  }
  std::vector<LatentVector> chosen;
  for (const auto& d : selections_) chosen.push_back(d.latent);
  json history = json::array();
  for (const auto& w : weight_history_) history.push_back(w);
  emit(event_kind::kTerminated,
       json{{"interactions", interaction_count()},
            {"final_design", selections_.back().id},
            {"sc", sparseness_at_centre(chosen).sc},
            {"shown", shown_},
            {"weight_history", history}},
       t_ms);
}

void AemSession::apply(const SessionEvent& event) {
  const json& p = event.payload;
  if (event.kind == event_kind::kWeightsChanged) {
    sliders_ = p.get<PreferenceWeights>();
  } else if (event.kind == event_kind::kGenerationShown) {
    population_.clear();
    for (const auto& c : p.at("population")) {
      population_.push_back({latent_from_json(c.at("latent")), c.at("cw").get<double>(),
                             c.at("violation").get<double>()});
    }
    objective_ = p.at("objective").get<std::vector<double>>();
    normalization_ = {p.at("normalization").at("lo").get<double>(), p.at("normalization").at("hi").get<double>()};
    generation_weights_ = p.at("weights").get<PreferenceWeights>();
    best_trace_ = p.at("best_trace").get<std::vector<double>>();
    presented_.clear();
    for (const auto& d : p.at("designs")) {
      DesignRecord record =
          make_design_record(d.at("id").get<std::string>(), latent_from_json(d.at("latent")), config_.generator);
      record.attach_cw(d.at("cw").get<double>(), CwSource::kSurrogate);
      presented_.push_back(std::move(record));
    }
    shown_ += presented_.size();
    pending_ = true;
  } else if (event.kind == event_kind::kSelected) {
    const std::string id = p.at("design_id").get<std::string>();
    const auto it = std::find_if(presented_.begin(), presented_.end(),
                                 [&](const DesignRecord& d) { return d.id == id; });
    if (it == presented_.end()) throw Error(ErrorKind::kLogIntegrity, "selection of a design never presented");
    selections_.push_back(*it);
    rationales_.push_back(rationale_from_string(p.at("rationale").get<std::string>()));
    weight_history_.push_back(generation_weights_);
    if (!p.at("next_weights").is_null()) sliders_ = p.at("next_weights").get<PreferenceWeights>();
    pending_ = false;
  } else if (event.kind == event_kind::kTerminated) {
    terminated_ = true;
  } else {
    throw Error(ErrorKind::kLogIntegrity, "unexpected " + event.kind + " event in an AEM session");
  }
}

json AemSession::act(const json& action, std::int64_t t_ms) {
  try {
    const std::string verb = action.at("verb").get<std::string>();
    if (verb == "weights") {
      set_weights({action.at("gamma1").get<double>(), action.at("gamma2").get<double>()}, t_ms);
      return state();
    }
    if (verb == "next") {
      next_generation(t_ms);
      return state();
    }
    if (verb == "select") {
      std::optional<PreferenceWeights> w;
      if (action.contains("gamma1") || action.contains("gamma2")) {
        w = PreferenceWeights{action.value("gamma1", sliders_.gamma1), action.value("gamma2", sliders_.gamma2)};
      }
      select(action.at("design_id").get<std::string>(),
             rationale_from_string(action.at("rationale").get<std::string>()), w, t_ms);
      return state();
    }
    if (verb == "terminate") {
      terminate(t_ms);
      return summary();
    }
    throw Error(ErrorKind::kInvalidArgument,
                "unknown AEM verb '" + verb + "' (weights, next, select, terminate)");
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed AEM action: ") + e.what());
  }
}

json AemSession::query(const json& request) const {
  const std::string what = request.value("query", "");
  if (what == "population") {
    json pop = json::array();
    for (const auto& c : population_) pop.push_back(candidate_to_json(c));
    return json{{"population", pop}, {"objective", objective_}, {"best_trace", best_trace_}};
  }
  if (what == "weights") {
    json history = json::array();
    for (const auto& w : weight_history_) history.push_back(w);
    return json{{"sliders", sliders_}, {"effective", effective_weights()}, {"history", history}};
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown AEM query '" + what + "' (population, weights)");
}

json AemSession::state() const {
  json designs = json::array();
  if (pending_) {
    for (const auto& d : presented_) designs.push_back(design_to_json(d));
  }
  return json{{"mode", "AEM"},
              {"session_id", spec().session_id},
              {"interaction", interaction_count()},
              {"generation", designs},
              {"awaiting_selection", pending_},
              {"sliders", sliders_},
              {"effective_weights", effective_weights()},
              {"gamma2_locked", selections_.empty()},
              {"can_terminate", !terminated_ && interaction_count() >= config_.min_interactions},
              {"can_continue", !terminated_ && !pending_ && interaction_count() < config_.max_interactions},
              {"terminated", terminated_}};
}

json AemSession::summary() const {
  json j = base_summary();
  json selected = json::array();
  for (std::size_t i = 0; i < selections_.size(); ++i) {
    selected.push_back({{"design", design_to_json(selections_[i])},
                        {"rationale", std::string(to_string(rationales_[i]))}});
  }
  json presented = json::array();
  for (const auto& d : presented_) presented.push_back(design_to_json(d));
  json pop = json::array();
  for (const auto& c : population_) pop.push_back(candidate_to_json(c));
  json history = json::array();
  for (const auto& w : weight_history_) history.push_back(w);
  j["selected"] = selected;
  j["presented"] = presented;
  j["population"] = pop;
  j["objective"] = objective_;
  j["normalization"] = {{"lo", normalization_.lo}, {"hi", normalization_.hi}};
  j["sliders"] = sliders_;
  j["generation_weights"] = generation_weights_;
  j["weight_history"] = history;
  j["best_trace"] = best_trace_;
  j["pending"] = pending_;
  j["shown"] = shown_;
  return j;
}

}  // namespace hullspace
