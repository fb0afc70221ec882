#include "hullspace/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "hullspace/error.hpp"

namespace hullspace {

namespace {

// Reads optional keys into existing defaults and rejects keys it never saw.
class Reader {
 public:
  Reader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) throw Error(ErrorKind::kInvalidArgument, "config section '" + section_ + "' must be an object");
  }

  template <typename T>
  Reader& get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kInvalidArgument, "config " + section_ + "." + key + ": " + e.what());
    }
    return *this;
  }

  template <typename T>
  Reader& get_optional(const char* key, std::optional<T>& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return *this;
    if (j_.at(key).is_null()) {
      out.reset();
    } else {
      T v{};
      get(key, v);
      out = v;
    }
    return *this;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw Error(ErrorKind::kInvalidArgument, "unknown config key " + section_ + "." + item.key());
      }
    }
  }

 private:
  const json& j_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace

void to_json(json& j, const ConstraintBounds& v) {
  j = json{{"displacement", v.displacement},
           {"length_waterline", v.length_waterline},
           {"beam_waterline", v.beam_waterline},
           {"draft", v.draft}};
}

void from_json(const json& j, ConstraintBounds& v) {
  Reader(j, "constraints")
      .get("displacement", v.displacement)
      .get("length_waterline", v.length_waterline)
      .get("beam_waterline", v.beam_waterline)
      .get("draft", v.draft)
      .finish();
}

void to_json(json& j, const GeneratorConfig& v) {
  j = json{{"length_range", v.length_range},
           {"beam_range", v.beam_range},
           {"draft_range", v.draft_range},
           {"stations", v.stations},
           {"waterlines", v.waterlines},
           {"rejection_floor", v.rejection_floor},
           {"probe_batch", v.probe_batch},
           {"constraints", v.constraints}};
}

void from_json(const json& j, GeneratorConfig& v) {
  Reader(j, "generator")
      .get("length_range", v.length_range)
      .get("beam_range", v.beam_range)
      .get("draft_range", v.draft_range)
      .get("stations", v.stations)
      .get("waterlines", v.waterlines)
      .get("rejection_floor", v.rejection_floor)
      .get("probe_batch", v.probe_batch)
      .get("constraints", v.constraints)
      .finish();
}

void to_json(json& j, const ThinShipSettings& v) {
  j = json{{"lambda_max", v.lambda_max},   {"lambda_split", v.lambda_split},
           {"near_panels", v.near_panels}, {"far_panels", v.far_panels},
           {"refinement", v.refinement},   {"water_density", v.water_density}};
}

void from_json(const json& j, ThinShipSettings& v) {
  Reader(j, "thin_ship")
      .get("lambda_max", v.lambda_max)
      .get("lambda_split", v.lambda_split)
      .get("near_panels", v.near_panels)
      .get("far_panels", v.far_panels)
      .get("refinement", v.refinement)
      .get("water_density", v.water_density)
      .finish();
}

void to_json(json& j, const EvaluatorConfig& v) {
  j = json{{"kind", v.kind},
           {"command", v.command},
           {"froude_number", v.froude_number},
           {"thin_ship", v.thin_ship}};
}

void from_json(const json& j, EvaluatorConfig& v) {
  Reader(j, "evaluator")
      .get("kind", v.kind)
      .get("command", v.command)
      .get("froude_number", v.froude_number)
      .get("thin_ship", v.thin_ship)
      .finish();
}

void to_json(json& j, const ValidityOptions& v) { j = json{{"envelope_tolerance", v.envelope_tolerance}}; }

void from_json(const json& j, ValidityOptions& v) {
  Reader(j, "validity").get("envelope_tolerance", v.envelope_tolerance).finish();
}

void to_json(json& j, const GprFitConfig& v) {
  j = json{{"optimize", v.optimize},
           {"fixed_noise_variance", v.fixed_noise_variance ? json(*v.fixed_noise_variance) : json(nullptr)},
           {"min_noise_ratio", v.min_noise_ratio},
           {"optimizer_subset", v.optimizer_subset},
           {"max_iterations", v.max_iterations},
           {"start_length_scales", v.start_length_scales},
           {"seed", v.seed}};
}

void from_json(const json& j, GprFitConfig& v) {
  Reader(j, "gpr")
      .get("optimize", v.optimize)
      .get_optional("fixed_noise_variance", v.fixed_noise_variance)
      .get("min_noise_ratio", v.min_noise_ratio)
      .get("optimizer_subset", v.optimizer_subset)
      .get("max_iterations", v.max_iterations)
      .get("start_length_scales", v.start_length_scales)
      .get("seed", v.seed)
      .finish();
}

void to_json(json& j, const TsneConfig& v) {
  j = json{{"perplexity", v.perplexity},
           {"iterations", v.iterations},
           {"exaggeration_iterations", v.exaggeration_iterations},
           {"exaggeration", v.exaggeration},
           {"learning_rate", v.learning_rate},
           {"seed", v.seed}};
}

void from_json(const json& j, TsneConfig& v) {
  Reader(j, "tsne")
      .get("perplexity", v.perplexity)
      .get("iterations", v.iterations)
      .get("exaggeration_iterations", v.exaggeration_iterations)
      .get("exaggeration", v.exaggeration)
      .get("learning_rate", v.learning_rate)
      .get("seed", v.seed)
      .finish();
}

void to_json(json& j, const PreferenceWeights& v) { j = json{{"gamma1", v.gamma1}, {"gamma2", v.gamma2}}; }

void from_json(const json& j, PreferenceWeights& v) {
  Reader(j, "weights").get("gamma1", v.gamma1).get("gamma2", v.gamma2).finish();
}

void to_json(json& j, const RemConfig& v) {
  j = json{{"pool_size", v.pool_size},
           {"pool_seed", v.pool_seed ? json(*v.pool_seed) : json(nullptr)},
           {"tsne", v.tsne},
           {"generator", v.generator}};
}

void from_json(const json& j, RemConfig& v) {
  Reader(j, "rem")
      .get("pool_size", v.pool_size)
      .get_optional("pool_seed", v.pool_seed)
      .get("tsne", v.tsne)
      .get("generator", v.generator)
      .finish();
}

void to_json(json& j, const SaemConfig& v) {
  j = json{{"beta", v.beta},
           {"designs_per_interaction", v.designs_per_interaction},
           {"min_interactions", v.min_interactions},
           {"max_interactions", v.max_interactions},
           {"retry_cap", v.retry_cap},
           {"generator", v.generator}};
}

void from_json(const json& j, SaemConfig& v) {
  Reader(j, "saem")
      .get("beta", v.beta)
      .get("designs_per_interaction", v.designs_per_interaction)
      .get("min_interactions", v.min_interactions)
      .get("max_interactions", v.max_interactions)
      .get("retry_cap", v.retry_cap)
      .get("generator", v.generator)
      .finish();
}

void to_json(json& j, const AemConfig& v) {
  j = json{{"population", v.population},
           {"steps_per_interaction", v.steps_per_interaction},
           {"top_n", v.top_n},
           {"initial_weights", v.initial_weights},
           {"warm_start", v.warm_start},
           {"min_interactions", v.min_interactions},
           {"max_interactions", v.max_interactions},
           {"generator", v.generator}};
}

void from_json(const json& j, AemConfig& v) {
  Reader(j, "aem")
      .get("population", v.population)
      .get("steps_per_interaction", v.steps_per_interaction)
      .get("top_n", v.top_n)
      .get("initial_weights", v.initial_weights)
      .get("warm_start", v.warm_start)
      .get("min_interactions", v.min_interactions)
      .get("max_interactions", v.max_interactions)
      .get("generator", v.generator)
      .finish();
}

void to_json(json& j, const SurrogateSettings& v) {
  j = json{{"samples", v.samples},
           {"seed", v.seed},
           {"model_path", v.model_path},
           {"holdout_fraction", v.pipeline.holdout_fraction},
           {"max_batches", v.pipeline.max_batches},
           {"gpr", v.pipeline.gpr}};
}

void from_json(const json& j, SurrogateSettings& v) {
  Reader(j, "surrogate")
      .get("samples", v.samples)
      .get("seed", v.seed)
      .get("model_path", v.model_path)
      .get("holdout_fraction", v.pipeline.holdout_fraction)
      .get("max_batches", v.pipeline.max_batches)
      .get("gpr", v.pipeline.gpr)
      .finish();
}

void to_json(json& j, const ServerSettings& v) {
  j = json{{"host", v.host}, {"port", v.port}, {"data_dir", v.data_dir}, {"seed", v.seed}};
}

void from_json(const json& j, ServerSettings& v) {
  Reader(j, "server").get("host", v.host).get("port", v.port).get("data_dir", v.data_dir).get("seed", v.seed).finish();
}

void to_json(json& j, const PlatformConfig& v) {
  json rem = v.rem, saem = v.saem, aem = v.aem;
  rem.erase("generator");
  saem.erase("generator");
  aem.erase("generator");
  j = json{{"generator", v.generator}, {"evaluator", v.evaluator}, {"validity", v.validity},
           {"surrogate", v.surrogate}, {"rem", rem},                {"saem", saem},
           {"aem", aem},               {"server", v.server}};
}

void from_json(const json& j, PlatformConfig& v) {
  Reader(j, "config")
      .get("generator", v.generator)
      .get("evaluator", v.evaluator)
      .get("validity", v.validity)
      .get("surrogate", v.surrogate)
      .get("rem", v.rem)
      .get("saem", v.saem)
      .get("aem", v.aem)
      .get("server", v.server)
      .finish();
  v.rem.generator = v.generator;
  v.saem.generator = v.generator;
  v.aem.generator = v.generator;
  v.surrogate.pipeline.generator = v.generator;
  v.surrogate.pipeline.evaluator = v.evaluator;
}

PlatformConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read config " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, "config " + path + " is not JSON: " + e.what());
  }
  return j.get<PlatformConfig>();
}

json mode_config(const PlatformConfig& config, Mode mode) {
  json j = json::object();
  switch (mode) {
    case Mode::kRem: j = config.rem; break;
    case Mode::kSaem: j = config.saem; break;
    case Mode::kAem: j = config.aem; break;
  }
  j["generator"] = config.generator;
  return j;
}

}  // namespace hullspace
