#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "hullspace/aem.hpp"
#include "hullspace/embedding.hpp"
#include "hullspace/generator.hpp"
#include "hullspace/geometry.hpp"
#include "hullspace/hydro.hpp"
#include "hullspace/rem.hpp"
#include "hullspace/saem.hpp"
#include "hullspace/surrogate.hpp"

namespace hullspace {

struct SurrogateSettings {
  std::size_t samples = 2000;
  std::uint64_t seed = 42;
  /// Trained model file; trained and written here when missing.
  std::string model_path = "surrogate.json";
  SurrogatePipelineConfig pipeline{};
};

struct ServerSettings {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string data_dir = "data";
  std::uint64_t seed = 1;
};

/// Everything configurable, loaded from one JSON document. Omitted keys keep
/// their defaults; unknown keys are rejected. The top-level generator block
/// is shared by the pipeline and all three modes.
struct PlatformConfig {
  GeneratorConfig generator{};
  EvaluatorConfig evaluator{};
  ValidityOptions validity{};
  SurrogateSettings surrogate{};
  RemConfig rem{};
  SaemConfig saem{};
  AemConfig aem{};
  ServerSettings server{};
};

void to_json(json& j, const ConstraintBounds& v);
void from_json(const json& j, ConstraintBounds& v);
void to_json(json& j, const GeneratorConfig& v);
void from_json(const json& j, GeneratorConfig& v);
void to_json(json& j, const ThinShipSettings& v);
void from_json(const json& j, ThinShipSettings& v);
void to_json(json& j, const EvaluatorConfig& v);
void from_json(const json& j, EvaluatorConfig& v);
void to_json(json& j, const ValidityOptions& v);
void from_json(const json& j, ValidityOptions& v);
void to_json(json& j, const GprFitConfig& v);
void from_json(const json& j, GprFitConfig& v);
void to_json(json& j, const TsneConfig& v);
void from_json(const json& j, TsneConfig& v);
void to_json(json& j, const PreferenceWeights& v);
void from_json(const json& j, PreferenceWeights& v);
void to_json(json& j, const RemConfig& v);
void from_json(const json& j, RemConfig& v);
void to_json(json& j, const SaemConfig& v);
void from_json(const json& j, SaemConfig& v);
void to_json(json& j, const AemConfig& v);
void from_json(const json& j, AemConfig& v);
void to_json(json& j, const SurrogateSettings& v);
void from_json(const json& j, SurrogateSettings& v);
void to_json(json& j, const ServerSettings& v);
void from_json(const json& j, ServerSettings& v);
void to_json(json& j, const PlatformConfig& v);
void from_json(const json& j, PlatformConfig& v);

PlatformConfig load_config(const std::string& path);

/// Mode configuration block for a session spec.
json mode_config(const PlatformConfig& config, Mode mode);

}  // namespace hullspace
