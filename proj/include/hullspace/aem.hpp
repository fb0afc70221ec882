#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "hullspace/generator.hpp"
#include "hullspace/session.hpp"

namespace hullspace {

struct PreferenceWeights {
  double gamma1 = 0.7;  // performance
  double gamma2 = 0.3;  // closeness to the preferred design
  bool operator==(const PreferenceWeights&) const = default;
};

/// Min-max scaling of Cw over a population, frozen while a generation runs.
/// Candidates outside the frozen range saturate at 0 or 1.
struct CwNormalization {
  double lo = 0.0;
  double hi = 1.0;
  double operator()(double cw) const { return hi > lo ? std::clamp((cw - lo) / (hi - lo), 0.0, 1.0) : 0.0; }
  static CwNormalization over(const std::vector<double>& cws);
};

/// Latent distance divided by the diagonal of the root box.
double normalized_distance(const LatentVector& a, const LatentVector& b);

/// F = gamma1 * cw_normalized + gamma2 * distance_normalized + penalty. A
/// feasible candidate (violation 0) has no penalty; an infeasible one pays
/// gamma1 + gamma2 + violation, so it scores above every feasible candidate.
double preference_objective(double cw_normalized, double distance_normalized, double violation,
                            const PreferenceWeights& weights);

/// As above with the distance taken to the preferred design. Throws
/// kInvalidArgument when gamma2 > 0 and there is no preferred design.
double preference_objective(double cw_normalized, const LatentVector& x,
                            const std::optional<LatentVector>& preferred, double violation,
                            const PreferenceWeights& weights);

struct AemConfig {
  std::size_t population = 50;
  std::size_t steps_per_interaction = 20;
  std::size_t top_n = 5;
  PreferenceWeights initial_weights{};
  /// Continue the population across interactions; false restarts it from a
  /// fresh seeded sample at every interaction.
  bool warm_start = true;
  std::size_t min_interactions = 16;
  std::size_t max_interactions = 25;
  GeneratorConfig generator{};
};

struct AemCandidate {
  LatentVector latent;
  double cw = 0.0;
  double violation = 0.0;  // ConstraintReport::normalized_violation
  bool operator==(const AemCandidate&) const = default;
};

AemCandidate evaluate_candidate(const LatentVector& x, const CwPredictor& predictor,
                                const GeneratorConfig& generator);

/// Indices of the n lowest-F candidates with distinct latents, feasible ones
/// first; infeasible ones only pad a short list.
std::vector<std::size_t> present_top(const std::vector<AemCandidate>& population,
                                     const std::vector<double>& objective, std::size_t n);

class AemSession final : public ModeSession {
 public:
  AemSession(SessionSpec spec, std::shared_ptr<const CwPredictor> predictor);

  json act(const json& action, std::int64_t t_ms) override;
  json query(const json& request) const override;
  json state() const override;
  json summary() const override;

  /// Moves the weight sliders; they take effect at the next generation.
  void set_weights(const PreferenceWeights& weights, std::int64_t t_ms);
  /// Runs steps_per_interaction Jaya steps and presents the top designs.
  const std::vector<DesignRecord>& next_generation(std::int64_t t_ms);
  /// Selects the preferred design; optional weights become the sliders for
  /// the next interaction.
  void select(const std::string& design_id, Rationale rationale,
              std::optional<PreferenceWeights> next_weights, std::int64_t t_ms);
  void terminate(std::int64_t t_ms);

  const AemConfig& config() const { return config_; }
  const std::vector<AemCandidate>& population() const { return population_; }
  const std::vector<double>& objective() const { return objective_; }
  const PreferenceWeights& sliders() const { return sliders_; }
  /// Weights the next generation will use (gamma2 = 0 until a design is preferred).
  PreferenceWeights effective_weights() const;
  const std::vector<PreferenceWeights>& weight_history() const { return weight_history_; }
  std::size_t interaction_count() const { return selections_.size(); }
  const std::vector<DesignRecord>& presented() const { return presented_; }
  bool generation_pending() const { return pending_; }
  const std::vector<DesignRecord>& selected_history() const { return selections_; }
  std::optional<LatentVector> preferred() const;
  /// Population-best F after each Jaya step of the last generation.
  const std::vector<double>& best_trace() const { return best_trace_; }
  std::size_t shown_count() const { return shown_; }

 protected:
  void apply(const SessionEvent& event) override;

 private:
  AemConfig config_;
  std::shared_ptr<const CwPredictor> predictor_;
  std::vector<AemCandidate> population_;
  std::vector<double> objective_;
  CwNormalization normalization_;
  PreferenceWeights sliders_;
  PreferenceWeights generation_weights_;
  std::vector<PreferenceWeights> weight_history_;
  std::vector<DesignRecord> presented_;
  bool pending_ = false;
  std::vector<DesignRecord> selections_;
  std::vector<Rationale> rationales_;
  std::vector<double> best_trace_;
  std::size_t shown_ = 0;
};

}  // namespace hullspace
