#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "hullspace/generator.hpp"
#include "hullspace/session.hpp"

namespace hullspace {

struct SaemConfig {
  double beta = 0.85;
  std::size_t designs_per_interaction = 5;
  std::size_t min_interactions = 16;
  std::size_t max_interactions = 25;
  /// Extra uniform draws per infeasible stratified point before the least
  /// violating draw is kept and flagged.
  std::size_t retry_cap = 50;
  GeneratorConfig generator{};
};

/// Space shrinking: every dimension's interval becomes beta times as wide,
/// centred on the chosen coordinate and shifted (never widened) to stay
/// inside the current interval.
DesignSpaceBounds shrink_bounds(const DesignSpaceBounds& current, const LatentVector& chosen,
                                double beta);

class SaemSession final : public ModeSession {
 public:
  SaemSession(SessionSpec spec, std::shared_ptr<const CwPredictor> predictor);

  json act(const json& action, std::int64_t t_ms) override;
  json query(const json& request) const override;
  json state() const override;
  json summary() const override;

  /// Shows the next designs_per_interaction designs with their Cw.
  const std::vector<DesignRecord>& next_generation(std::int64_t t_ms);
  void select(const std::string& design_id, Rationale rationale, std::int64_t t_ms);
  void terminate(std::int64_t t_ms);

  const SaemConfig& config() const { return config_; }
  const DesignSpaceBounds& bounds() const { return bounds_; }
  /// Bounds in force at the start of each interaction, then the current ones.
  const std::vector<DesignSpaceBounds>& bounds_trajectory() const { return trajectory_; }
  std::size_t interaction_count() const { return selections_.size(); }
  const std::vector<DesignRecord>& generation() const { return generation_; }
  bool generation_pending() const { return pending_; }
  const std::vector<DesignRecord>& selected_history() const { return selections_; }
  std::size_t shown_count() const { return shown_; }

 protected:
  void apply(const SessionEvent& event) override;

 private:
  std::vector<DesignRecord> draw_generation(std::size_t interaction) const;

  SaemConfig config_;
  std::shared_ptr<const CwPredictor> predictor_;
  DesignSpaceBounds bounds_;
  std::vector<DesignSpaceBounds> trajectory_;
  std::vector<DesignRecord> generation_;
  bool pending_ = false;
  std::vector<DesignRecord> selections_;
  std::vector<Rationale> rationales_;
  std::size_t shown_ = 0;
};

}  // namespace hullspace
