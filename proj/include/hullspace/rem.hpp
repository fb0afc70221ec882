#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hullspace/embedding.hpp"
#include "hullspace/generator.hpp"
#include "hullspace/session.hpp"

namespace hullspace {

struct RemConfig {
  std::size_t pool_size = 2000;
  /// Seed of the shared pool; unset means the session seed.
  std::optional<std::uint64_t> pool_seed;
  TsneConfig tsne{};
  GeneratorConfig generator{};
};

/// Feasible design pool with its 2-D embedding; immutable once built.
struct RemPool {
  std::vector<DesignRecord> designs;
  EmbeddingMap embedding;
  std::unordered_map<std::string, std::size_t> index;

  const DesignRecord& at(const std::string& id) const;
  std::size_t index_of(const std::string& id) const;
};

/// Pool via sample_constrained(pool_size, seed), embedding seeded from the
/// same seed. Results are cached per (seed, config) for the process lifetime.
std::shared_ptr<const RemPool> build_rem_pool(std::uint64_t seed, const RemConfig& config);

class RemSession final : public ModeSession {
 public:
  static constexpr std::size_t kSlots = 5;

  struct Slot {
    std::string design_id;
    Rationale rationale = Rationale::kForm;
    bool operator==(const Slot&) const = default;
  };

  RemSession(SessionSpec spec, std::shared_ptr<const CwPredictor> predictor);

  json act(const json& action, std::int64_t t_ms) override;
  json query(const json& request) const override;
  json state() const override;
  json summary() const override;

  /// Makes the design current.
  const DesignRecord& view(const std::string& design_id, std::int64_t t_ms);
  /// Views the design nearest to a point of the embedding.
  const DesignRecord& click(double u, double v, std::int64_t t_ms);
  /// Surrogate Cw for the design; the model is called once per design.
  double evaluate(const std::string& design_id, std::int64_t t_ms);
  /// slot is 1..5; overwriting a filled slot is allowed.
  void select(std::size_t slot, const std::string& design_id, Rationale rationale, std::int64_t t_ms);
  /// Requires all five slots filled.
  void terminate(std::int64_t t_ms);

  const DesignRecord& nearest_design(double u, double v) const;
  const RemPool& pool() const { return *pool_; }
  std::optional<double> evaluated_cw(const std::string& design_id) const;
  const std::array<std::optional<Slot>, kSlots>& slots() const { return slots_; }
  const std::optional<std::string>& current() const { return current_; }
  std::size_t predictor_calls() const { return predictor_calls_.load(); }

 protected:
  void apply(const SessionEvent& event) override;

 private:
  json design_view(const DesignRecord& record) const;

  std::shared_ptr<const CwPredictor> predictor_;
  std::shared_ptr<const RemPool> pool_;
  std::map<std::string, double> evaluated_;
  std::array<std::optional<Slot>, kSlots> slots_;
  std::optional<std::string> current_;
  std::vector<std::string> visited_;
  mutable std::atomic<std::size_t> predictor_calls_{0};
};

}  // namespace hullspace
