#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hullspace/events.hpp"
#include "hullspace/latent.hpp"

namespace hullspace {

struct DiversityReport {
  LatentVector centroid;
  double sc = 0.0;
  std::size_t n = 0;
};

/// Mean Euclidean distance of the designs from their centroid. Throws
/// kInvalidArgument for an empty set.
DiversityReport sparseness_at_centre(const std::vector<LatentVector>& designs);

/// Telemetry folded from one session log. Times are in seconds.
struct DesignHistory {
  std::string session_id;
  std::string participant_id;
  Mode mode = Mode::kRem;
  bool completed = false;
  double total_time = 0.0;
  /// REM: one entry per view, lasting until the next view (the last one
  /// until termination). SAEM/AEM: each generation's display interval split
  /// evenly over its designs.
  std::vector<double> per_design_times;
  std::size_t designs_explored = 0;
  /// Cw values the participant saw: REM evaluations, SAEM/AEM shown designs.
  std::vector<double> explored_cw;
  /// REM: the final five slots (Cw only where evaluated). SAEM/AEM: every
  /// interaction's selection.
  std::vector<LatentVector> preferred;
  std::vector<double> preferred_cw;
  std::array<std::size_t, 3> rationale_counts{};  // form, performance, both
  std::size_t interactions = 0;
  /// REM: visited embedding points. AEM: weight history. SAEM: bounds
  /// trajectory.
  json mode_specific = json::object();

  std::size_t rationale_count(Rationale r) const { return rationale_counts[static_cast<std::size_t>(r)]; }
  json to_json() const;
};

/// Pure fold over a log; throws kLogIntegrity for a malformed one.
DesignHistory aggregate_history(const std::vector<SessionEvent>& events);

/// Per-session row of the cross-mode comparison.
struct ModeSessionRow {
  std::string session_id;
  std::string participant_id;
  Mode mode = Mode::kRem;
  double total_time = 0.0;
  std::size_t designs_explored = 0;
  std::size_t preferred_count = 0;
  double sc_preferred = 0.0;
  std::optional<double> mean_preferred_cw;
  std::optional<double> min_preferred_cw;
};

struct ModeDistribution {
  Mode mode = Mode::kRem;
  std::size_t sessions = 0;
  double median_total_time = 0.0;
  double median_sc = 0.0;
  std::optional<double> median_preferred_cw;
};

struct CrossModeReport {
  std::vector<ModeSessionRow> rows;
  std::array<ModeDistribution, 3> modes{};

  /// One line per session under a fixed header.
  std::string to_csv() const;
  std::string to_text() const;
};

/// Requires at least one completed session per mode (kMissingMode).
/// Incomplete sessions are ignored.
CrossModeReport cross_mode_report(const std::vector<std::vector<SessionEvent>>& logs);

double median(std::vector<double> values);

}  // namespace hullspace
