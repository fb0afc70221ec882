#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hullspace/geometry.hpp"
#include "hullspace/latent.hpp"

namespace hullspace {

/// Roles of the 20 latent coordinates in the procedural hull family.
/// Global parameters shape the whole hull; fore parameters only touch
/// stations forward of the parallel midbody, aft parameters only stations
/// behind it. The midbody always straddles midship.
enum LatentRole : std::size_t {
  kLength = 0,
  kBeam,
  kDraft,
  kMidbodyExtent,
  kMidbodyShift,
  kFlatOfBottom,
  kBilgeExponent,
  kForeWaterplane,
  kForeSection,
  kForeSectionTransition,
  kForeFlatTaper,
  kBowRake,
  kForefoot,
  kAftWaterplane,
  kAftSection,
  kAftSectionTransition,
  kAftFlatTaper,
  kTransomWidth,
  kTransomImmersion,
  kRunRise,
};

std::string_view latent_role_name(std::size_t dim);
bool is_aft_parameter(std::size_t dim);
bool is_fore_parameter(std::size_t dim);

struct GeneratorConfig {
  // Affine maps from the first three latent coordinates to metres. The
  // length range is the nominal stem-to-transom length; the measured
  // waterline length is (stations - 2) / (stations - 1) of it because the
  // stem station carries zero breadth.
  std::array<double, 2> length_range{222.5, 251.3};
  std::array<double, 2> beam_range{30.25, 34.15};
  std::array<double, 2> draft_range{10.2, 11.4};
  std::size_t stations = 60;
  std::size_t waterlines = 20;
  /// sample_constrained aborts if fewer than this fraction of the probe
  /// batch is feasible.
  double rejection_floor = 0.01;
  std::size_t probe_batch = 1000;
  ConstraintBounds constraints{};
};

/// Deterministic procedural hull: 20-D latent in [0,1]^20 -> offset table.
OffsetTable generate(const LatentVector& latent, const GeneratorConfig& config = {});

enum class CwSource { kUnevaluated, kSurrogate, kDirect };

std::string_view to_string(CwSource source);
CwSource cw_source_from_string(std::string_view text);

struct DesignRecord {
  std::string id;
  LatentVector latent;
  OffsetTable geometry;
  PrincipalDimensions dimensions;
  ConstraintReport constraints;
  std::optional<double> cw;
  CwSource cw_source = CwSource::kUnevaluated;

  void attach_cw(double value, CwSource source) {
    cw = value;
    cw_source = source;
  }
};

/// Generates the geometry for `latent` and evaluates dimensions and constraints.
/// A hull whose top waterline collapses gets zero dimensions and fails every
/// constraint rather than throwing.
DesignRecord make_design_record(std::string id, const LatentVector& latent,
                                const GeneratorConfig& config = {});

/// Rejection sampling of feasible designs. Records are numbered in acceptance
/// order with ids "d000000", "d000001", ...
std::vector<DesignRecord> sample_constrained(std::size_t count, std::uint64_t seed,
                                             const GeneratorConfig& config = {});

/// Fraction of uniform root-box samples that satisfy every constraint.
double estimate_acceptance_rate(std::size_t samples, std::uint64_t seed,
                                const GeneratorConfig& config = {});

std::string design_id(std::string_view prefix, std::size_t index);

}  // namespace hullspace
