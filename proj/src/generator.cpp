#include "hullspace/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "hullspace/error.hpp"

namespace hullspace {

namespace {

struct Range {
  double lo;
  double hi;
  double at(double t) const { return lo + (hi - lo) * t; }
};

// Shape-parameter ranges for latent coordinates 3..19. The first three
// (length, beam, draft) come from GeneratorConfig.
constexpr Range kMidbodyExtentRange{0.08, 0.36};
constexpr Range kMidbodyShiftRange{-0.035, 0.035};
constexpr Range kFlatOfBottomRange{0.6, 0.92};
constexpr Range kBilgeExponentRange{3.0, 6.5};
constexpr Range kForeWaterplaneRange{1.4, 2.6};
constexpr Range kForeSectionRange{2.0, 4.5};
constexpr Range kSectionTransitionRange{1.0, 2.4};
constexpr Range kFlatTaperRange{0.6, 2.0};
constexpr Range kBowRakeRange{0.02, 0.14};
constexpr Range kForefootRange{1.0, 3.0};
constexpr Range kAftWaterplaneRange{1.4, 3.0};
constexpr Range kAftSectionRange{2.0, 4.5};
constexpr Range kTransomWidthRange{0.25, 0.7};
constexpr Range kTransomImmersionRange{0.11, 0.35};
constexpr Range kRunRiseRange{0.05, 0.25};

constexpr double kRunProfileExponent = 1.5;

struct HullShape {
  double length;
  double beam;
  double draft;
  double aft_end;   // xi where the parallel midbody starts
  double fore_end;  // xi where it ends
  double flat;
  double bilge;
  // fore body
  double fore_waterplane;
  double fore_section;
  double fore_transition;
  double fore_flat_taper;
  double bow_rake;  // in fore-body s units
  double forefoot;
  // aft body
  double aft_waterplane;
  double aft_section;
  double aft_transition;
  double aft_flat_taper;
  double transom_width;
  double transom_bottom;  // zeta of the transom's lower edge
  double run_rise;        // in aft-body s units
};

HullShape decode(const LatentVector& x, const GeneratorConfig& config) {
  HullShape h{};
  h.length = Range{config.length_range[0], config.length_range[1]}.at(x[kLength]);
  h.beam = Range{config.beam_range[0], config.beam_range[1]}.at(x[kBeam]);
  h.draft = Range{config.draft_range[0], config.draft_range[1]}.at(x[kDraft]);
  const double extent = kMidbodyExtentRange.at(x[kMidbodyExtent]);
  const double shift = kMidbodyShiftRange.at(x[kMidbodyShift]);
  h.aft_end = 0.5 - 0.5 * extent + shift;
  h.fore_end = 0.5 + 0.5 * extent + shift;
  h.flat = kFlatOfBottomRange.at(x[kFlatOfBottom]);
  h.bilge = kBilgeExponentRange.at(x[kBilgeExponent]);

  h.fore_waterplane = kForeWaterplaneRange.at(x[kForeWaterplane]);
  h.fore_section = kForeSectionRange.at(x[kForeSection]);
  h.fore_transition = kSectionTransitionRange.at(x[kForeSectionTransition]);
  h.fore_flat_taper = kFlatTaperRange.at(x[kForeFlatTaper]);
  h.bow_rake = kBowRakeRange.at(x[kBowRake]) / (1.0 - h.fore_end);
  h.forefoot = kForefootRange.at(x[kForefoot]);

  h.aft_waterplane = kAftWaterplaneRange.at(x[kAftWaterplane]);
  h.aft_section = kAftSectionRange.at(x[kAftSection]);
  h.aft_transition = kSectionTransitionRange.at(x[kAftSectionTransition]);
  h.aft_flat_taper = kFlatTaperRange.at(x[kAftFlatTaper]);
  h.transom_width = kTransomWidthRange.at(x[kTransomWidth]);
  h.transom_bottom = 1.0 - kTransomImmersionRange.at(x[kTransomImmersion]);
  h.run_rise = kRunRiseRange.at(x[kRunRise]) / h.aft_end;
  return h;
}

// Section fullness at height zeta in [0,1]: a flat-of-bottom fraction at the
// keel rising to 1 at the waterline; larger exponents give U-shaped sections.
double section(double zeta, double flat, double exponent) {
  return flat + (1.0 - flat) * (1.0 - std::pow(1.0 - zeta, exponent));
}

double fore_fraction(const HullShape& h, double s, double zeta) {
  const double stem = 1.0 - h.bow_rake * std::pow(1.0 - zeta, h.forefoot);
  const double u = s / stem;
  if (u >= 1.0) return 0.0;
  const double waterplane = 1.0 - std::pow(u, h.fore_waterplane);
  const double exponent = h.bilge + (h.fore_section - h.bilge) * std::pow(s, h.fore_transition);
  const double flat = h.flat * std::pow(1.0 - s, h.fore_flat_taper);
  return waterplane * section(zeta, flat, exponent);
}

double aft_fraction(const HullShape& h, double s, double zeta) {
  double end = 1.0;
  double transom = 0.0;
  if (zeta < h.transom_bottom) {
    end = 1.0 - h.run_rise * std::pow((h.transom_bottom - zeta) / h.transom_bottom,
                                      kRunProfileExponent);
  } else {
    transom = h.transom_width * (zeta - h.transom_bottom) / (1.0 - h.transom_bottom);
  }
  const double u = s / end;
  if (u > 1.0) return 0.0;
  const double waterplane = 1.0 - (1.0 - transom) * std::pow(u, h.aft_waterplane);
  const double exponent = h.bilge + (h.aft_section - h.bilge) * std::pow(s, h.aft_transition);
  const double flat = h.flat * std::pow(1.0 - s, h.aft_flat_taper);
  return waterplane * section(zeta, flat, exponent);
}

double breadth_fraction(const HullShape& h, double xi, double zeta) {
  if (xi > h.fore_end) {
    return fore_fraction(h, std::min((xi - h.fore_end) / (1.0 - h.fore_end), 1.0), zeta);
  }
  if (xi < h.aft_end) {
    return aft_fraction(h, std::min((h.aft_end - xi) / h.aft_end, 1.0), zeta);
  }
  return section(zeta, h.flat, h.bilge);
}

}  // namespace

std::string_view latent_role_name(std::size_t dim) {
  static constexpr std::array<std::string_view, kLatentDim> names{
      "length",          "beam",           "draft",
      "midbody_extent",  "midbody_shift",  "flat_of_bottom",
      "bilge_exponent",  "fore_waterplane", "fore_section",
      "fore_section_transition", "fore_flat_taper", "bow_rake",
      "forefoot",        "aft_waterplane", "aft_section",
      "aft_section_transition", "aft_flat_taper", "transom_width",
      "transom_immersion", "run_rise"};
  return dim < kLatentDim ? names[dim] : std::string_view{"unknown"};
}

bool is_aft_parameter(std::size_t dim) { return dim >= kAftWaterplane && dim <= kRunRise; }

bool is_fore_parameter(std::size_t dim) { return dim >= kForeWaterplane && dim <= kForefoot; }

OffsetTable generate(const LatentVector& latent, const GeneratorConfig& config) {
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    if (!(latent[d] >= 0.0 && latent[d] <= 1.0)) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "latent dimension %zu (%s) = %g is outside [0,1]", d,
                    latent_role_name(d).data(), latent[d]);
      throw Error(ErrorKind::kOutOfBounds, buf);
    }
  }
  const HullShape h = decode(latent, config);
  const std::size_t n = config.stations;
  const std::size_t m = config.waterlines;
  std::vector<double> xs(n), zs(m);
  for (std::size_t i = 0; i < n; ++i) xs[i] = h.length * static_cast<double>(i) / double(n - 1);
  for (std::size_t j = 0; j < m; ++j) zs[j] = h.draft * static_cast<double>(j) / double(m - 1);

  OffsetTable table(std::move(xs), std::move(zs));
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i) / double(n - 1);
    for (std::size_t j = 0; j < m; ++j) {
      const double zeta = static_cast<double>(j) / double(m - 1);
      table.breadth(i, j) = 0.5 * h.beam * breadth_fraction(h, xi, zeta);
    }
  }
  return table;
}

std::string_view to_string(CwSource source) {
  switch (source) {
    case CwSource::kSurrogate: return "surrogate";
    case CwSource::kDirect: return "direct";
    case CwSource::kUnevaluated: break;
  }
  return "unevaluated";
}

CwSource cw_source_from_string(std::string_view text) {
  if (text == "surrogate") return CwSource::kSurrogate;
  if (text == "direct") return CwSource::kDirect;
  if (text == "unevaluated") return CwSource::kUnevaluated;
  throw Error(ErrorKind::kInvalidArgument, "unknown cw source: " + std::string(text));
}

DesignRecord make_design_record(std::string id, const LatentVector& latent,
                                const GeneratorConfig& config) {
  DesignRecord record;
  record.id = std::move(id);
  record.latent = latent;
  record.geometry = generate(latent, config);
  try {
    record.dimensions = compute_principal_dimensions(record.geometry);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kDegenerateHull) throw;
    record.dimensions = {};
  }
  record.constraints = check_constraints(record.dimensions, config.constraints);
  return record;
}

std::string design_id(std::string_view prefix, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06zu", index);
  return std::string(prefix) + buf;
}

std::vector<DesignRecord> sample_constrained(std::size_t count, std::uint64_t seed,
                                             const GeneratorConfig& config) {
  std::vector<DesignRecord> out;
  if (count == 0) return out;
  out.reserve(count);
  std::mt19937_64 rng(seed);
  std::size_t drawn = 0;
  while (out.size() < count) {
    LatentVector x;
    for (std::size_t d = 0; d < kLatentDim; ++d) x[d] = uniform01(rng);
    ++drawn;
    DesignRecord record = make_design_record(design_id("d", out.size()), x, config);
    if (record.constraints.all_satisfied) out.push_back(std::move(record));
    if (drawn == config.probe_batch) {
      const double rate = static_cast<double>(out.size()) / static_cast<double>(drawn);
      if (rate < config.rejection_floor) {
        char buf[200];
        std::snprintf(buf, sizeof buf,
                      "only %.3f%% of %zu probe designs satisfy the constraints (floor %.3f%%); "
                      "recalibrate the generator dimension ranges",
                      100.0 * rate, drawn, 100.0 * config.rejection_floor);
        throw Error(ErrorKind::kInfeasible, buf);
      }
    }
  }
  return out;
}

double estimate_acceptance_rate(std::size_t samples, std::uint64_t seed,
                                const GeneratorConfig& config) {
  const auto latents = random_sample(DesignSpaceBounds::root(), samples, seed);
  std::size_t ok = 0;
  for (const auto& x : latents) {
    if (make_design_record({}, x, config).constraints.all_satisfied) ++ok;
  }
  return samples == 0 ? 0.0 : static_cast<double>(ok) / static_cast<double>(samples);
}

}  // namespace hullspace
