#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace hullspace {

inline constexpr std::size_t kMinStations = 10;
inline constexpr std::size_t kMinWaterlines = 5;

/// Half-hull offsets: half-breadth y at every (station x, waterline z) node.
/// Port/starboard symmetry is implicit. Waterline z = 0 is the keel and the
/// last waterline is the design draft.
class OffsetTable {
 public:
  OffsetTable() = default;
  OffsetTable(std::vector<double> stations, std::vector<double> waterlines,
              std::vector<double> half_breadths);
  /// All-zero table on the given grid.
  OffsetTable(std::vector<double> stations, std::vector<double> waterlines);

  std::size_t station_count() const noexcept { return stations_.size(); }
  std::size_t waterline_count() const noexcept { return waterlines_.size(); }

  const std::vector<double>& stations() const noexcept { return stations_; }
  const std::vector<double>& waterlines() const noexcept { return waterlines_; }
  /// Row-major, one row of waterline_count() values per station.
  const std::vector<double>& half_breadths() const noexcept { return half_breadths_; }

  double breadth(std::size_t station, std::size_t waterline) const {
    return half_breadths_[station * waterlines_.size() + waterline];
  }
  double& breadth(std::size_t station, std::size_t waterline) {
    return half_breadths_[station * waterlines_.size() + waterline];
  }

  /// Fore-aft mirror: x -> (x_first + x_last) - x, station order reversed.
  OffsetTable mirrored_fore_aft() const;
  /// Multiplies every half-breadth by `factor`.
  OffsetTable scaled_breadths(double factor) const;

  bool operator==(const OffsetTable&) const = default;

 private:
  std::vector<double> stations_;
  std::vector<double> waterlines_;
  std::vector<double> half_breadths_;
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  bool operator==(const Vec3&) const = default;
};

/// Second-order moments about the centroid, m^5.
struct SecondMoments {
  double xx = 0.0;
  double yy = 0.0;
  double zz = 0.0;
  double xy = 0.0;
  double xz = 0.0;
  double yz = 0.0;
  bool operator==(const SecondMoments&) const = default;
};

struct GeometricMoments {
  double volume = 0.0;
  Vec3 centroid;
  SecondMoments second_moments;
};

struct PrincipalDimensions {
  double length_waterline = 0.0;
  double beam_waterline = 0.0;
  double draft = 0.0;
  double displacement_volume = 0.0;
  bool operator==(const PrincipalDimensions&) const = default;
};

struct ConstraintCheck {
  std::string name;
  double value = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool satisfied = false;
  bool operator==(const ConstraintCheck&) const = default;
};

struct ConstraintReport {
  std::vector<ConstraintCheck> checks;
  bool all_satisfied = false;

  /// Sum over constraints of the distance outside [lower, upper], each
  /// divided by its interval width.
  double normalized_violation() const;
  bool operator==(const ConstraintReport&) const = default;
};

/// Closed intervals on the principal dimensions of a 3600 TEU container ship.
struct ConstraintBounds {
  std::array<double, 2> displacement{51120.5, 56501.6};
  std::array<double, 2> length_waterline{220.9, 244.2};
  std::array<double, 2> beam_waterline{30.6, 33.8};
  std::array<double, 2> draft{10.3, 11.3};
};

struct ValidityReport {
  bool valid = true;
  std::vector<std::string> issues;
};

struct ValidityOptions {
  /// A lower waterline may exceed the narrowest breadth above it by at most
  /// this many metres before it counts as fold-over.
  double envelope_tolerance = 0.05;
};

GeometricMoments compute_moments(const OffsetTable& offsets);

PrincipalDimensions compute_principal_dimensions(const OffsetTable& offsets);

ConstraintReport check_constraints(const PrincipalDimensions& dims,
                                   const ConstraintBounds& bounds = {});

ValidityReport validate_geometry(const OffsetTable& offsets,
                                 const ValidityOptions& options = {});

/// Plain-text offset table:
///   stations N waterlines M
///   x_0 ... x_{N-1}
///   z_0 ... z_{M-1}
///   N lines of M half-breadths
void write_offsets(std::ostream& out, const OffsetTable& offsets);
OffsetTable read_offsets(std::istream& in);
std::string to_offsets_text(const OffsetTable& offsets);
OffsetTable parse_offsets_text(const std::string& text);

}  // namespace hullspace
