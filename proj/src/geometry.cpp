#include "hullspace/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "hullspace/error.hpp"

namespace hullspace {

namespace {

// Composite trapezoid weights for an arbitrary (sorted) abscissa set.
std::vector<double> trapezoid_weights(const std::vector<double>& nodes) {
  std::vector<double> w(nodes.size(), 0.0);
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const double h = nodes[i + 1] - nodes[i];
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

void require_resolution(const OffsetTable& offsets) {
  if (offsets.station_count() < kMinStations ||
      offsets.waterline_count() < kMinWaterlines) {
    std::ostringstream msg;
    msg << "offset table " << offsets.station_count() << "x"
        << offsets.waterline_count() << " is below the minimum grid of "
        << kMinStations << " stations x " << kMinWaterlines << " waterlines";
    throw Error(ErrorKind::kResolutionBelowFloor, msg.str());
  }
}

}  // namespace

OffsetTable::OffsetTable(std::vector<double> stations, std::vector<double> waterlines,
                         std::vector<double> half_breadths)
    : stations_(std::move(stations)),
      waterlines_(std::move(waterlines)),
      half_breadths_(std::move(half_breadths)) {
  if (half_breadths_.size() != stations_.size() * waterlines_.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "half-breadth matrix size does not match stations x waterlines");
  }
}

OffsetTable::OffsetTable(std::vector<double> stations, std::vector<double> waterlines)
    : stations_(std::move(stations)), waterlines_(std::move(waterlines)) {
  half_breadths_.assign(stations_.size() * waterlines_.size(), 0.0);
}

OffsetTable OffsetTable::mirrored_fore_aft() const {
  const std::size_t n = stations_.size();
  const std::size_t m = waterlines_.size();
  std::vector<double> xs(n);
  const double sum = n == 0 ? 0.0 : stations_.front() + stations_.back();
  for (std::size_t i = 0; i < n; ++i) xs[i] = sum - stations_[n - 1 - i];
  std::vector<double> ys(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) ys[i * m + j] = breadth(n - 1 - i, j);
  }
  return OffsetTable(std::move(xs), waterlines_, std::move(ys));
}

OffsetTable OffsetTable::scaled_breadths(double factor) const {
  OffsetTable out = *this;
  for (double& y : out.half_breadths_) y *= factor;
  return out;
}

double ConstraintReport::normalized_violation() const {
  double total = 0.0;
  for (const auto& c : checks) {
    const double width = c.upper - c.lower;
    if (c.value < c.lower) total += (c.lower - c.value) / width;
    if (c.value > c.upper) total += (c.value - c.upper) / width;
  }
  return total;
}

GeometricMoments compute_moments(const OffsetTable& offsets) {
  require_resolution(offsets);
  const auto& xs = offsets.stations();
  const auto& zs = offsets.waterlines();
  const auto wx = trapezoid_weights(xs);
  const auto wz = trapezoid_weights(zs);

  // Full hull: integrate over y in [-h, h] analytically, then trapezoid in x, z.
  double volume = 0.0, mx = 0.0, mz = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < zs.size(); ++j) {
      const double dv = 2.0 * offsets.breadth(i, j) * wx[i] * wz[j];
      volume += dv;
      mx += xs[i] * dv;
      mz += zs[j] * dv;
    }
  }

  GeometricMoments out;
  out.volume = volume;
  if (volume <= 0.0) return out;
  out.centroid = {mx / volume, 0.0, mz / volume};

  SecondMoments& s = out.second_moments;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - out.centroid.x;
    for (std::size_t j = 0; j < zs.size(); ++j) {
      const double h = offsets.breadth(i, j);
      const double w = wx[i] * wz[j];
      const double dz = zs[j] - out.centroid.z;
      const double dv = 2.0 * h * w;
      s.xx += dx * dx * dv;
      s.zz += dz * dz * dv;
      s.xz += dx * dz * dv;
      s.yy += (2.0 / 3.0) * h * h * h * w;
    }
  }
  return out;
}

PrincipalDimensions compute_principal_dimensions(const OffsetTable& offsets) {
  require_resolution(offsets);
  const std::size_t top = offsets.waterline_count() - 1;
  std::size_t first = offsets.station_count();
  std::size_t last = 0;
  double max_half = 0.0;
  for (std::size_t i = 0; i < offsets.station_count(); ++i) {
    const double y = offsets.breadth(i, top);
    if (y > 0.0) {
      first = std::min(first, i);
      last = std::max(last, i);
      max_half = std::max(max_half, y);
    }
  }
  if (first == offsets.station_count()) {
    throw Error(ErrorKind::kDegenerateHull, "all half-breadths are zero at the top waterline");
  }
  PrincipalDimensions dims;
  dims.length_waterline = offsets.stations()[last] - offsets.stations()[first];
  dims.beam_waterline = 2.0 * max_half;
  dims.draft = offsets.waterlines().back() - offsets.waterlines().front();
  dims.displacement_volume = compute_moments(offsets).volume;
  return dims;
}

ConstraintReport check_constraints(const PrincipalDimensions& dims,
                                   const ConstraintBounds& bounds) {
  ConstraintReport report;
  auto add = [&](const char* name, double value, const std::array<double, 2>& range) {
    const bool ok = value >= range[0] && value <= range[1];
    report.checks.push_back({name, value, range[0], range[1], ok});
  };
  add("displacement", dims.displacement_volume, bounds.displacement);
  add("length_waterline", dims.length_waterline, bounds.length_waterline);
  add("beam_waterline", dims.beam_waterline, bounds.beam_waterline);
  add("draft", dims.draft, bounds.draft);
  report.all_satisfied = std::all_of(report.checks.begin(), report.checks.end(),
                                     [](const ConstraintCheck& c) { return c.satisfied; });
  return report;
}

ValidityReport validate_geometry(const OffsetTable& offsets, const ValidityOptions& options) {
  ValidityReport report;
  auto fail = [&](std::string issue) {
    report.valid = false;
    report.issues.push_back(std::move(issue));
  };

  if (offsets.station_count() < kMinStations || offsets.waterline_count() < kMinWaterlines) {
    fail("grid below minimum resolution");
  }
  const auto& xs = offsets.stations();
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (!(xs[i + 1] > xs[i])) fail("stations not strictly increasing at index " + std::to_string(i + 1));
  }
  const auto& zs = offsets.waterlines();
  for (std::size_t j = 0; j + 1 < zs.size(); ++j) {
    if (!(zs[j + 1] > zs[j])) fail("waterlines not strictly increasing at index " + std::to_string(j + 1));
  }

  const std::size_t m = offsets.waterline_count();
  for (std::size_t i = 0; i < offsets.station_count(); ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const double y = offsets.breadth(i, j);
      const std::string at = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      if (!std::isfinite(y)) {
        fail("non-finite breadth at " + at);
      } else if (y < 0.0) {
        fail("negative breadth at " + at);
      }
    }
    // Fold-over: compare each waterline against the narrowest breadth above it.
    double narrowest_above = std::numeric_limits<double>::infinity();
    for (std::size_t j = m; j-- > 0;) {
      const double y = offsets.breadth(i, j);
      if (std::isfinite(y) && y > narrowest_above + options.envelope_tolerance) {
        fail("fold-over at (" + std::to_string(i) + "," + std::to_string(j) + ")");
      }
      if (std::isfinite(y)) narrowest_above = std::min(narrowest_above, y);
    }
  }
  return report;
}

void write_offsets(std::ostream& out, const OffsetTable& offsets) {
  const auto old_precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "stations " << offsets.station_count() << " waterlines " << offsets.waterline_count()
      << '\n';
  auto line = [&](auto begin, auto end) {
    for (auto it = begin; it != end; ++it) out << (it == begin ? "" : " ") << *it;
    out << '\n';
  };
  line(offsets.stations().begin(), offsets.stations().end());
  line(offsets.waterlines().begin(), offsets.waterlines().end());
  const auto& ys = offsets.half_breadths();
  const std::size_t m = offsets.waterline_count();
  for (std::size_t i = 0; i < offsets.station_count(); ++i) {
    line(ys.begin() + static_cast<std::ptrdiff_t>(i * m),
         ys.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
  }
  out.precision(old_precision);
}

OffsetTable read_offsets(std::istream& in) {
  std::string k1, k2;
  std::size_t n = 0, m = 0;
  if (!(in >> k1 >> n >> k2 >> m) || k1 != "stations" || k2 != "waterlines") {
    throw Error(ErrorKind::kIo, "offset table header must read 'stations N waterlines M'");
  }
  auto read_values = [&](std::size_t count, const char* what) {
    std::vector<double> v(count);
    for (auto& x : v) {
      if (!(in >> x)) throw Error(ErrorKind::kIo, std::string("truncated offset table: ") + what);
    }
    return v;
  };
  auto xs = read_values(n, "stations");
  auto zs = read_values(m, "waterlines");
  auto ys = read_values(n * m, "half-breadths");
  return OffsetTable(std::move(xs), std::move(zs), std::move(ys));
}

std::string to_offsets_text(const OffsetTable& offsets) {
  std::ostringstream out;
  write_offsets(out, offsets);
  return out.str();
}

OffsetTable parse_offsets_text(const std::string& text) {
  std::istringstream in(text);
  return read_offsets(in);
}

}  // namespace hullspace
