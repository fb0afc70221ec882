#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <vector>

#include "hullspace/config.hpp"
#include "hullspace/geometry.hpp"
#include "hullspace/session.hpp"

namespace testing {

using namespace hullspace;

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

inline OffsetTable box_barge(double length = 100.0, double beam = 20.0, double draft = 10.0,
                             std::size_t stations = 11, std::size_t waterlines = 6) {
  OffsetTable t(linspace(0.0, length, stations), linspace(0.0, draft, waterlines));
  for (std::size_t i = 0; i < stations; ++i) {
    for (std::size_t j = 0; j < waterlines; ++j) t.breadth(i, j) = beam / 2.0;
  }
  return t;
}

/// y(x, z) = b * (1 - (2x/L - 1)^2) * (1 - ((T - z)/T)^2): smooth, closed at both ends.
inline OffsetTable parabolic_hull(std::size_t stations, std::size_t waterlines, double length = 100.0,
                                  double half_beam = 8.0, double draft = 6.0) {
  OffsetTable t(linspace(0.0, length, stations), linspace(0.0, draft, waterlines));
  for (std::size_t i = 0; i < stations; ++i) {
    const double s = 2.0 * t.stations()[i] / length - 1.0;
    for (std::size_t j = 0; j < waterlines; ++j) {
      const double r = (draft - t.waterlines()[j]) / draft;
      t.breadth(i, j) = half_beam * (1.0 - s * s) * (1.0 - r * r);
    }
  }
  return t;
}

/// Full-hull volume of parabolic_hull: 2 * b * (2L/3) * (2T/3).
inline double parabolic_volume(double length = 100.0, double half_beam = 8.0, double draft = 6.0) {
  return 2.0 * half_beam * (2.0 * length / 3.0) * (2.0 * draft / 3.0);
}

/// Smooth stand-in for the surrogate: a quadratic bowl plus a ripple.
inline double toy_cw(const LatentVector& x) {
  double s = 0.0;
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    const double c = x[d] - 0.3 - 0.02 * static_cast<double>(d % 5);
    s += c * c;
  }
  return 0.002 + 0.0004 * s + 0.0001 * std::sin(7.0 * x[0]);
}

inline std::shared_ptr<const CwPredictor> toy_predictor() {
  return std::make_shared<FunctionPredictor>(toy_cw, "toy");
}

/// Defaults shrunk so a REM pool builds in well under a second.
inline PlatformConfig small_config() {
  PlatformConfig c;
  c.rem.pool_size = 120;
  c.rem.tsne.iterations = 300;
  c.rem.tsne.exaggeration_iterations = 100;
  c.rem.tsne.perplexity = 15.0;
  return c;
}

inline SessionSpec spec_for(Mode mode, std::uint64_t seed, const PlatformConfig& config = small_config()) {
  SessionSpec s;
  s.mode = mode;
  s.seed = seed;
  s.participant_id = "t" + std::to_string(seed);
  s.session_id = s.participant_id + "-" + std::string(to_string(mode));
  s.config = mode_config(config, mode);
  return s;
}

}  // namespace testing
