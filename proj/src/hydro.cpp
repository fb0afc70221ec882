#include "hullspace/hydro.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "hullspace/error.hpp"

namespace hullspace {

namespace {

using cplx = std::complex<double>;

constexpr std::array<double, 8> kGaussNodes{
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussWeights{
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// E1(w) = (e^w - 1)/w and E2(w) = (e^w (w - 1) + 1)/w^2, i.e. the integrals
// of e^{wt} and t e^{wt} over t in [0,1]. Series near zero avoids cancellation.
template <typename T>
void exp_moments(T w, T& e1, T& e2) {
  if (std::abs(w) < 1.0) {
    T term = T(1.0);  // w^k / k!
    e1 = T(0.0);
    e2 = T(0.0);
    for (int k = 0; k < 24; ++k) {
      e1 += term / double(k + 1);
      e2 += term / double(k + 2);
      term *= w / double(k + 1);
    }
    return;
  }
  const T ew = std::exp(w);
  e1 = (ew - T(1.0)) / w;
  e2 = (ew * (w - T(1.0)) + T(1.0)) / (w * w);
}

// Sparse linear map from a coarse axis to one refined `factor` times by
// uniform Catmull-Rom interpolation in index space, with linearly
// extrapolated ghost nodes at both ends.
struct Refinement {
  struct Entry {
    std::size_t fine;
    std::size_t coarse;
    double weight;
  };
  std::size_t fine_count = 0;
  std::vector<Entry> entries;
};

Refinement catmull_rom_refinement(std::size_t n, int factor) {
  Refinement r;
  if (n < 3 || factor <= 1) {
    r.fine_count = n;
    for (std::size_t i = 0; i < n; ++i) r.entries.push_back({i, i, 1.0});
    return r;
  }
  r.fine_count = (n - 1) * static_cast<std::size_t>(factor) + 1;
  auto add = [&](std::size_t fine, long coarse, double w) {
    // ghost node -1 = 2 y0 - y1, ghost node n = 2 y_{n-1} - y_{n-2}
    const long last = static_cast<long>(n) - 1;
    if (coarse < 0) {
      r.entries.push_back({fine, 0, 2.0 * w});
      r.entries.push_back({fine, 1, -w});
    } else if (coarse > last) {
      r.entries.push_back({fine, static_cast<std::size_t>(last), 2.0 * w});
      r.entries.push_back({fine, static_cast<std::size_t>(last - 1), -w});
    } else {
      r.entries.push_back({fine, static_cast<std::size_t>(coarse), w});
    }
  };
  for (std::size_t k = 0; k + 1 < n; ++k) {
    for (int s = 0; s < factor; ++s) {
      const double t = static_cast<double>(s) / factor;
      const double t2 = t * t, t3 = t2 * t;
      const std::size_t fine = k * static_cast<std::size_t>(factor) + static_cast<std::size_t>(s);
      const long c = static_cast<long>(k);
      add(fine, c - 1, 0.5 * (-t + 2.0 * t2 - t3));
      add(fine, c, 0.5 * (2.0 - 5.0 * t2 + 3.0 * t3));
      add(fine, c + 1, 0.5 * (t + 4.0 * t2 - 3.0 * t3));
      add(fine, c + 2, 0.5 * (-t2 + t3));
    }
  }
  r.entries.push_back({r.fine_count - 1, n - 1, 1.0});
  return r;
}

std::vector<double> refine(const Refinement& r, const std::vector<double>& coarse) {
  std::vector<double> fine(r.fine_count, 0.0);
  for (const auto& e : r.entries) fine[e.fine] += e.weight * coarse[e.coarse];
  return fine;
}

// Cubic refinement is only used on uniformly spaced axes.
bool is_uniform(const std::vector<double>& v) {
  if (v.size() < 3) return false;
  const double h = (v.back() - v.front()) / static_cast<double>(v.size() - 1);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    if (std::abs(v[i + 1] - v[i] - h) > 1e-9 * std::abs(h)) return false;
  }
  return true;
}

// Kernel-weighted integrals of piecewise-linear hat functions on the refined
// grid, folded back onto the coarse nodes through the refinement maps.
class MichellKernel {
 public:
  MichellKernel(const OffsetTable& offsets, int factor)
      : offsets_(offsets),
        rx_(catmull_rom_refinement(offsets.station_count(),
                                   is_uniform(offsets.stations()) ? factor : 1)),
        rz_(catmull_rom_refinement(offsets.waterline_count(),
                                   is_uniform(offsets.waterlines()) ? factor : 1)),
        xs_(refine(rx_, offsets.stations())),
        zs_(refine(rz_, offsets.waterlines())),
        uniform_x_(is_uniform(xs_)),
        a_fine_(xs_.size()),
        b_fine_(zs_.size()),
        a_(offsets.station_count()),
        b_(offsets.waterline_count()) {}

  // |S(lambda)|^2 where S = sum_ij Y_ij A_i(kappa) B_j(mu).
  double source_magnitude_sq(double kappa, double mu) {
    const std::size_t nf = xs_.size();
    const std::size_t mf = zs_.size();

    std::fill(a_fine_.begin(), a_fine_.end(), cplx(0.0));
    if (uniform_x_) {
      const double h = xs_[1] - xs_[0];
      cplx e1, e2;
      exp_moments(cplx(0.0, kappa * h), e1, e2);
      const cplx step = std::polar(1.0, kappa * h);
      cplx base = std::polar(h, kappa * xs_[0]);
      for (std::size_t k = 0; k + 1 < nf; ++k) {
        a_fine_[k] += base * (e1 - e2);
        a_fine_[k + 1] += base * e2;
        // re-anchor periodically to bound the drift of the running product
        base = (k % 32 == 31) ? std::polar(h, kappa * xs_[k + 1]) : base * step;
      }
    } else {
      for (std::size_t k = 0; k + 1 < nf; ++k) {
        const double h = xs_[k + 1] - xs_[k];
        const cplx base = std::polar(h, kappa * xs_[k]);
        cplx e1, e2;
        exp_moments(cplx(0.0, kappa * h), e1, e2);
        a_fine_[k] += base * (e1 - e2);
        a_fine_[k + 1] += base * e2;
      }
    }

    std::fill(b_fine_.begin(), b_fine_.end(), 0.0);
    const double top = zs_.back();
    double e1 = 0.0, e2 = 0.0, last_h = -1.0;
    for (std::size_t k = 0; k + 1 < mf; ++k) {
      const double h = zs_[k + 1] - zs_[k];
      const double base = std::exp(-mu * (top - zs_[k + 1])) * h;
      if (h != last_h) {
        exp_moments(-mu * h, e1, e2);
        last_h = h;
      }
      b_fine_[k + 1] += base * (e1 - e2);
      b_fine_[k] += base * e2;
    }

    std::fill(a_.begin(), a_.end(), cplx(0.0));
    for (const auto& e : rx_.entries) a_[e.coarse] += e.weight * a_fine_[e.fine];
    std::fill(b_.begin(), b_.end(), 0.0);
    for (const auto& e : rz_.entries) b_[e.coarse] += e.weight * b_fine_[e.fine];

    const std::size_t n = a_.size();
    const std::size_t m = b_.size();
    cplx s(0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < m; ++j) sum += offsets_.breadth(i, j) * b_[j];
      s += a_[i] * sum;
    }
    return std::norm(s);
  }

 private:
  const OffsetTable& offsets_;
  Refinement rx_;
  Refinement rz_;
  std::vector<double> xs_;
  std::vector<double> zs_;
  bool uniform_x_;
  std::vector<cplx> a_fine_;
  std::vector<double> b_fine_;
  std::vector<cplx> a_;
  std::vector<double> b_;
};

OffsetTable refined_table(const OffsetTable& offsets, int factor) {
  const std::size_t n = offsets.station_count();
  const std::size_t m = offsets.waterline_count();
  const Refinement rx = catmull_rom_refinement(n, is_uniform(offsets.stations()) ? factor : 1);
  const Refinement rz = catmull_rom_refinement(m, is_uniform(offsets.waterlines()) ? factor : 1);
  if (rx.fine_count == n && rz.fine_count == m) return offsets;
  std::vector<std::vector<double>> columns(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> col(m);
    for (std::size_t j = 0; j < m; ++j) col[j] = offsets.breadth(i, j);
    columns[i] = refine(rz, col);
  }
  std::vector<double> ys(rx.fine_count * rz.fine_count);
  std::vector<double> row(n);
  for (std::size_t j = 0; j < rz.fine_count; ++j) {
    for (std::size_t i = 0; i < n; ++i) row[i] = columns[i][j];
    const std::vector<double> fine = refine(rx, row);
    for (std::size_t i = 0; i < rx.fine_count; ++i) {
      ys[i * rz.fine_count + j] = std::max(0.0, fine[i]);
    }
  }
  return OffsetTable(refine(rx, offsets.stations()), refine(rz, offsets.waterlines()),
                     std::move(ys));
}

double patch_area(const Vec3& p00, const Vec3& p10, const Vec3& p01, const Vec3& p11) {
  // 3x3 Gauss-Legendre on the unit square of |r_u x r_v|.
  static constexpr std::array<double, 3> nodes{0.1127016653792583, 0.5, 0.8872983346207417};
  static constexpr std::array<double, 3> weights{5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  double area = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    const double v = nodes[a];
    for (std::size_t b = 0; b < 3; ++b) {
      const double u = nodes[b];
      const Vec3 ru{(1 - v) * (p10.x - p00.x) + v * (p11.x - p01.x),
                    (1 - v) * (p10.y - p00.y) + v * (p11.y - p01.y),
                    (1 - v) * (p10.z - p00.z) + v * (p11.z - p01.z)};
      const Vec3 rv{(1 - u) * (p01.x - p00.x) + u * (p11.x - p10.x),
                    (1 - u) * (p01.y - p00.y) + u * (p11.y - p10.y),
                    (1 - u) * (p01.z - p00.z) + u * (p11.z - p10.z)};
      const double cx = ru.y * rv.z - ru.z * rv.y;
      const double cy = ru.z * rv.x - ru.x * rv.z;
      const double cz = ru.x * rv.y - ru.y * rv.x;
      area += weights[a] * weights[b] * std::sqrt(cx * cx + cy * cy + cz * cz);
    }
  }
  return area;
}

}  // namespace

double FlowConditions::speed() const { return froude_number * std::sqrt(gravity * reference_length); }

FlowConditions FlowConditions::for_hull(const OffsetTable& offsets, double froude_number,
                                        double gravity) {
  FlowConditions fc;
  fc.froude_number = froude_number;
  fc.gravity = gravity;
  fc.reference_length = waterline_extent(offsets);
  if (!(fc.reference_length > 0.0) && offsets.station_count() > 1) {
    fc.reference_length = offsets.stations().back() - offsets.stations().front();
  }
  return fc;
}

double waterline_extent(const OffsetTable& offsets) {
  const std::size_t n = offsets.station_count();
  const std::size_t m = offsets.waterline_count();
  if (n == 0 || m == 0) return 0.0;
  std::size_t first = n, last = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (offsets.breadth(i, m - 1) > 0.0) {
      first = std::min(first, i);
      last = std::max(last, i);
    }
  }
  if (first == n) return 0.0;
  // The waterline closes at the neighbouring zero-breadth stations.
  if (first > 0) --first;
  if (last + 1 < n) ++last;
  return offsets.stations()[last] - offsets.stations()[first];
}

double wetted_surface(const OffsetTable& offsets) {
  const auto& xs = offsets.stations();
  const auto& zs = offsets.waterlines();
  const std::size_t n = xs.size();
  const std::size_t m = zs.size();
  if (n < 2 || m < 2) return 0.0;

  double side = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    for (std::size_t j = 0; j + 1 < m; ++j) {
      side += patch_area({xs[i], offsets.breadth(i, j), zs[j]},
                         {xs[i + 1], offsets.breadth(i + 1, j), zs[j]},
                         {xs[i], offsets.breadth(i, j + 1), zs[j + 1]},
                         {xs[i + 1], offsets.breadth(i + 1, j + 1), zs[j + 1]});
    }
  }
  double keel = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    keel += (xs[i + 1] - xs[i]) * (offsets.breadth(i, 0) + offsets.breadth(i + 1, 0));
  }
  double ends = 0.0;
  for (std::size_t j = 0; j + 1 < m; ++j) {
    const double h = zs[j + 1] - zs[j];
    ends += h * (offsets.breadth(0, j) + offsets.breadth(0, j + 1));
    ends += h * (offsets.breadth(n - 1, j) + offsets.breadth(n - 1, j + 1));
  }
  return 2.0 * side + keel + ends;
}

CwResult evaluate_cw(const OffsetTable& offsets, const FlowConditions& conditions,
                     const ThinShipSettings& settings) {
  if (!(conditions.froude_number > 0.0) || !(conditions.gravity > 0.0) ||
      !(conditions.reference_length > 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "flow conditions need positive Froude number, gravity and reference length");
  }
  CwResult result;
  bool any = false;
  for (double y : offsets.half_breadths()) any = any || y != 0.0;
  result.wetted_surface = wetted_surface(refined_table(offsets, settings.refinement));
  if (!any || result.wetted_surface <= 0.0) {
    result.degenerate = true;
    return result;
  }

  const double g = conditions.gravity;
  const double u = conditions.speed();
  const double k0 = g / (u * u);
  MichellKernel kernel(offsets, settings.refinement);

  // Integrand of the lambda integral without the 1/sqrt(lambda^2-1) factor:
  // |K|^2 lambda^2 with K = -i kappa S.
  auto weighted = [&](double lambda) {
    const double kappa = k0 * lambda;
    return kappa * kappa * kernel.source_magnitude_sq(kappa, k0 * lambda * lambda) * lambda * lambda;
  };

  double integral = 0.0;
  const double t_split = std::acosh(settings.lambda_split);
  const double dt = t_split / settings.near_panels;
  for (int p = 0; p < settings.near_panels; ++p) {
    const double mid = (p + 0.5) * dt;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      const double t = mid + 0.5 * dt * kGaussNodes[q];
      // dlambda / sqrt(lambda^2 - 1) = dt
      integral += 0.5 * dt * kGaussWeights[q] * weighted(std::cosh(t));
    }
  }
  const double dl = (settings.lambda_max - settings.lambda_split) / settings.far_panels;
  for (int p = 0; p < settings.far_panels; ++p) {
    const double mid = settings.lambda_split + (p + 0.5) * dl;
    for (std::size_t q = 0; q < kGaussNodes.size(); ++q) {
      const double lambda = mid + 0.5 * dl * kGaussNodes[q];
      integral += 0.5 * dl * kGaussWeights[q] * weighted(lambda) / std::sqrt(lambda * lambda - 1.0);
    }
  }

  const double rho = settings.water_density;
  result.resistance = 4.0 * rho * g * g / (std::numbers::pi * u * u) * integral;
  result.cw = result.resistance / (0.5 * rho * u * u * result.wetted_surface);
  if (!std::isfinite(result.cw)) {
    throw Error(ErrorKind::kEvaluation, "thin-ship integral produced a non-finite value");
  }
  return result;
}

double ThinShipEvaluator::evaluate(const OffsetTable& offsets) const {
  return evaluate_cw(offsets, FlowConditions::for_hull(offsets, froude_), settings_).cw;
}

double ExternalCommandEvaluator::evaluate(const OffsetTable& offsets) const {
  namespace fs = std::filesystem;
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  const fs::path input =
      fs::temp_directory_path() / ("hullspace-offsets-" + std::to_string(rng()) + ".txt");
  {
    std::ofstream out(input);
    write_offsets(out, offsets);
  }
  const std::string cmd = "( " + command_ + " ) < '" + input.string() + "'";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) {
    fs::remove(input);
    throw Error(ErrorKind::kEvaluation, "cannot start external solver: " + command_);
  }
  std::string output;
  std::array<char, 256> buf{};
  while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe) != nullptr) output += buf.data();
  const int status = ::pclose(pipe);
  fs::remove(input);
  if (status != 0) {
    throw Error(ErrorKind::kEvaluation, "external solver exited with status " + std::to_string(status));
  }
  try {
    std::size_t used = 0;
    const double cw = std::stod(output, &used);
    if (!std::isfinite(cw)) throw std::invalid_argument("non-finite");
    return cw;
  } catch (const std::exception&) {
    throw Error(ErrorKind::kEvaluation, "external solver output is not a decimal Cw: '" + output + "'");
  }
}

std::unique_ptr<CwEvaluator> make_evaluator(const EvaluatorConfig& config) {
  if (config.kind == "thin-ship") {
    return std::make_unique<ThinShipEvaluator>(config.froude_number, config.thin_ship);
  }
  if (config.kind == "external-command") {
    if (config.command.empty()) {
      throw Error(ErrorKind::kInvalidArgument, "external-command evaluator needs a command");
    }
    return std::make_unique<ExternalCommandEvaluator>(config.command);
  }
  throw Error(ErrorKind::kInvalidArgument, "unknown evaluator kind: " + config.kind);
}

}  // namespace hullspace
