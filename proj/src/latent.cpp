#include "hullspace/latent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hullspace/error.hpp"

namespace hullspace {

namespace {
constexpr std::size_t kMaximinCandidates = 8;
}  // namespace

double distance(const LatentVector& a, const LatentVector& b) {
  double sum = 0.0;
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    const double diff = a[d] - b[d];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

DesignSpaceBounds::DesignSpaceBounds() {
  lower_.fill(0.0);
  upper_.fill(1.0);
}

DesignSpaceBounds::DesignSpaceBounds(std::array<double, kLatentDim> lower,
                                     std::array<double, kLatentDim> upper)
    : lower_(lower), upper_(upper) {
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    if (!(lower_[d] < upper_[d]) || lower_[d] < 0.0 || upper_[d] > 1.0) {
      throw Error(ErrorKind::kOutOfBounds,
                  "bounds in dimension " + std::to_string(d) +
                      " must satisfy 0 <= lower < upper <= 1");
    }
  }
}

bool DesignSpaceBounds::contains(const LatentVector& x) const {
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    if (x[d] < lower_[d] || x[d] > upper_[d]) return false;
  }
  return true;
}

bool DesignSpaceBounds::contains(const DesignSpaceBounds& inner) const {
  for (std::size_t d = 0; d < kLatentDim; ++d) {
    if (inner.lower_[d] < lower_[d] || inner.upper_[d] > upper_[d]) return false;
  }
  return true;
}

LatentVector DesignSpaceBounds::clamp(const LatentVector& x) const {
  LatentVector out;
  for (std::size_t d = 0; d < kLatentDim; ++d) out[d] = std::clamp(x[d], lower_[d], upper_[d]);
  return out;
}

double DesignSpaceBounds::diagonal() const {
  double sum = 0.0;
  for (std::size_t d = 0; d < kLatentDim; ++d) sum += width(d) * width(d);
  return std::sqrt(sum);
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  // Lemire-style rejection keeps the result unbiased.
  const std::uint64_t range = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t draw = 0;
  do {
    draw = rng();
  } while (draw >= limit);
  return static_cast<std::size_t>(draw % range);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<LatentVector> uniform_sample(const DesignSpaceBounds& bounds, std::size_t count,
                                         std::uint64_t seed) {
  if (count == 0) throw Error(ErrorKind::kInvalidArgument, "uniform_sample needs count >= 1");
  std::mt19937_64 rng(seed);
  const double n = static_cast<double>(count);
  // Maximin selection among several Latin hypercubes, bounded by pairwise cost.
  const std::size_t candidates =
      std::clamp<std::size_t>(4'000'000 / (count * count), 1, kMaximinCandidates);
  std::vector<std::array<double, kLatentDim>> unit(count), best;
  double best_gap = -1.0;
  std::vector<std::size_t> strata(count);
  for (std::size_t c = 0; c < candidates; ++c) {
    for (std::size_t d = 0; d < kLatentDim; ++d) {
      for (std::size_t i = 0; i < count; ++i) strata[i] = i;
      shuffle(strata, rng);
      for (std::size_t i = 0; i < count; ++i) unit[i][d] = (static_cast<double>(strata[i]) + uniform01(rng)) / n;
    }
    if (candidates == 1) {
      best = unit;
      break;
    }
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t j = i + 1; j < count; ++j) {
        double s = 0.0;
        for (std::size_t d = 0; d < kLatentDim; ++d) s += (unit[i][d] - unit[j][d]) * (unit[i][d] - unit[j][d]);
        gap = std::min(gap, s);
      }
    }
    if (gap > best_gap) {
      best_gap = gap;
      best = unit;
    }
  }
  std::vector<LatentVector> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t d = 0; d < kLatentDim; ++d) {
      out[i][d] = std::min(bounds.lower(d) + best[i][d] * bounds.width(d), bounds.upper(d));
    }
  }
  return out;
}

std::vector<LatentVector> random_sample(const DesignSpaceBounds& bounds, std::size_t count,
                                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LatentVector> out(count);
  for (auto& x : out) {
    for (std::size_t d = 0; d < kLatentDim; ++d) {
      x[d] = bounds.lower(d) + uniform01(rng) * bounds.width(d);
    }
  }
  return out;
}

}  // namespace hullspace
