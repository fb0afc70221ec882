#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace hullspace {

inline constexpr std::size_t kLatentDim = 20;

/// A point in the generative design space.
struct LatentVector {
  std::array<double, kLatentDim> values{};

  static LatentVector filled(double v) {
    LatentVector out;
    out.values.fill(v);
    return out;
  }

  double& operator[](std::size_t d) { return values[d]; }
  double operator[](std::size_t d) const { return values[d]; }

  bool operator==(const LatentVector&) const = default;
};

double distance(const LatentVector& a, const LatentVector& b);

/// Axis-aligned box inside the root box [0,1]^20.
class DesignSpaceBounds {
 public:
  /// The root box [0,1]^20.
  DesignSpaceBounds();
  DesignSpaceBounds(std::array<double, kLatentDim> lower, std::array<double, kLatentDim> upper);

  static DesignSpaceBounds root() { return {}; }

  double lower(std::size_t d) const { return lower_[d]; }
  double upper(std::size_t d) const { return upper_[d]; }
  double width(std::size_t d) const { return upper_[d] - lower_[d]; }
  const std::array<double, kLatentDim>& lowers() const { return lower_; }
  const std::array<double, kLatentDim>& uppers() const { return upper_; }

  bool contains(const LatentVector& x) const;
  bool contains(const DesignSpaceBounds& inner) const;
  LatentVector clamp(const LatentVector& x) const;
  /// Length of the box diagonal.
  double diagonal() const;

  bool operator==(const DesignSpaceBounds&) const = default;

 private:
  std::array<double, kLatentDim> lower_;
  std::array<double, kLatentDim> upper_;
};

/// Uniform double in [0,1) from the top 53 bits of a 64-bit draw. Unlike
/// std::uniform_real_distribution this is identical on every standard library.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n).
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

/// Fisher-Yates shuffle driven by uniform_index.
template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[uniform_index(rng, i)]);
  }
}

/// Derives an independent stream seed from a parent seed and a salt.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

/// Stratified space-filling sample: each dimension is split into `count`
/// equal strata with exactly one point per stratum, strata randomly paired
/// across dimensions. Of up to eight such candidates (fewer for large
/// counts) the one with the largest minimum pairwise distance is returned.
std::vector<LatentVector> uniform_sample(const DesignSpaceBounds& bounds, std::size_t count,
                                         std::uint64_t seed);

/// Plain i.i.d. uniform sample of the box.
std::vector<LatentVector> random_sample(const DesignSpaceBounds& bounds, std::size_t count,
                                        std::uint64_t seed);

}  // namespace hullspace
