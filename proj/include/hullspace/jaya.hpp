#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <vector>

namespace hullspace {

using Objective = std::function<double(const std::vector<double>&)>;

/// Population of the parameter-free Jaya algorithm with cached objectives.
struct JayaPopulation {
  std::vector<std::vector<double>> solutions;
  std::vector<double> objective;
  std::size_t best = 0;
  std::size_t worst = 0;
  std::size_t iterations = 0;

  void refresh_extremes();
  void reevaluate(const Objective& f);
  double best_value() const { return objective[best]; }
};

/// Box used for clamping candidate moves.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;
};

JayaPopulation make_population(std::vector<std::vector<double>> solutions, const Objective& f);

/// Uniform random population inside the box.
JayaPopulation random_population(std::size_t size, const Box& box, const Objective& f,
                                 std::mt19937_64& rng);

/// One Jaya generation. Every solution x moves to
///   x'_j = x_j + r1 (best_j - |x_j|) - r2 (worst_j - |x_j|)
/// with fresh r1, r2 ~ U[0,1) per solution and dimension, is clamped to the
/// box, and replaces x only if f(x') < f(x). Best and worst are refreshed
/// after every replacement, so later solutions in the same generation move
/// relative to the updated extremes.
void jaya_step(JayaPopulation& population, const Objective& f, const Box& box,
               std::mt19937_64& rng);

}  // namespace hullspace
