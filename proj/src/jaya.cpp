#include "hullspace/jaya.hpp"

#include <algorithm>
#include <cmath>

#include "hullspace/error.hpp"
#include "hullspace/latent.hpp"

namespace hullspace {

void JayaPopulation::refresh_extremes() {
  best = worst = 0;
  for (std::size_t i = 1; i < objective.size(); ++i) {
    if (objective[i] < objective[best]) best = i;
    if (objective[i] > objective[worst]) worst = i;
  }
}

void JayaPopulation::reevaluate(const Objective& f) {
  for (std::size_t i = 0; i < solutions.size(); ++i) objective[i] = f(solutions[i]);
  refresh_extremes();
}

JayaPopulation make_population(std::vector<std::vector<double>> solutions, const Objective& f) {
  if (solutions.empty()) throw Error(ErrorKind::kInvalidArgument, "Jaya needs a non-empty population");
  JayaPopulation pop;
  pop.solutions = std::move(solutions);
  pop.objective.resize(pop.solutions.size());
  pop.reevaluate(f);
  return pop;
}

JayaPopulation random_population(std::size_t size, const Box& box, const Objective& f,
                                 std::mt19937_64& rng) {
  std::vector<std::vector<double>> solutions(size, std::vector<double>(box.lower.size()));
  for (auto& x : solutions) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      x[j] = box.lower[j] + uniform01(rng) * (box.upper[j] - box.lower[j]);
    }
  }
  return make_population(std::move(solutions), f);
}

void jaya_step(JayaPopulation& population, const Objective& f, const Box& box,
               std::mt19937_64& rng) {
  std::vector<double> candidate;
  for (std::size_t i = 0; i < population.solutions.size(); ++i) {
    const auto& x = population.solutions[i];
    const auto& best = population.solutions[population.best];
    const auto& worst = population.solutions[population.worst];
    candidate.resize(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      const double r1 = uniform01(rng);
      const double r2 = uniform01(rng);
      const double moved = x[j] + r1 * (best[j] - std::abs(x[j])) - r2 * (worst[j] - std::abs(x[j]));
      candidate[j] = std::clamp(moved, box.lower[j], box.upper[j]);
    }
    const double value = f(candidate);
    if (value < population.objective[i]) {
      population.solutions[i] = candidate;
      population.objective[i] = value;
      population.refresh_extremes();
    }
  }
  ++population.iterations;
}

}  // namespace hullspace
