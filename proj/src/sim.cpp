#include "hullspace/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

#include "hullspace/error.hpp"

namespace hullspace {

Policy Policy::parse(const std::string& text, std::uint64_t seed) {
  Policy p;
  p.seed = seed;
  if (text == "novelty") {
    p.kind = PolicyKind::kNoveltySeeker;
    p.alpha = 1.0;
  } else if (text == "performance") {
    p.kind = PolicyKind::kPerformanceSeeker;
    p.alpha = 0.0;
  } else if (text.rfind("mixed:", 0) == 0) {
    p.kind = PolicyKind::kMixed;
    try {
      std::size_t used = 0;
      p.alpha = std::stod(text.substr(6), &used);
      if (used != text.size() - 6) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw Error(ErrorKind::kInvalidArgument, "mixed policy needs a number, e.g. mixed:0.7");
    }
    if (!(p.alpha >= 0.0 && p.alpha <= 1.0)) throw Error(ErrorKind::kInvalidArgument, "mixed alpha must lie in [0, 1]");
  } else {
    throw Error(ErrorKind::kInvalidArgument, "policy must be novelty, performance or mixed:<alpha>");
  }
  return p;
}

std::string Policy::name() const {
  switch (kind) {
    case PolicyKind::kNoveltySeeker: return "novelty";
    case PolicyKind::kPerformanceSeeker: return "performance";
    case PolicyKind::kMixed: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "mixed:%g", alpha);
      return buf;
    }
  }
  return "mixed";
}

double Policy::evaluate_probability() const {
  switch (kind) {
    case PolicyKind::kNoveltySeeker: return 0.2;
    case PolicyKind::kPerformanceSeeker: return 1.0;
    case PolicyKind::kMixed: return alpha;
  }
  return alpha;
}

Rationale Policy::rationale() const {
  switch (kind) {
    case PolicyKind::kNoveltySeeker: return Rationale::kForm;
    case PolicyKind::kPerformanceSeeker: return Rationale::kPerformance;
    case PolicyKind::kMixed: return Rationale::kBoth;
  }
  return Rationale::kBoth;
}

namespace {

struct Candidate {
  std::string id;
  LatentVector latent;
  std::optional<double> cw;
};

Candidate candidate_from(const json& design) {
  Candidate c{design.at("id").get<std::string>(), latent_from_json(design.at("latent")), std::nullopt};
  if (design.contains("cw")) c.cw = design.at("cw").get<double>();
  return c;
}

std::vector<double> normalized(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  std::vector<double> out(v.size(), 0.0);
  if (*hi > *lo) {
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / (*hi - *lo);
  }
  return out;
}

/// Index of the candidate the policy prefers, given the designs it already holds.
std::size_t choose(const std::vector<Candidate>& candidates, const std::vector<LatentVector>& held,
                   const Policy& policy) {
  const LatentVector centre = LatentVector::filled(0.5);
  std::vector<double> novelty;
  std::vector<double> cws;
  for (const auto& c : candidates) {
    double n = std::numeric_limits<double>::infinity();
    if (held.empty()) {
      n = distance(c.latent, centre);
    } else {
      for (const auto& h : held) n = std::min(n, distance(c.latent, h));
    }
    novelty.push_back(n);
    cws.push_back(c.cw.value_or(std::numeric_limits<double>::quiet_NaN()));
  }
  // Performance in [0, 1], 1 for the lowest Cw; unknown Cw scores neutral.
  std::vector<double> known;
  for (const double cw : cws) {
    if (!std::isnan(cw)) known.push_back(cw);
  }
  std::vector<double> performance(candidates.size(), 0.5);
  if (!known.empty()) {
    const auto [lo, hi] = std::minmax_element(known.begin(), known.end());
    for (std::size_t i = 0; i < cws.size(); ++i) {
      if (std::isnan(cws[i])) continue;
      performance[i] = *hi > *lo ? (*hi - cws[i]) / (*hi - *lo) : 1.0;
    }
  }
  const auto nov = normalized(novelty);
  std::size_t best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    double score = 0.0;
    switch (policy.kind) {
      case PolicyKind::kNoveltySeeker: score = novelty[i]; break;
      case PolicyKind::kPerformanceSeeker: score = performance[i]; break;
      case PolicyKind::kMixed: score = policy.alpha * nov[i] + (1.0 - policy.alpha) * performance[i]; break;
    }
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best;
}

std::int64_t dwell(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(uniform_index(rng, static_cast<std::size_t>(hi - lo + 1)));
}

void run_rem(SessionDriver& driver, const Policy& policy, const SimOptions& options, std::mt19937_64& rng) {
  const json embedding = driver.query({{"query", "embedding"}});
  double umin = std::numeric_limits<double>::infinity(), umax = -umin, vmin = umin, vmax = -umin;
  for (const auto& p : embedding.at("points")) {
    umin = std::min(umin, p[1].get<double>());
    umax = std::max(umax, p[1].get<double>());
    vmin = std::min(vmin, p[2].get<double>());
    vmax = std::max(vmax, p[2].get<double>());
  }
  std::vector<Candidate> visited;
  for (std::size_t k = 0; k < options.rem_views; ++k) {
    const double u = umin + uniform01(rng) * (umax - umin);
    const double v = vmin + uniform01(rng) * (vmax - vmin);
    json design = driver.act({{"verb", "click"}, {"u", u}, {"v", v}});
    driver.wait(dwell(rng, 2000, 9000));
    if (uniform01(rng) < policy.evaluate_probability()) {
      design = driver.act({{"verb", "evaluate"}, {"design_id", design.at("id")}});
      driver.wait(dwell(rng, 1000, 3000));
    }
    Candidate c = candidate_from(design);
    const auto it = std::find_if(visited.begin(), visited.end(), [&](const Candidate& x) { return x.id == c.id; });
    if (it == visited.end()) {
      visited.push_back(std::move(c));
    } else if (c.cw) {
      it->cw = c.cw;
    }
  }
  std::vector<LatentVector> held;
  for (std::size_t slot = 1; slot <= 5 && !visited.empty(); ++slot) {
    const std::size_t pick = choose(visited, held, policy);
    driver.act({{"verb", "select"},
                {"slot", slot},
                {"design_id", visited[pick].id},
                {"rationale", std::string(to_string(policy.rationale()))}});
    driver.wait(dwell(rng, 1500, 4000));
    held.push_back(visited[pick].latent);
    visited.erase(visited.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  driver.act({{"verb", "terminate"}});
}

void run_generations(SessionDriver& driver, const Policy& policy, const SimOptions& options, std::mt19937_64& rng) {
  std::vector<LatentVector> held;
  for (std::size_t k = 0; k < options.interactions; ++k) {
    const json state = driver.act({{"verb", "next"}});
    std::vector<Candidate> shown;
    for (const auto& d : state.at("generation")) shown.push_back(candidate_from(d));
    driver.wait(dwell(rng, 8000, 25000));
    const std::size_t pick = choose(shown, held, policy);
    driver.act({{"verb", "select"},
                {"design_id", shown[pick].id},
                {"rationale", std::string(to_string(policy.rationale()))}});
    driver.wait(dwell(rng, 1000, 3000));
    held.push_back(shown[pick].latent);
  }
  driver.act({{"verb", "terminate"}});
}

}  // namespace

void run_policy(SessionDriver& driver, Mode mode, const Policy& policy, const SimOptions& options) {
  std::mt19937_64 rng(derive_seed(policy.seed, 0x51a0ULL + static_cast<std::uint64_t>(mode)));
  if (mode == Mode::kRem) {
    run_rem(driver, policy, options, rng);
  } else {
    run_generations(driver, policy, options, rng);
  }
}

std::unique_ptr<ModeSession> run_session(const Policy& policy, const SessionSpec& spec,
                                         std::shared_ptr<const CwPredictor> predictor, const SimOptions& options) {
  auto session = open_session(spec, std::move(predictor), 0);
  DirectDriver driver(*session);
  driver.wait(1000);
  run_policy(driver, spec.mode, policy, options);
  return session;
}

}  // namespace hullspace
