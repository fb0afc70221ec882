// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "hullspace/aem.hpp"
#include "hullspace/config.hpp"
#include "hullspace/error.hpp"
#include "hullspace/generator.hpp"
#include "hullspace/hydro.hpp"
#include "hullspace/jaya.hpp"
#include "hullspace/metrics.hpp"
#include "hullspace/saem.hpp"
#include "hullspace/sim.hpp"
#include "hullspace/surrogate.hpp"

#ifndef HULLSPACE_WEB_UI_BUILT
#define HULLSPACE_WEB_UI_BUILT 0
#endif

using namespace hullspace;
using Stopwatch = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  std::ostringstream out;
  out << std::setprecision(digits) << v;
  return out.str();
}

double seconds_since(Stopwatch::time_point start) {
  return std::chrono::duration<double>(Stopwatch::now() - start).count();
}

void info(const std::string& line) { std::cout << "      " << line << "\n"; }

std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

// Trapezoid volume of the full hull straight from the offsets.
double trapezoid_volume(const OffsetTable& t) {
  double v = 0.0;
  for (std::size_t i = 0; i + 1 < t.station_count(); ++i) {
    const double dx = t.stations()[i + 1] - t.stations()[i];
    for (std::size_t j = 0; j + 1 < t.waterline_count(); ++j) {
      const double dz = t.waterlines()[j + 1] - t.waterlines()[j];
      v += 0.25 * dx * dz * (t.breadth(i, j) + t.breadth(i + 1, j) + t.breadth(i, j + 1) + t.breadth(i + 1, j + 1));
    }
  }
  return 2.0 * v;
}

bool within(double v, const std::array<double, 2>& range) { return v >= range[0] && v <= range[1]; }

// Feasibility recomputed from a fresh geometry without the library's checks.
bool independently_feasible(const LatentVector& x, const GeneratorConfig& config) {
  const OffsetTable t = generate(x, config);
  const std::size_t top = t.waterline_count() - 1;
  std::optional<std::size_t> first, last;
  double half = 0.0;
  for (std::size_t i = 0; i < t.station_count(); ++i) {
    if (t.breadth(i, top) > 0.0) {
      if (!first) first = i;
      last = i;
      half = std::max(half, t.breadth(i, top));
    }
  }
  if (!first) return false;
  const auto& c = config.constraints;
  return within(trapezoid_volume(t), c.displacement) &&
         within(t.stations()[*last] - t.stations()[*first], c.length_waterline) && within(2.0 * half, c.beam_waterline) &&
         within(t.waterlines().back() - t.waterlines().front(), c.draft);
}

OffsetTable parabolic_hull(std::size_t stations, std::size_t waterlines) {
  const double length = 100.0, half_beam = 8.0, draft = 6.0;
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

double sc_oracle(const std::vector<LatentVector>& xs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(kLatentDim));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t d = 0; d < kLatentDim; ++d) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = xs[i][d];
  }
  const Eigen::RowVectorXd centroid = m.colwise().mean();
  return (m.rowwise() - centroid).rowwise().norm().mean();
}

// Shared state: the surrogate is trained once.
struct Context {
  PlatformConfig config;
  std::optional<SurrogateTraining> training;
  std::shared_ptr<const CwPredictor> predictor;
  std::array<std::vector<std::unique_ptr<ModeSession>>, 3> study;

  const CwPredictor& surrogate() {
    if (!predictor) {
      const auto start = Stopwatch::now();
      training = train_surrogate_pipeline(config.surrogate.samples, config.surrogate.seed, config.surrogate.pipeline);
      predictor = std::make_shared<GprPredictor>(std::make_shared<GprModel>(training->model));
      info("surrogate trained on " + std::to_string(training->report.train) + " designs in " +
           fmt(seconds_since(start), 3) + " s");
    }
    return *predictor;
  }

  SessionSpec spec(Mode mode, std::uint64_t seed, const PlatformConfig& c) const {
    SessionSpec s;
    s.mode = mode;
    s.seed = seed;
    s.participant_id = "acc" + std::to_string(seed);
    s.session_id = s.participant_id + "-" + std::string(to_string(mode));
    s.config = mode_config(c, mode);
    return s;
  }

  // Twenty seeded simulated sessions per mode with the trained surrogate.
  const std::array<std::vector<std::unique_ptr<ModeSession>>, 3>& study_sessions() {
    if (!study[0].empty()) return study;
    surrogate();
    PlatformConfig c = config;
    c.rem.pool_size = 500;
    c.rem.pool_seed = 2024;
    const auto start = Stopwatch::now();
    for (const Mode mode : kAllModes) {
      const std::string policy = mode == Mode::kAem ? "performance" : "mixed:0.7";
      for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        study[static_cast<std::size_t>(mode)].push_back(
            run_session(Policy::parse(policy, seed), spec(mode, seed, c), predictor));
      }
    }
    info("60 simulated sessions in " + fmt(seconds_since(start), 3) + " s");
    return study;
  }
};

Verdict constrained_sampling(Context& ctx) {
  const auto start = Stopwatch::now();
  const auto designs = sample_constrained(1000, 31, ctx.config.generator);
  const double elapsed = seconds_since(start);
  std::size_t feasible = 0;
  for (const auto& d : designs) feasible += independently_feasible(d.latent, ctx.config.generator);
  return {designs.size() == 1000 && feasible == 1000 && elapsed < 60.0,
          std::to_string(feasible) + "/1000 feasible on re-check, " + fmt(elapsed, 3) + " s"};
}

Verdict volume_integration(Context&) {
  OffsetTable box(linspace(0.0, 100.0, 11), linspace(0.0, 10.0, 6));
  for (std::size_t i = 0; i < 11; ++i) {
    for (std::size_t j = 0; j < 6; ++j) box.breadth(i, j) = 10.0;
  }
  const double box_error = std::abs(compute_moments(box).volume - 20000.0) / 20000.0;

  const double exact = 2.0 * 8.0 * (2.0 * 100.0 / 3.0) * (2.0 * 6.0 / 3.0);
  double worst_order = std::numeric_limits<double>::infinity(), previous = 0.0;
  for (std::size_t k = 0; k < 5; ++k) {
    const double err = std::abs(compute_moments(parabolic_hull(10 * (1u << k) + 1, 5 * (1u << k) + 1)).volume - exact);
    if (k > 0) worst_order = std::min(worst_order, std::log2(previous / err));
    previous = err;
  }
  return {box_error <= 1e-9 && worst_order >= 1.9,
          "box relative error " + fmt(box_error, 3) + ", lowest observed order " + fmt(worst_order, 4)};
}

Verdict wave_resistance(Context& ctx) {
  const auto designs = sample_constrained(1000, 32, ctx.config.generator);
  GeneratorConfig fine = ctx.config.generator;
  fine.stations *= 2;
  fine.waterlines *= 2;
  const ThinShipSettings settings = ctx.config.evaluator.thin_ship;
  const double fn = ctx.config.evaluator.froude_number;
  std::size_t negative = 0;
  double mirror = 0.0, grid = 0.0;
  for (const auto& d : designs) {
    const double cw = evaluate_cw(d.geometry, FlowConditions::for_hull(d.geometry, fn), settings).cw;
    if (!(cw >= 0.0) || !std::isfinite(cw)) ++negative;
    const auto mirrored = d.geometry.mirrored_fore_aft();
    mirror = std::max(mirror, std::abs(evaluate_cw(mirrored, FlowConditions::for_hull(mirrored, fn), settings).cw - cw) / cw);
    const auto dense = generate(d.latent, fine);
    const double cw_fine = evaluate_cw(dense, FlowConditions::for_hull(dense, fn), settings).cw;
    grid = std::max(grid, std::abs(cw - cw_fine) / cw_fine);
  }
  return {negative == 0 && mirror <= 1e-10 && grid <= 0.01,
          std::to_string(1000 - negative) + "/1000 with Cw >= 0, worst mirror gap " + fmt(mirror, 3) +
              ", worst grid-doubling change " + fmt(100.0 * grid, 3) + "%"};
}

Verdict surrogate_model(Context& ctx) {
  // Near-noiseless interpolation of 20-D training data.
  std::mt19937_64 rng(5);
  Eigen::MatrixXd x(80, 20);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index d = 0; d < x.cols(); ++d) x(i, d) = uniform01(rng);
  }
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = std::sin(3.0 * x(i, 0)) + 0.5 * x.row(i).squaredNorm();
  GprFitConfig fit;
  fit.fixed_noise_variance = 1e-8;
  const GprModel interp = fit_gpr(x, y, fit);
  double interp_error = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    interp_error = std::max(interp_error, std::abs(interp.predict(Eigen::VectorXd(x.row(i))).mean - y[i]));
  }

  // Five points in 1-D against an explicit inverse.
  Eigen::MatrixXd x5(5, 1);
  x5 << 0.0, 0.3, 0.45, 0.7, 1.0;
  Eigen::VectorXd y5(5);
  y5 << 0.1, 0.8, 0.6, -0.2, 0.4;
  GprHyperparameters h;
  h.length_scales = Eigen::VectorXd::Constant(1, 0.25);
  h.signal_variance = 0.9;
  h.noise_variance = 1e-3;
  h.prior_mean = 0.3;
  const GprModel five(x5, y5, h);
  Eigen::MatrixXd k(5, 5);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) k(i, j) = h.signal_variance * std::exp(-0.5 * std::pow((x5(i, 0) - x5(j, 0)) / 0.25, 2));
  }
  k.diagonal().array() += h.noise_variance;
  const Eigen::MatrixXd inv = k.inverse();
  double dense_error = 0.0;
  for (double q : {0.15, 0.5, 0.93, 1.4}) {
    Eigen::VectorXd kq(5);
    for (int i = 0; i < 5; ++i) kq[i] = h.signal_variance * std::exp(-0.5 * std::pow((x5(i, 0) - q) / 0.25, 2));
    const double mean = h.prior_mean + kq.dot(inv * (y5.array() - h.prior_mean).matrix());
    const double var = h.signal_variance - kq.dot(inv * kq);
    const Prediction p = five.predict(Eigen::VectorXd::Constant(1, q));
    dense_error = std::max({dense_error, std::abs(p.mean - mean), std::abs(p.variance - var)});
  }

  ctx.surrogate();
  const auto& report = ctx.training->report;
  const double r2 = report.holdout_fit.r2;
  info("holdout at " + std::to_string(report.samples) + " samples: R^2 " + fmt(r2, 4) + ", RMSE " +
       fmt(report.holdout_fit.rmse, 4));
  if (r2 < 0.8) {
    double best = r2;
    for (const std::size_t n : {250, 500, 1000}) {
      const auto curve = train_surrogate_pipeline(n, ctx.config.surrogate.seed, ctx.config.surrogate.pipeline);
      best = std::max(best, curve.report.holdout_fit.r2);
      info("learning curve: " + std::to_string(n) + " samples, holdout R^2 " + fmt(curve.report.holdout_fit.r2, 4));
    }
    info("best holdout R^2 " + fmt(best, 4));
  }
  return {interp_error <= 1e-6 && dense_error <= 1e-9 && r2 >= 0.8,
          "interpolation error " + fmt(interp_error, 3) + ", dense-solve gap " + fmt(dense_error, 3) +
              ", holdout R^2 " + fmt(r2, 4)};
}

Verdict sparseness(Context&) {
  std::mt19937_64 rng(17);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    std::vector<LatentVector> xs(1 + rng() % 60);
    for (auto& x : xs) {
      for (auto& v : x.values) v = uniform01(rng);
    }
    worst = std::max(worst, std::abs(sparseness_at_centre(xs).sc - sc_oracle(xs)));
  }
  const double identical = sparseness_at_centre(std::vector<LatentVector>(9, LatentVector::filled(0.42))).sc;
  LatentVector a = LatentVector::filled(0.1), b = LatentVector::filled(0.1);
  b[0] = 0.9;
  b[13] = 0.6;
  const double pair = sparseness_at_centre({a, b}).sc;
  const double half = std::sqrt(0.8 * 0.8 + 0.5 * 0.5) / 2.0;
  return {worst <= 1e-12 && identical == 0.0 && std::abs(pair - half) <= 1e-15,
          "worst oracle gap " + fmt(worst, 3) + ", identical " + fmt(identical) + ", pair " + fmt(pair, 6) +
              " vs d/2 " + fmt(half, 6)};
}

Verdict shrinking_bounds(Context& ctx) {
  ctx.surrogate();
  auto session = open_session(ctx.spec(Mode::kSaem, 7, ctx.config), ctx.predictor);
  auto& saem = dynamic_cast<SaemSession&>(*session);
  const double beta = saem.config().beta;
  const DesignSpaceBounds root = DesignSpaceBounds::root();
  std::mt19937_64 rng(7);
  double width_gap = 0.0;
  bool nested = true, contained = true;
  for (std::size_t k = 1; k <= 20; ++k) {
    const auto t = static_cast<std::int64_t>(k) * 10'000;
    saem.next_generation(t);
    const DesignSpaceBounds before = saem.bounds();
    for (const auto& d : saem.generation()) contained = contained && before.contains(d.latent);
    const auto& pick = saem.generation()[rng() % saem.generation().size()];
    saem.select(pick.id, Rationale::kBoth, t + 5'000);
    nested = nested && before.contains(saem.bounds());
    contained = contained && saem.bounds().contains(pick.latent);
    for (std::size_t d = 0; d < kLatentDim; ++d) {
      width_gap = std::max(width_gap,
                           std::abs(saem.bounds().width(d) - std::pow(beta, static_cast<double>(k)) * root.width(d)));
    }
  }
  saem.terminate(300'000);
  const auto shown = aggregate_history(saem.events()).designs_explored;
  return {width_gap <= 1e-12 && nested && contained && shown >= 80 && shown <= 125,
          "worst width gap " + fmt(width_gap, 3) + ", nested " + (nested ? "yes" : "no") + ", contained " +
              (contained ? "yes" : "no") + ", designs shown " + std::to_string(shown)};
}

Verdict jaya_search(Context& ctx) {
  ctx.surrogate();
  // Ten thousand steps of one generation run under frozen weights.
  PlatformConfig c = ctx.config;
  c.aem.population = 20;
  c.aem.steps_per_interaction = 10'000;
  auto session = open_session(ctx.spec(Mode::kAem, 9, c), ctx.predictor);
  auto& aem = dynamic_cast<AemSession&>(*session);
  aem.next_generation(1'000);
  const auto& trace = aem.best_trace();
  std::size_t rises = 0;
  for (std::size_t s = 1; s < trace.size(); ++s) rises += trace[s] > trace[s - 1];
  const bool monotone = trace.size() == 10'000 && rises == 0;

  // Uniform scaling of the weights over the evolved population.
  const auto& pop = aem.population();
  std::vector<double> cws;
  for (const auto& p : pop) cws.push_back(p.cw);
  const auto norm = CwNormalization::over(cws);
  const LatentVector preferred = aem.presented().front().latent;
  auto argmin = [&](const PreferenceWeights& w) {
    std::optional<std::size_t> best;
    double value = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
      if (pop[i].violation > 0.0) continue;
      const double f = preference_objective(norm(pop[i].cw), pop[i].latent, preferred, 0.0, w);
      if (!best || f < value) {
        best = i;
        value = f;
      }
    }
    return best;
  };
  bool invariant = true;
  for (const PreferenceWeights w : {PreferenceWeights{0.7, 0.3}, PreferenceWeights{0.3, 0.9}}) {
    for (double scale : {0.01, 0.5, 2.0, 100.0}) {
      invariant = invariant && argmin(w) && argmin(w) == argmin({w.gamma1 * scale, w.gamma2 * scale});
    }
  }

  // Sphere benchmark.
  std::vector<double> ratios;
  const Box box{std::vector<double>(20, -100.0), std::vector<double>(20, 100.0)};
  const Objective sphere = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
  };
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::mt19937_64 rng(seed);
    auto pop50 = random_population(50, box, sphere, rng);
    const double initial = pop50.best_value();
    for (int k = 0; k < 200; ++k) jaya_step(pop50, sphere, box, rng);
    ratios.push_back(pop50.best_value() / initial);
  }
  const double sphere_ratio = median(ratios);

  // The first generation of every logged session ignores gamma2, even when
  // the sliders ask for it.
  auto asked = open_session(ctx.spec(Mode::kAem, 10, ctx.config), ctx.predictor);
  auto& eager = dynamic_cast<AemSession&>(*asked);
  eager.set_weights({0.4, 0.9}, 500);
  eager.next_generation(1'000);
  std::vector<std::vector<SessionEvent>> logs{eager.events()};
  for (const auto& s : ctx.study_sessions()[static_cast<std::size_t>(Mode::kAem)]) logs.push_back(s->events());
  std::size_t first_zero = 0;
  for (const auto& log : logs) {
    const auto shown = std::find_if(log.begin(), log.end(),
                                    [](const SessionEvent& e) { return e.kind == event_kind::kGenerationShown; });
    if (shown != log.end() && shown->payload.at("weights").at("gamma2").get<double>() == 0.0) ++first_zero;
  }

  return {monotone && invariant && sphere_ratio <= 1e-3 && first_zero == logs.size(),
          std::string("best F monotone over ") + std::to_string(trace.size()) + " steps: " + (monotone ? "yes" : "no") +
              ", sphere median ratio " + fmt(sphere_ratio, 3) + ", first gamma2 = 0 in " + std::to_string(first_zero) +
              "/" + std::to_string(logs.size()) + " logs, argmin scale-invariant: " + (invariant ? "yes" : "no")};
}

Verdict weighting_objective(Context&) {
  const auto norm = CwNormalization::over({0.1, 0.5, 0.9});
  const double cw[] = {0.1, 0.5, 0.9}, dist[] = {1.0, 0.0, 0.5}, expected[] = {0.3, 0.35, 0.85};
  double gap = 0.0;
  std::string values;
  for (int i = 0; i < 3; ++i) {
    const double f = preference_objective(norm(cw[i]), dist[i], 0.0, {0.7, 0.3});
    gap = std::max(gap, std::abs(f - expected[i]));
    values += (i ? ", " : "") + fmt(f, 6);
  }
  return {gap <= 1e-12, "F = {" + values + "}"};
}

Verdict replay(Context& ctx) {
  std::size_t equal = 0, total = 0;
  for (const auto& sessions : ctx.study_sessions()) {
    for (const auto& live : sessions) {
      ++total;
      const auto rebuilt = replay_session(live->events(), ctx.predictor);
      if (rebuilt->summary() == live->summary() && rebuilt->state() == live->state() &&
          rebuilt->events() == live->events()) {
        ++equal;
      }
    }
  }
  return {total == 60 && equal == total, std::to_string(equal) + "/" + std::to_string(total) + " replays identical"};
}

Verdict directional_study(Context& ctx) {
  std::vector<std::vector<SessionEvent>> logs;
  for (const auto& sessions : ctx.study_sessions()) {
    for (const auto& s : sessions) logs.push_back(s->events());
  }
  const auto report = cross_mode_report(logs);
  const auto& rem = report.modes[static_cast<std::size_t>(Mode::kRem)];
  const auto& saem = report.modes[static_cast<std::size_t>(Mode::kSaem)];
  const auto& aem = report.modes[static_cast<std::size_t>(Mode::kAem)];
  for (const Mode mode : kAllModes) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& row : report.rows) {
      if (row.mode != mode) continue;
      lo = std::min(lo, row.sc_preferred);
      hi = std::max(hi, row.sc_preferred);
    }
    info(std::string(to_string(mode)) + " SC range over 20 sessions: " + fmt(lo) + " to " + fmt(hi));
  }
  if (saem.median_preferred_cw && aem.median_preferred_cw) {
    info("median preferred Cw: AEM " + fmt(*aem.median_preferred_cw, 4) + ", SAEM " + fmt(*saem.median_preferred_cw, 4) +
         (*aem.median_preferred_cw < *saem.median_preferred_cw ? " (AEM lower)" : " (AEM not lower)"));
  }
  return {rem.median_sc > saem.median_sc && saem.median_sc > aem.median_sc,
          "median SC REM " + fmt(rem.median_sc) + ", SAEM " + fmt(saem.median_sc) + ", AEM " + fmt(aem.median_sc)};
}

}  // namespace

int main() {
  Context ctx;
  const std::vector<std::pair<std::string, std::function<Verdict(Context&)>>> criteria{
      {"constrained sampling", constrained_sampling},
      {"volume integration", volume_integration},
      {"wave resistance", wave_resistance},
      {"surrogate model", surrogate_model},
      {"sparseness at the centre", sparseness},
      {"shrinking bounds", shrinking_bounds},
      {"Jaya search", jaya_search},
      {"weighting objective", weighting_objective},
      {"replay", replay},
      {"directional study", directional_study},
  };
  const auto start = Stopwatch::now();
  bool all_pass = true, all_ran = true;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    const auto t = Stopwatch::now();
    try {
      v = run(ctx);
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
      all_ran = false;
    }
    all_pass = all_pass && v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << ++index << "] " << name << ": " << v.detail << " ("
              << fmt(seconds_since(t), 3) << " s)" << std::endl;
  }
  const bool headless = all_ran && HULLSPACE_WEB_UI_BUILT == 0;
  all_pass = all_pass && headless;
  std::cout << (headless ? "PASS" : "FAIL") << " [" << ++index << "] headless run: "
            << (all_ran ? "every check ran to a verdict" : "a check aborted") << " in one process without the web UI ("
            << fmt(seconds_since(start), 4) << " s total)" << std::endl;
  return all_pass ? 0 : 1;
}
