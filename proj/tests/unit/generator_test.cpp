#include <doctest.h>

#include <algorithm>
#include <random>

#include "hullspace/error.hpp"
#include "hullspace/generator.hpp"

using namespace hullspace;

TEST_CASE("centre of the latent box is a valid feasible hull") {
  const auto record = make_design_record("c", LatentVector::filled(0.5));
  CHECK(validate_geometry(record.geometry).valid);
  CHECK(record.constraints.all_satisfied);
  CHECK(record.geometry.station_count() == 60);
  CHECK(record.geometry.waterline_count() == 20);
  // The stem station carries no breadth, so the waterline spans 58 of 59 spacings.
  CHECK(record.dimensions.length_waterline == doctest::Approx(236.9 * 58.0 / 59.0).epsilon(1e-12));
  CHECK(record.dimensions.beam_waterline == doctest::Approx(32.2).epsilon(1e-4));
  CHECK(record.dimensions.draft == doctest::Approx(10.8).epsilon(1e-4));
}

TEST_CASE("extreme corners of the latent box stay valid") {
  CHECK(validate_geometry(generate(LatentVector::filled(0.0))).valid);
  CHECK(validate_geometry(generate(LatentVector::filled(1.0))).valid);
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    LatentVector x;
    for (std::size_t d = 0; d < kLatentDim; ++d) x[d] = static_cast<double>(rng() & 1u);
    const auto report = validate_geometry(generate(x));
    CHECK_MESSAGE(report.valid, "corner " << k);
  }
}

TEST_CASE("generation is deterministic and rejects out-of-box latents") {
  LatentVector x = LatentVector::filled(0.37);
  x[4] = 0.91;
  CHECK(generate(x) == generate(x));
  x[7] = 1.2;
  try {
    generate(x);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kOutOfBounds);
    CHECK(std::string(e.what()).find("dimension 7") != std::string::npos);
  }
}

TEST_CASE("aft parameters leave the fore body untouched") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    LatentVector a;
    for (std::size_t d = 0; d < kLatentDim; ++d) a[d] = uniform01(rng);
    LatentVector b = a;
    for (std::size_t d = 0; d < kLatentDim; ++d) {
      if (is_aft_parameter(d)) b[d] = uniform01(rng);
    }
    const auto ta = generate(a), tb = generate(b);
    for (std::size_t i = 0; i < ta.station_count(); ++i) {
      if (ta.stations()[i] < 0.5 * ta.stations().back()) continue;
      for (std::size_t j = 0; j < ta.waterline_count(); ++j) REQUIRE(ta.breadth(i, j) == tb.breadth(i, j));
    }
  }
}

TEST_CASE("constrained sampling") {
  CHECK(sample_constrained(0, 1).empty());
  const auto a = sample_constrained(100, 42);
  const auto b = sample_constrained(100, 42);
  REQUIRE(a.size() == 100);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].id == b[i].id);
    CHECK(a[i].latent == b[i].latent);
    CHECK_FALSE(a[i].cw.has_value());
    CHECK(a[i].cw_source == CwSource::kUnevaluated);
    // Independent re-check from the geometry.
    CHECK(check_constraints(compute_principal_dimensions(a[i].geometry)).all_satisfied);
  }
  CHECK(a.front().id == "d000000");
  CHECK(a.back().id == "d000099");
}

TEST_CASE("calibration keeps at least a fifth of the root box feasible") {
  CHECK(estimate_acceptance_rate(2000, 3) >= 0.2);
}

TEST_CASE("an unreachable constraint band trips the rejection floor") {
  GeneratorConfig c;
  c.constraints.displacement = {1.0, 2.0};
  c.probe_batch = 50;
  try {
    sample_constrained(10, 1, c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kInfeasible);
    CHECK(std::string(e.what()).find("recalibrate") != std::string::npos);
  }
}

TEST_CASE("stratified sample") {
  SUBCASE("single point lies inside the bounds") {
    std::array<double, kLatentDim> lo{}, hi{};
    lo.fill(0.2);
    hi.fill(0.3);
    const DesignSpaceBounds box(lo, hi);
    const auto one = uniform_sample(box, 1, 9);
    REQUIRE(one.size() == 1);
    CHECK(box.contains(one[0]));
  }
  SUBCASE("five points fill five distinct strata in every dimension") {
    const auto pts = uniform_sample(DesignSpaceBounds::root(), 5, 17);
    for (std::size_t d = 0; d < kLatentDim; ++d) {
      std::vector<int> strata;
      for (const auto& p : pts) strata.push_back(static_cast<int>(p[d] * 5.0));
      std::sort(strata.begin(), strata.end());
      CHECK(strata == std::vector<int>{0, 1, 2, 3, 4});
    }
  }
  SUBCASE("spreads better than i.i.d. draws") {
    auto min_gap = [](const std::vector<LatentVector>& pts) {
      double best = 1e300;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, distance(pts[i], pts[j]));
      }
      return best;
    };
    int wins = 0;
    for (std::uint64_t s = 0; s < 100; ++s) {
      if (min_gap(uniform_sample(DesignSpaceBounds::root(), 50, s)) >
          min_gap(random_sample(DesignSpaceBounds::root(), 50, s + 1000))) {
        ++wins;
      }
    }
    CHECK(wins >= 80);
  }
  SUBCASE("points never leave shrunken bounds") {
    std::array<double, kLatentDim> lo{}, hi{};
    for (std::size_t d = 0; d < kLatentDim; ++d) {
      lo[d] = 0.01 * static_cast<double>(d);
      hi[d] = lo[d] + 0.003;
    }
    const DesignSpaceBounds box(lo, hi);
    for (const auto& p : uniform_sample(box, 37, 4)) CHECK(box.contains(p));
  }
}
