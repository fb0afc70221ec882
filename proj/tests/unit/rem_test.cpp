#include <doctest.h>

#include <atomic>

#include "hullspace/error.hpp"
#include "hullspace/rem.hpp"
#include "support.hpp"

using namespace hullspace;

namespace {

// Counts model calls so caching can be observed from outside.
class CountingPredictor final : public CwPredictor {
 public:
  double predict(const LatentVector& x) const override {
    ++calls;
    return testing::toy_cw(x);
  }
  std::string name() const override { return "counting"; }
  mutable std::atomic<int> calls{0};
};

}  // namespace

TEST_CASE("REM pool") {
  auto config = testing::small_config();
  const auto a = build_rem_pool(31, config.rem);
  CHECK(a->designs.size() == 120);
  CHECK(a->embedding.points.size() == 120);
  for (const auto& d : a->designs) CHECK(check_constraints(compute_principal_dimensions(d.geometry)).all_satisfied);
  CHECK(build_rem_pool(31, config.rem) == a);

  // An explicit pool seed overrides the session seed.
  config.rem.pool_seed = 31;
  const auto b = build_rem_pool(99, config.rem);
  CHECK(b != a);
  for (std::size_t i = 0; i < a->designs.size(); ++i) CHECK(a->designs[i].latent == b->designs[i].latent);
  CHECK(a->embedding.points == b->embedding.points);
  CHECK_THROWS_AS(a->at("d999999"), Error);
}

TEST_CASE("REM session flow") {
  const auto predictor = std::make_shared<CountingPredictor>();
  auto session = open_session(testing::spec_for(Mode::kRem, 32), predictor);
  auto& rem = dynamic_cast<RemSession&>(*session);
  const auto& pool = rem.pool();

  SUBCASE("clicking on a point views that design") {
    const Point2 p = pool.embedding.points[17];
    CHECK(rem.click(p.u, p.v, 10).id == pool.designs[17].id);
    CHECK(rem.current() == pool.designs[17].id);
  }

  SUBCASE("viewing shows no Cw until evaluated") {
    const auto shown = rem.act({{"verb", "view"}, {"design_id", "d000004"}}, 5);
    CHECK_FALSE(shown.contains("cw"));
    const double cw = rem.evaluate("d000004", 6);
    CHECK(cw == testing::toy_cw(pool.at("d000004").latent));
    CHECK(rem.evaluate("d000004", 7) == cw);
    CHECK(predictor->calls == 1);
    CHECK(rem.evaluated_cw("d000004") == cw);
    CHECK(rem.act({{"verb", "view"}, {"design_id", "d000004"}}, 8).at("cw") == cw);
    CHECK(rem.events().back().payload.at("design_id") == "d000004");
  }

  SUBCASE("five slots complete the session") {
    CHECK_THROWS_AS(rem.select(0, "d000001", Rationale::kForm, 1), Error);
    CHECK_THROWS_AS(rem.select(6, "d000001", Rationale::kForm, 1), Error);
    for (std::size_t s = 1; s <= 4; ++s) rem.select(s, design_id("d", s), Rationale::kForm, static_cast<std::int64_t>(s));
    try {
      rem.terminate(10);
      FAIL("expected an incomplete selection");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kIncompleteSelection);
    }
    rem.select(5, "d000005", Rationale::kBoth, 11);
    rem.select(2, "d000009", Rationale::kPerformance, 12);
    const auto& overwrite = rem.events().back();
    CHECK(overwrite.payload.at("previous") == "d000002");
    CHECK(overwrite.payload.at("design_id") == "d000009");
    rem.terminate(13);
    CHECK(rem.terminated());
    CHECK(rem.slots()[1]->design_id == "d000009");
    CHECK_THROWS_AS(rem.view("d000001", 14), Error);
  }

  SUBCASE("unknown designs and verbs") {
    CHECK_THROWS_AS(rem.view("x", 1), Error);
    CHECK_THROWS_AS(rem.act({{"verb", "fly"}}, 1), Error);
    CHECK_THROWS_AS(rem.act({{"verb", "view"}}, 1), Error);
  }
}

TEST_CASE("REM queries") {
  auto session = open_session(testing::spec_for(Mode::kRem, 33), testing::toy_predictor());
  const auto map = session->query({{"query", "embedding"}});
  CHECK(map.at("points").size() == 120);
  CHECK(map.contains("hull"));
}
