#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "hullspace/error.hpp"
#include "hullspace/surrogate.hpp"

using namespace hullspace;

namespace {

// Hand-rolled posterior from a dense solve: the oracle for GprModel.
Prediction dense_posterior(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GprHyperparameters& h,
                           const Eigen::VectorXd& q) {
  const Eigen::Index n = x.rows();
  auto k = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    double s = 0.0;
    for (Eigen::Index d = 0; d < a.size(); ++d) s += std::pow((a[d] - b[d]) / h.length_scales[d], 2);
    return h.signal_variance * std::exp(-0.5 * s);
  };
  Eigen::MatrixXd kxx(n, n);
  Eigen::VectorXd kq(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    kq[i] = k(x.row(i).transpose(), q);
    for (Eigen::Index j = 0; j < n; ++j) kxx(i, j) = k(x.row(i).transpose(), x.row(j).transpose());
  }
  kxx.diagonal().array() += h.noise_variance;
  const Eigen::MatrixXd inv = kxx.inverse();
  const Eigen::VectorXd centered = y.array() - h.prior_mean;
  return {h.prior_mean + kq.dot(inv * centered), h.signal_variance - kq.dot(inv * kq)};
}

Eigen::MatrixXd random_inputs(Eigen::Index n, Eigen::Index dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd x(n, dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) x(i, d) = uniform01(rng);
  }
  return x;
}

Eigen::VectorXd smooth_targets(const Eigen::MatrixXd& x) {
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) y[i] = std::sin(3.0 * x(i, 0)) + 0.5 * x.row(i).squaredNorm();
  return y;
}

GprHyperparameters fixed_hyper(Eigen::Index dim, double noise) {
  GprHyperparameters h;
  h.length_scales = Eigen::VectorXd::Constant(dim, 0.4);
  h.signal_variance = 1.3;
  h.noise_variance = noise;
  h.prior_mean = 0.2;
  return h;
}

}  // namespace

TEST_CASE("five-point 1-D model matches a dense solve") {
  Eigen::MatrixXd x(5, 1);
  x << 0.0, 0.3, 0.45, 0.7, 1.0;
  Eigen::VectorXd y(5);
  y << 0.1, 0.8, 0.6, -0.2, 0.4;
  GprHyperparameters h;
  h.length_scales = Eigen::VectorXd::Constant(1, 0.25);
  h.signal_variance = 0.9;
  h.noise_variance = 1e-3;
  h.prior_mean = 0.3;
  const GprModel model(x, y, h);
  CHECK(model.jitter() == 0.0);
  for (double q : {0.15, 0.5, 0.93, 1.4}) {
    const Eigen::VectorXd qv = Eigen::VectorXd::Constant(1, q);
    const Prediction p = model.predict(qv);
    const Prediction o = dense_posterior(x, y, h, qv);
    CHECK(std::abs(p.mean - o.mean) < 1e-9);
    CHECK(std::abs(p.variance - o.variance) < 1e-9);
  }
}

TEST_CASE("near-noiseless fit interpolates its training points") {
  Eigen::MatrixXd x(2, 1);
  x << 0.2, 0.9;
  Eigen::VectorXd y(2);
  y << 1.5, -0.5;
  GprFitConfig c;
  c.fixed_noise_variance = 1e-8;
  const GprModel model = fit_gpr(x, y, c);
  for (Eigen::Index i = 0; i < 2; ++i) CHECK(std::abs(model.predict(Eigen::VectorXd(x.row(i))).mean - y[i]) < 1e-6);

  const Eigen::MatrixXd x20 = random_inputs(60, 20, 3);
  const Eigen::VectorXd y20 = smooth_targets(x20);
  const GprModel m20 = fit_gpr(x20, y20, c);
  for (Eigen::Index i = 0; i < x20.rows(); ++i) {
    const Prediction p = m20.predict(Eigen::VectorXd(x20.row(i)));
    CHECK(std::abs(p.mean - y20[i]) < 1e-6);
    CHECK(p.variance <= 1e-8 + 1e-9);
  }
}

TEST_CASE("constant targets give a flat model") {
  const Eigen::MatrixXd x = random_inputs(10, 3, 1);
  const Eigen::VectorXd y = Eigen::VectorXd::Constant(10, 0.004);
  const GprModel model = fit_gpr(x, y);
  CHECK(model.hyperparameters().signal_variance < 1e-10);
  for (const auto& p : model.predict_batch(random_inputs(20, 3, 2))) CHECK(p.mean == doctest::Approx(0.004));
}

TEST_CASE("far from the data the posterior reverts to the prior") {
  const Eigen::MatrixXd x = random_inputs(30, 4, 5);
  const auto h = fixed_hyper(4, 1e-6);
  const GprModel model(x, smooth_targets(x), h);
  const Eigen::VectorXd far = Eigen::VectorXd::Constant(4, 10.0 * 0.4 + 1.0);
  const Prediction p = model.predict(far);
  CHECK(p.mean == doctest::Approx(h.prior_mean).epsilon(1e-3));
  CHECK(p.variance == doctest::Approx(h.signal_variance).epsilon(1e-3));
}

TEST_CASE("batch prediction equals single predictions") {
  const Eigen::MatrixXd x = random_inputs(40, 20, 7);
  const GprModel model(x, smooth_targets(x), fixed_hyper(20, 1e-4));
  const Eigen::MatrixXd q = random_inputs(100, 20, 8);
  const auto batch = model.predict_batch(q);
  const Eigen::VectorXd means = model.predict_mean(q);
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const Prediction single = model.predict(Eigen::VectorXd(q.row(i)));
    CHECK(batch[static_cast<std::size_t>(i)].mean == doctest::Approx(single.mean).epsilon(1e-14));
    CHECK(batch[static_cast<std::size_t>(i)].variance == doctest::Approx(single.variance).epsilon(1e-12));
    CHECK(means[i] == batch[static_cast<std::size_t>(i)].mean);
  }
}

TEST_CASE("posterior properties") {
  const Eigen::MatrixXd x = random_inputs(25, 3, 11);
  const Eigen::VectorXd y = smooth_targets(x);
  const auto h = fixed_hyper(3, 1e-4);
  const GprModel model(x, y, h);
  const Eigen::MatrixXd q = random_inputs(30, 3, 12);

  SUBCASE("variance at a training input is at most the noise") {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      CHECK(model.predict(Eigen::VectorXd(x.row(i))).variance <= h.noise_variance + 1e-8);
    }
  }
  SUBCASE("training order does not matter") {
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) perm[static_cast<std::size_t>(i)] = x.rows() - 1 - i;
    Eigen::MatrixXd xp(x.rows(), x.cols());
    Eigen::VectorXd yp(y.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      xp.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
      yp[i] = y[perm[static_cast<std::size_t>(i)]];
    }
    const GprModel permuted(xp, yp, h);
    const auto a = model.predict_batch(q), b = permuted.predict_batch(q);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].mean == doctest::Approx(b[i].mean).epsilon(1e-10));
      CHECK(a[i].variance == doctest::Approx(b[i].variance).epsilon(1e-8));
    }
  }
  SUBCASE("an extra training point never raises the variance") {
    Eigen::MatrixXd xa(x.rows() + 1, x.cols());
    xa << x, random_inputs(1, 3, 99);
    Eigen::VectorXd ya(y.size() + 1);
    ya << y, 0.3;
    const GprModel bigger(xa, ya, h);
    const auto a = model.predict_batch(q), b = bigger.predict_batch(q);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(b[i].variance <= a[i].variance + 1e-8);
  }
}

TEST_CASE("duplicate inputs without noise are repaired by jitter") {
  Eigen::MatrixXd x(3, 2);
  x << 0.1, 0.1, 0.1, 0.1, 0.8, 0.3;
  Eigen::VectorXd y(3);
  y << 1.0, 1.0, 2.0;
  GprHyperparameters h = fixed_hyper(2, 0.0);
  const GprModel model(x, y, h);
  CHECK(model.jitter() > 0.0);
  CHECK(model.jitter() <= 1e-6 * h.signal_variance);
}

TEST_CASE("hyperparameter optimization improves the marginal likelihood") {
  const Eigen::MatrixXd x = random_inputs(80, 5, 21);
  const Eigen::VectorXd y = smooth_targets(x);
  GprFitConfig none;
  none.optimize = false;
  const GprModel start = fit_gpr(x, y, none);
  const GprModel tuned = fit_gpr(x, y);
  CHECK(tuned.log_marginal_likelihood() > start.log_marginal_likelihood());
  CHECK((tuned.hyperparameters().length_scales.array() > 0.0).all());
  CHECK(tuned.hyperparameters().noise_variance > 0.0);
}

TEST_CASE("model files round-trip") {
  const Eigen::MatrixXd x = random_inputs(15, 20, 4);
  const GprModel model(x, smooth_targets(x), fixed_hyper(20, 1e-5));
  const auto path = std::filesystem::temp_directory_path() / "hullspace-gpr-roundtrip.json";
  model.save(path.string());
  const GprModel back = GprModel::load(path.string());
  std::filesystem::remove(path);
  const Eigen::MatrixXd q = random_inputs(10, 20, 5);
  CHECK((model.predict_mean(q) - back.predict_mean(q)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(GprModel::from_json_text(R"({"format":"other"})"), Error);
  CHECK_THROWS_AS(GprModel::load("/nonexistent/model.json"), Error);
}

TEST_CASE("regression metrics") {
  const auto perfect = regression_metrics({1, 2, 3}, {1, 2, 3});
  CHECK(perfect.rmse == 0.0);
  CHECK(perfect.r2 == 1.0);
  const auto mean_only = regression_metrics({1, 2, 3}, {2, 2, 2});
  CHECK(mean_only.r2 == doctest::Approx(0.0));
  CHECK(mean_only.rmse == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("pipeline smoke run with fifty samples") {
  CHECK_THROWS_AS(train_surrogate_pipeline(49, 1), Error);
  const auto t = train_surrogate_pipeline(50, 1);
  CHECK(t.report.samples == 50);
  CHECK(t.report.holdout == 5);
  CHECK(t.report.train == 45);
  CHECK(t.model.size() == 45);
  CHECK(t.latents.size() == 50);
  for (double cw : t.cw) CHECK(cw > 0.0);
  CHECK(t.report.to_csv().rfind("samples,train,holdout,", 0) == 0);
}
