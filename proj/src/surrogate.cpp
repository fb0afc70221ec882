#include "hullspace/surrogate.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <ceres/ceres.h>
#include <json.hpp>

#include "hullspace/error.hpp"

namespace hullspace {

namespace {

using json = nlohmann::json;

constexpr std::array<double, 6> kJitterLadder{0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
constexpr double kLogBound = 18.0;

// Signal-free kernel exp(-0.5 r^2) between rows of a and rows of b after
// scaling columns by 1/length_scales.
Eigen::MatrixXd unit_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                            const Eigen::VectorXd& length_scales) {
  const Eigen::RowVectorXd inv = length_scales.cwiseInverse().transpose();
  const Eigen::MatrixXd sa = a.array().rowwise() * inv.array();
  const Eigen::MatrixXd sb = b.array().rowwise() * inv.array();
  const Eigen::VectorXd na = sa.rowwise().squaredNorm();
  const Eigen::VectorXd nb = sb.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * sa * sb.transpose();
  d2.colwise() += na;
  d2.rowwise() += nb.transpose();
  return (-0.5 * d2.array().max(0.0)).exp().matrix();
}

struct Factorization {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  bool ok = false;
};

Factorization factorize(const Eigen::MatrixXd& k, double noise, double signal) {
  Factorization f;
  const Eigen::Index n = k.rows();
  for (double rel : kJitterLadder) {
    Eigen::MatrixXd ky = k;
    ky.diagonal().array() += noise + rel * signal;
    f.llt.compute(ky);
    if (f.llt.info() == Eigen::Success) {
      const Eigen::MatrixXd& l = f.llt.matrixLLT();
      bool positive = true;
      for (Eigen::Index i = 0; i < n && positive; ++i) positive = l(i, i) > 0.0 && std::isfinite(l(i, i));
      if (positive) {
        f.jitter = rel * signal;
        f.ok = true;
        return f;
      }
    }
  }
  return f;
}

std::string duplicate_suspects(const Eigen::MatrixXd& x) {
  struct Pair {
    double d;
    Eigen::Index i, j;
  };
  std::vector<Pair> pairs;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < x.rows(); ++j) {
      pairs.push_back({(x.row(i) - x.row(j)).norm(), i, j});
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.d < b.d; });
  std::ostringstream out;
  for (std::size_t k = 0; k < std::min<std::size_t>(5, pairs.size()); ++k) {
    if (k) out << ", ";
    out << "(" << pairs[k].i << "," << pairs[k].j << " dist " << pairs[k].d << ")";
  }
  return out.str();
}

// Negative log marginal likelihood over
//   theta = [log l_1 .. log l_D, log signal, log(noise - noise_floor)]
// with the last entry dropped when the noise is fixed.
class NegativeLml final : public ceres::FirstOrderFunction {
 public:
  NegativeLml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::optional<double> fixed_noise,
              double noise_floor)
      : x_(x), y_(y), fixed_noise_(fixed_noise), noise_floor_(noise_floor) {}

  int NumParameters() const override {
    return static_cast<int>(x_.cols()) + (fixed_noise_ ? 1 : 2);
  }

  bool Evaluate(const double* theta, double* cost, double* gradient) const override {
    const Eigen::Index dim = x_.cols();
    const Eigen::Index n = x_.rows();
    for (int p = 0; p < NumParameters(); ++p) {
      if (!(std::abs(theta[p]) < kLogBound)) return false;
    }
    Eigen::VectorXd ell(dim);
    for (Eigen::Index d = 0; d < dim; ++d) ell[d] = std::exp(theta[d]);
    const double signal = std::exp(theta[dim]);
    const double noise_free = fixed_noise_ ? 0.0 : std::exp(theta[dim + 1]);
    const double noise = fixed_noise_ ? *fixed_noise_ : noise_floor_ + noise_free;

    const Eigen::MatrixXd kf = signal * unit_kernel(x_, x_, ell);
    Eigen::MatrixXd ky = kf;
    ky.diagonal().array() += noise;
    Eigen::LLT<Eigen::MatrixXd> llt(ky);
    if (llt.info() != Eigen::Success) return false;
    const Eigen::VectorXd alpha = llt.solve(y_);
    const Eigen::MatrixXd& l = llt.matrixLLT();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(l(i, i) > 0.0)) return false;
      log_det += 2.0 * std::log(l(i, i));
    }
    const double lml = -0.5 * y_.dot(alpha) - 0.5 * log_det -
                       0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    if (!std::isfinite(lml)) return false;
    *cost = -lml;
    if (gradient == nullptr) return true;

    // dLML/dtheta_k = 0.5 tr(W dK/dtheta_k), W = alpha alpha^T - K^-1
    Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(n, n));
    w = alpha * alpha.transpose() - w;
    const Eigen::MatrixXd m = w.cwiseProduct(kf);
    const Eigen::VectorXd row_sums = m.rowwise().sum();
    for (Eigen::Index d = 0; d < dim; ++d) {
      const Eigen::VectorXd xd = x_.col(d);
      const double sum = 2.0 * xd.cwiseAbs2().dot(row_sums) - 2.0 * xd.dot(m * xd);
      gradient[d] = -0.5 * sum / (ell[d] * ell[d]);
    }
    gradient[dim] = -0.5 * m.sum();
    if (!fixed_noise_) gradient[dim + 1] = -0.5 * noise_free * w.trace();
    return true;
  }

 private:
  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  std::optional<double> fixed_noise_;
  double noise_floor_;
};

}  // namespace

GprModel::GprModel(Eigen::MatrixXd inputs, Eigen::VectorXd targets, GprHyperparameters hyper)
    : inputs_(std::move(inputs)), targets_(std::move(targets)), hyper_(std::move(hyper)) {
  const Eigen::Index n = inputs_.rows();
  if (n < 1 || targets_.size() != n) {
    throw Error(ErrorKind::kInvalidArgument, "GPR needs matching, non-empty inputs and targets");
  }
  if (hyper_.length_scales.size() != inputs_.cols() || !(hyper_.length_scales.array() > 0.0).all() ||
      !(hyper_.signal_variance > 0.0) || !(hyper_.noise_variance >= 0.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                "GPR hyperparameters need one positive length scale per input dimension, "
                "positive signal variance and non-negative noise");
  }
  const Eigen::MatrixXd k = hyper_.signal_variance * unit_kernel(inputs_, inputs_, hyper_.length_scales);
  Factorization f = factorize(k, hyper_.noise_variance, hyper_.signal_variance);
  if (!f.ok) {
    throw Error(ErrorKind::kConditioning,
                "kernel matrix is not positive definite after maximum jitter; nearest input pairs: " +
                    duplicate_suspects(inputs_));
  }
  jitter_ = f.jitter;
  chol_ = f.llt.matrixL();
  const Eigen::VectorXd centered = targets_.array() - hyper_.prior_mean;
  alpha_ = f.llt.solve(centered);
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(chol_(i, i));
  lml_ = -0.5 * centered.dot(alpha_) - 0.5 * log_det -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

Prediction GprModel::predict(const Eigen::VectorXd& x) const {
  return predict_batch(x.transpose()).front();
}

Prediction GprModel::predict(const LatentVector& x) const { return predict(to_eigen(x)); }

Eigen::VectorXd GprModel::mean_from_cross(const Eigen::MatrixXd& ks) const {
  return (ks * alpha_).array() + hyper_.prior_mean;
}

Eigen::VectorXd GprModel::predict_mean(const Eigen::MatrixXd& xs) const {
  if (xs.cols() != inputs_.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "query dimension does not match the model");
  }
  return mean_from_cross(hyper_.signal_variance * unit_kernel(xs, inputs_, hyper_.length_scales));
}

std::vector<Prediction> GprModel::predict_batch(const Eigen::MatrixXd& xs) const {
  if (xs.cols() != inputs_.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "query dimension does not match the model");
  }
  const Eigen::MatrixXd ks = hyper_.signal_variance * unit_kernel(xs, inputs_, hyper_.length_scales);
  const Eigen::VectorXd mean = mean_from_cross(ks);
  const Eigen::MatrixXd v = chol_.triangularView<Eigen::Lower>().solve(ks.transpose());
  const Eigen::VectorXd explained = v.colwise().squaredNorm().transpose();
  std::vector<Prediction> out(static_cast<std::size_t>(xs.rows()));
  for (Eigen::Index r = 0; r < xs.rows(); ++r) {
    out[static_cast<std::size_t>(r)] = {mean[r], std::max(0.0, hyper_.signal_variance - explained[r])};
  }
  return out;
}

std::string GprModel::to_json_text() const {
  json j;
  j["format"] = "hullspace-gpr";
  j["version"] = 1;
  j["kernel"] = "anisotropic-squared-exponential";
  j["length_scales"] = std::vector<double>(hyper_.length_scales.data(),
                                           hyper_.length_scales.data() + hyper_.length_scales.size());
  j["signal_variance"] = hyper_.signal_variance;
  j["noise_variance"] = hyper_.noise_variance;
  j["prior_mean"] = hyper_.prior_mean;
  json rows = json::array();
  for (Eigen::Index i = 0; i < inputs_.rows(); ++i) {
    rows.push_back(std::vector<double>(inputs_.cols()));
    for (Eigen::Index d = 0; d < inputs_.cols(); ++d) rows.back()[d] = inputs_(i, d);
  }
  j["inputs"] = std::move(rows);
  j["targets"] = std::vector<double>(targets_.data(), targets_.data() + targets_.size());
  return j.dump();
}

GprModel GprModel::from_json_text(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format") != "hullspace-gpr") throw Error(ErrorKind::kIo, "not a GPR model file");
    GprHyperparameters h;
    const auto ell = j.at("length_scales").get<std::vector<double>>();
    h.length_scales = Eigen::Map<const Eigen::VectorXd>(ell.data(), static_cast<Eigen::Index>(ell.size()));
    h.signal_variance = j.at("signal_variance").get<double>();
    h.noise_variance = j.at("noise_variance").get<double>();
    h.prior_mean = j.at("prior_mean").get<double>();
    const auto& rows = j.at("inputs");
    const auto targets = j.at("targets").get<std::vector<double>>();
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ell.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto row = rows[i].get<std::vector<double>>();
      if (row.size() != ell.size()) throw Error(ErrorKind::kIo, "GPR input row has wrong dimension");
      for (std::size_t d = 0; d < row.size(); ++d) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = row[d];
    }
    Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size()));
    return GprModel(std::move(x), std::move(y), std::move(h));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kIo, std::string("malformed GPR model: ") + e.what());
  }
}

void GprModel::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path);
  out << to_json_text() << "\n";
}

GprModel GprModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot read " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

GprModel fit_gpr(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                 const GprFitConfig& config) {
  const Eigen::Index n = inputs.rows();
  const Eigen::Index dim = inputs.cols();
  if (n < 2 || targets.size() != n) {
    throw Error(ErrorKind::kInvalidArgument, "GPR fit needs at least two samples with targets");
  }
  const double mean = targets.mean();
  const double var = (targets.array() - mean).square().sum() / static_cast<double>(n);
  Eigen::VectorXd range(dim);
  for (Eigen::Index d = 0; d < dim; ++d) {
    const double r = inputs.col(d).maxCoeff() - inputs.col(d).minCoeff();
    range[d] = r > 0.0 ? r : 1.0;
  }

  GprHyperparameters best;
  best.prior_mean = mean;
  best.length_scales = range * (config.start_length_scales.empty() ? 1.0 : config.start_length_scales.front());

  if (!(var > 0.0)) {
    // Constant targets: no signal to explain.
    best.signal_variance = 1e-12 * std::max(1.0, mean * mean);
    best.noise_variance = config.fixed_noise_variance.value_or(best.signal_variance);
    return GprModel(inputs, targets, best);
  }
  best.signal_variance = var;
  best.noise_variance = config.fixed_noise_variance.value_or(1e-4 * var);
  if (!config.optimize) return GprModel(inputs, targets, best);

  // Optimize on standardized targets and a random subset.
  const double scale = std::sqrt(var);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::mt19937_64 rng(config.seed);
  shuffle(order, rng);
  const Eigen::Index m = std::min<Eigen::Index>(n, static_cast<Eigen::Index>(config.optimizer_subset));
  Eigen::MatrixXd xs(m, dim);
  Eigen::VectorXd ys(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    xs.row(i) = inputs.row(order[static_cast<std::size_t>(i)]);
    ys[i] = (targets[order[static_cast<std::size_t>(i)]] - mean) / scale;
  }
  std::optional<double> fixed;
  if (config.fixed_noise_variance) fixed = *config.fixed_noise_variance / var;
  const double floor = config.min_noise_ratio;

  double best_cost = std::numeric_limits<double>::infinity();
  for (double start : config.start_length_scales) {
    auto* fn = new NegativeLml(xs, ys, fixed, floor);
    std::vector<double> theta(static_cast<std::size_t>(fn->NumParameters()));
    for (Eigen::Index d = 0; d < dim; ++d) theta[static_cast<std::size_t>(d)] = std::log(start * range[d]);
    theta[static_cast<std::size_t>(dim)] = 0.0;
    if (!fixed) theta[static_cast<std::size_t>(dim) + 1] = std::log(1e-4);
    ceres::GradientProblem problem(fn);
    ceres::GradientProblemSolver::Options options;
    options.line_search_direction_type = ceres::LBFGS;
    options.max_num_iterations = config.max_iterations;
    options.logging_type = ceres::SILENT;
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, theta.data(), &summary);
    double cost = 0.0;
    if (!problem.Evaluate(theta.data(), &cost, nullptr) || !(cost < best_cost)) continue;
    best_cost = cost;
    for (Eigen::Index d = 0; d < dim; ++d) best.length_scales[d] = std::exp(theta[static_cast<std::size_t>(d)]);
    best.signal_variance = std::exp(theta[static_cast<std::size_t>(dim)]) * var;
    best.noise_variance = fixed ? *config.fixed_noise_variance
                                : (floor + std::exp(theta[static_cast<std::size_t>(dim) + 1])) * var;
  }
  return GprModel(inputs, targets, best);
}

Eigen::VectorXd to_eigen(const LatentVector& x) {
  return Eigen::Map<const Eigen::VectorXd>(x.values.data(), static_cast<Eigen::Index>(kLatentDim));
}

Eigen::MatrixXd latent_matrix(const std::vector<LatentVector>& latents) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(latents.size()), static_cast<Eigen::Index>(kLatentDim));
  for (std::size_t i = 0; i < latents.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = to_eigen(latents[i]).transpose();
  return out;
}

FitMetrics regression_metrics(const std::vector<double>& truth, const std::vector<double>& predicted) {
  FitMetrics m;
  if (truth.empty() || truth.size() != predicted.size()) return m;
  double mean = 0.0;
  for (double t : truth) mean += t;
  mean /= static_cast<double>(truth.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ss_res += (truth[i] - predicted[i]) * (truth[i] - predicted[i]);
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  m.rmse = std::sqrt(ss_res / static_cast<double>(truth.size()));
  m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return m;
}

std::string HoldoutReport::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "samples,train,holdout,train_rmse,train_r2,holdout_rmse,holdout_r2\n"
      << samples << "," << train << "," << holdout << "," << train_fit.rmse << "," << train_fit.r2
      << "," << holdout_fit.rmse << "," << holdout_fit.r2 << "\n";
  return out.str();
}

SurrogateTraining train_surrogate_pipeline(std::size_t samples, std::uint64_t seed,
                                           const SurrogatePipelineConfig& config) {
  if (samples < 50) throw Error(ErrorKind::kInvalidArgument, "surrogate pipeline needs at least 50 samples");
  if (!(config.holdout_fraction > 0.0 && config.holdout_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "holdout fraction must lie in (0,1)");
  }
  SurrogateTraining out;
  const auto evaluator = make_evaluator(config.evaluator);
  for (std::size_t batch = 0; out.latents.size() < samples; ++batch) {
    if (batch == config.max_batches) {
      throw Error(ErrorKind::kInfeasible, "too few feasible designs in " + std::to_string(batch) +
                                              " space-filling batches");
    }
    for (const auto& x : uniform_sample(DesignSpaceBounds::root(), samples, derive_seed(seed, batch))) {
      if (out.latents.size() == samples) break;
      const DesignRecord record = make_design_record({}, x, config.generator);
      if (!record.constraints.all_satisfied) continue;
      out.latents.push_back(x);
      out.cw.push_back(evaluator->evaluate(record.geometry));
    }
  }

  std::vector<std::size_t> order(samples);
  for (std::size_t i = 0; i < samples; ++i) order[i] = i;
  std::mt19937_64 rng(derive_seed(seed, 0x5eedULL));
  shuffle(order, rng);
  const auto holdout = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(config.holdout_fraction * static_cast<double>(samples))));
  const std::size_t train = samples - holdout;

  Eigen::MatrixXd xt(static_cast<Eigen::Index>(train), static_cast<Eigen::Index>(kLatentDim));
  Eigen::VectorXd yt(static_cast<Eigen::Index>(train));
  Eigen::MatrixXd xh(static_cast<Eigen::Index>(holdout), static_cast<Eigen::Index>(kLatentDim));
  std::vector<double> yh(holdout), train_truth(train);
  for (std::size_t k = 0; k < samples; ++k) {
    const std::size_t i = order[k];
    if (k < train) {
      xt.row(static_cast<Eigen::Index>(k)) = to_eigen(out.latents[i]).transpose();
      yt[static_cast<Eigen::Index>(k)] = out.cw[i];
      train_truth[k] = out.cw[i];
    } else {
      xh.row(static_cast<Eigen::Index>(k - train)) = to_eigen(out.latents[i]).transpose();
      yh[k - train] = out.cw[i];
    }
  }
  out.model = fit_gpr(xt, yt, config.gpr);

  auto means = [](const std::vector<Prediction>& ps) {
    std::vector<double> m(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) m[i] = ps[i].mean;
    return m;
  };
  out.report.samples = samples;
  out.report.train = train;
  out.report.holdout = holdout;
  out.report.train_fit = regression_metrics(train_truth, means(out.model.predict_batch(xt)));
  out.report.holdout_fit = regression_metrics(yh, means(out.model.predict_batch(xh)));
  return out;
}

}  // namespace hullspace
