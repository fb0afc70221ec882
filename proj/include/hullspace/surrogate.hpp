#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hullspace/generator.hpp"
#include "hullspace/hydro.hpp"
#include "hullspace/latent.hpp"

namespace hullspace {

/// Anisotropic squared-exponential kernel
///   k(a, b) = signal_variance * exp(-0.5 * sum_d ((a_d - b_d) / l_d)^2)
/// with Gaussian observation noise and a constant prior mean.
struct GprHyperparameters {
  Eigen::VectorXd length_scales;
  double signal_variance = 1.0;
  double noise_variance = 1e-8;
  double prior_mean = 0.0;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;  // latent-function variance, clamped at zero
};

struct GprFitConfig {
  bool optimize = true;
  /// When set the noise variance is held at this value; otherwise it is a
  /// free hyperparameter bounded below by min_noise_ratio * var(targets).
  std::optional<double> fixed_noise_variance;
  double min_noise_ratio = 1e-8;
  /// Hyperparameters are tuned on a random subset of at most this many
  /// training points; the final model always conditions on all of them.
  std::size_t optimizer_subset = 500;
  int max_iterations = 80;
  /// Multi-start: initial length scale of every dimension, as a multiple of
  /// that dimension's input range.
  std::vector<double> start_length_scales{0.5, 2.0};
  std::uint64_t seed = 7;
};

class GprModel {
 public:
  GprModel() = default;
  /// Conditions on the data with fixed hyperparameters. Jitter from 1e-10 to
  /// 1e-6 (relative to the signal variance) is added if the kernel matrix is
  /// not numerically positive definite.
  GprModel(Eigen::MatrixXd inputs, Eigen::VectorXd targets, GprHyperparameters hyper);

  Prediction predict(const Eigen::VectorXd& x) const;
  Prediction predict(const LatentVector& x) const;
  /// One row per query point.
  std::vector<Prediction> predict_batch(const Eigen::MatrixXd& xs) const;
  /// Posterior means only; skips the variance solve.
  Eigen::VectorXd predict_mean(const Eigen::MatrixXd& xs) const;

  double log_marginal_likelihood() const { return lml_; }
  const GprHyperparameters& hyperparameters() const { return hyper_; }
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  std::size_t size() const { return static_cast<std::size_t>(inputs_.rows()); }
  std::size_t dimension() const { return static_cast<std::size_t>(inputs_.cols()); }
  double jitter() const { return jitter_; }

  /// JSON text with the hyperparameters and the full training set.
  std::string to_json_text() const;
  static GprModel from_json_text(const std::string& text);
  void save(const std::string& path) const;
  static GprModel load(const std::string& path);

 private:
  Eigen::VectorXd mean_from_cross(const Eigen::MatrixXd& ks) const;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd targets_;
  GprHyperparameters hyper_;
  Eigen::MatrixXd chol_;  // lower Cholesky factor of K + (noise + jitter) I
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  double lml_ = 0.0;
};

/// Chooses hyperparameters by maximizing the log marginal likelihood, then
/// conditions on all data. Requires at least two samples.
GprModel fit_gpr(const Eigen::MatrixXd& inputs, const Eigen::VectorXd& targets,
                 const GprFitConfig& config = {});

Eigen::MatrixXd latent_matrix(const std::vector<LatentVector>& latents);
Eigen::VectorXd to_eigen(const LatentVector& x);

struct FitMetrics {
  double rmse = 0.0;
  double r2 = 0.0;
};

FitMetrics regression_metrics(const std::vector<double>& truth, const std::vector<double>& predicted);

struct HoldoutReport {
  std::size_t samples = 0;
  std::size_t train = 0;
  std::size_t holdout = 0;
  FitMetrics train_fit;
  FitMetrics holdout_fit;

  /// Two-line CSV: header and values.
  std::string to_csv() const;
};

struct SurrogatePipelineConfig {
  GprFitConfig gpr{};
  GeneratorConfig generator{};
  EvaluatorConfig evaluator{};
  double holdout_fraction = 0.1;
  /// Space-filling batches drawn before giving up on collecting enough
  /// feasible designs.
  std::size_t max_batches = 64;
};

struct SurrogateTraining {
  GprModel model;
  HoldoutReport report;
  std::vector<LatentVector> latents;  // all feasible samples, in draw order
  std::vector<double> cw;
};

/// Space-filling root-box batches filtered by the constraints until
/// `samples` feasible designs are collected, each evaluated with the
/// configured direct solver; a random holdout_fraction is withheld from the
/// fit and scored. Requires samples >= 50.
SurrogateTraining train_surrogate_pipeline(std::size_t samples, std::uint64_t seed,
                                           const SurrogatePipelineConfig& config = {});

}  // namespace hullspace
