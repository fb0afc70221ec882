#include "hullspace/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "hullspace/error.hpp"
#include "hullspace/latent.hpp"

namespace hullspace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.u - o.u) * (b.v - o.v) - (a.v - o.v) * (b.u - o.u);
}

ConvexHull convex_hull(const std::vector<Point2>& points) {
  ConvexHull hull;
  const std::size_t n = points.size();
  if (n == 0) {
    hull.degenerate = true;
    return hull;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Point2& p = points[a];
    const Point2& q = points[b];
    return p.u < q.u || (p.u == q.u && (p.v < q.v || (p.v == q.v && a < b)));
  });
  // drop exact duplicates
  order.erase(std::unique(order.begin(), order.end(),
                          [&](std::size_t a, std::size_t b) { return points[a] == points[b]; }),
              order.end());
  if (order.size() == 1) {
    hull.vertices = order;
    hull.degenerate = true;
    return hull;
  }

  std::vector<std::size_t> chain(2 * order.size());
  std::size_t k = 0;
  for (std::size_t idx : order) {
    while (k >= 2 && cross(points[chain[k - 2]], points[chain[k - 1]], points[idx]) <= 0.0) --k;
    chain[k++] = idx;
  }
  for (std::size_t i = order.size() - 1, lower = k + 1; i-- > 0;) {
    const std::size_t idx = order[i];
    while (k >= lower && cross(points[chain[k - 2]], points[chain[k - 1]], points[idx]) <= 0.0) --k;
    chain[k++] = idx;
  }
  chain.resize(k - 1);
  if (chain.size() < 3) {
    hull.vertices = {order.front(), order.back()};
    hull.degenerate = true;
    return hull;
  }
  hull.vertices = std::move(chain);
  return hull;
}

namespace {

// Standard normal via Box-Muller on the portable uniform source.
double normal(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

// Row-conditional affinities with per-point precision found by bisection so
// that each row's entropy equals log(perplexity).
Eigen::MatrixXd conditional_affinities(const Eigen::MatrixXd& d2, double perplexity) {
  const Eigen::Index n = d2.rows();
  const double target = std::log(perplexity);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, lo = 0.0, hi = std::numeric_limits<double>::infinity();
    // scale-free start: distances relative to the row's smallest positive one
    double dmin = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i && d2(i, j) > 0.0) dmin = std::min(dmin, d2(i, j));
    }
    const double offset = std::isfinite(dmin) ? dmin : 0.0;
    for (int iter = 0; iter < 200; ++iter) {
      double sum = 0.0, weighted = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row[j] = j == i ? 0.0 : std::exp(-beta * (d2(i, j) - offset));
        sum += row[j];
        weighted += row[j] * (d2(i, j) - offset);
      }
      if (!(sum > 0.0)) {
        hi = beta;
        beta = (lo + hi) / 2.0;
        continue;
      }
      const double entropy = std::log(sum) + beta * weighted / sum;
      const double diff = entropy - target;
      if (std::abs(diff) < 1e-6) break;
      if (diff > 0.0) {
        lo = beta;
        beta = std::isfinite(hi) ? (lo + hi) / 2.0 : beta * 2.0;
      } else {
        hi = beta;
        beta = (lo + hi) / 2.0;
      }
    }
    const double sum = row.sum();
    p.row(i) = row.transpose() / (sum > 0.0 ? sum : 1.0);
  }
  return p;
}

}  // namespace

std::vector<Point2> tsne(const Eigen::MatrixXd& x, const TsneConfig& config) {
  const Eigen::Index n = x.rows();
  if (n < 3) throw Error(ErrorKind::kEmbedding, "t-SNE needs at least 3 points");
  const Eigen::VectorXd norms = x.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = -2.0 * x * x.transpose();
  d2.colwise() += norms;
  d2.rowwise() += norms.transpose();
  d2 = d2.cwiseMax(0.0);
  d2.diagonal().setZero();

  const double perplexity = std::min(config.perplexity, static_cast<double>(n - 1) / 3.0);
  Eigen::MatrixXd p = conditional_affinities(d2, perplexity);
  p = (p + p.transpose()).eval() / (2.0 * static_cast<double>(n));
  p = p.cwiseMax(1e-12);
  p.diagonal().setZero();

  std::mt19937_64 rng(config.seed);
  Eigen::MatrixXd y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i, 0) = 1e-4 * normal(rng);
    y(i, 1) = 1e-4 * normal(rng);
  }
  Eigen::MatrixXd velocity = Eigen::MatrixXd::Zero(n, 2);
  Eigen::MatrixXd gains = Eigen::MatrixXd::Ones(n, 2);
  Eigen::MatrixXd grad(n, 2);
  Eigen::MatrixXd num(n, n);

  for (int iter = 0; iter < config.iterations; ++iter) {
    if (iter == config.exaggeration_iterations) {
      // the second phase restarts the optimizer state
      velocity.setZero();
      gains.setOnes();
    }
    const double exaggeration = iter < config.exaggeration_iterations ? config.exaggeration : 1.0;
    const double momentum = iter < config.exaggeration_iterations ? 0.5 : 0.8;
    double z = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      num(i, i) = 0.0;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double du = y(i, 0) - y(j, 0);
        const double dv = y(i, 1) - y(j, 1);
        const double q = 1.0 / (1.0 + du * du + dv * dv);
        num(i, j) = q;
        num(j, i) = q;
        z += 2.0 * q;
      }
    }
    grad.setZero();
    for (Eigen::Index i = 0; i < n; ++i) {
      double gu = 0.0, gv = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        const double w = (exaggeration * p(i, j) - num(i, j) / z) * num(i, j);
        gu += w * (y(i, 0) - y(j, 0));
        gv += w * (y(i, 1) - y(j, 1));
      }
      grad(i, 0) = 4.0 * gu;
      grad(i, 1) = 4.0 * gv;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (int c = 0; c < 2; ++c) {
        const bool same_sign = (grad(i, c) > 0.0) == (velocity(i, c) > 0.0);
        gains(i, c) = same_sign ? std::max(gains(i, c) * 0.8, 0.01) : gains(i, c) + 0.2;
        velocity(i, c) = momentum * velocity(i, c) - config.learning_rate * gains(i, c) * grad(i, c);
        y(i, c) += velocity(i, c);
      }
    }
    const Eigen::RowVector2d mean = y.colwise().mean();
    y.rowwise() -= mean;
  }

  std::vector<Point2> out(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = {y(i, 0), y(i, 1)};
  return out;
}

std::size_t EmbeddingMap::nearest(double u, double v) const {
  if (points.empty()) throw Error(ErrorKind::kEmbedding, "empty embedding");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const double du = points[i].u - u;
    const double dv = points[i].v - v;
    const double d = du * du + dv * dv;
    if (d < best_d || (d == best_d && ids[i] < ids[best])) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

double EmbeddingMap::diameter() const {
  double best = 0.0;
  const auto& vs = hull.vertices;
  for (std::size_t a = 0; a < vs.size(); ++a) {
    for (std::size_t b = a + 1; b < vs.size(); ++b) {
      best = std::max(best, std::hypot(points[vs[a]].u - points[vs[b]].u, points[vs[a]].v - points[vs[b]].v));
    }
  }
  return best;
}

std::string EmbeddingMap::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "design_id,u,v\n";
  for (std::size_t i = 0; i < ids.size(); ++i) out << ids[i] << "," << points[i].u << "," << points[i].v << "\n";
  return out.str();
}

EmbeddingMap embed_2d(const std::vector<std::string>& ids, const Eigen::MatrixXd& x,
                      const TsneConfig& config) {
  if (static_cast<Eigen::Index>(ids.size()) != x.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "one id per embedded row is required");
  }
  if (ids.size() < 3) throw Error(ErrorKind::kEmbedding, "embedding needs at least 3 designs");
  EmbeddingMap map;
  map.ids = ids;
  map.points = tsne(x, config);
  map.hull = convex_hull(map.points);
  return map;
}

}  // namespace hullspace
