#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hullspace {

struct Point2 {
  double u = 0.0;
  double v = 0.0;
  bool operator==(const Point2&) const = default;
};

struct ConvexHull {
  /// Indices into the input, counterclockwise, starting from the point with
  /// the smallest (u, v). Collinear boundary points are excluded.
  std::vector<std::size_t> vertices;
  /// True when the input spans no area (all points coincident or collinear);
  /// vertices then hold the one or two extreme points.
  bool degenerate = false;
};

/// Andrew's monotone chain.
ConvexHull convex_hull(const std::vector<Point2>& points);

/// Twice the signed area of triangle (o, a, b); positive for a left turn.
double cross(const Point2& o, const Point2& a, const Point2& b);

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 750;
  int exaggeration_iterations = 250;
  double exaggeration = 12.0;
  double learning_rate = 200.0;
  std::uint64_t seed = 1;
};

/// Exact t-SNE of the rows of `x` into the plane. Deterministic for a given
/// seed. The perplexity is capped at (n - 1) / 3 for small inputs.
std::vector<Point2> tsne(const Eigen::MatrixXd& x, const TsneConfig& config = {});

struct EmbeddingMap {
  std::vector<std::string> ids;
  std::vector<Point2> points;
  ConvexHull hull;

  /// Index of the Euclidean-nearest point; ties go to the lowest id.
  std::size_t nearest(double u, double v) const;
  /// Largest pairwise distance between hull vertices.
  double diameter() const;
  /// "design_id,u,v" lines under a header.
  std::string to_csv() const;
};

/// t-SNE plus convex hull. Needs at least three rows.
EmbeddingMap embed_2d(const std::vector<std::string>& ids, const Eigen::MatrixXd& x,
                      const TsneConfig& config = {});

}  // namespace hullspace
