#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "mvkit/errors.hpp"
#include "mvkit/rng.hpp"

namespace mvkit {

struct Circle {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  double radius = 0.0;
};

// Circle through three points. The triangle they span must have area above
// 1e-12 or the bisector system is unsolvable.
inline Circle circumcircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                           const Eigen::Vector2d& c) {
  const Eigen::Vector2d ab = b - a;
  const Eigen::Vector2d ac = c - a;
  const double cross = ab.x() * ac.y() - ab.y() * ac.x();
  require(std::abs(cross) * 0.5 > 1e-12, ErrorCode::DegenerateSample,
          "circumcircle sample is (near-)collinear");
  // Perpendicular bisector equations: 2 (p - a) . x = |p|^2 - |a|^2.
  const double rhs1 = b.squaredNorm() - a.squaredNorm();
  const double rhs2 = c.squaredNorm() - a.squaredNorm();
  Circle out;
  const double inv = 1.0 / (2.0 * cross);
  out.center.x() = (rhs1 * ac.y() - rhs2 * ab.y()) * inv;
  out.center.y() = (rhs2 * ab.x() - rhs1 * ac.x()) * inv;
  out.radius = (a - out.center).norm();
  return out;
}

struct CircleFit {
  Circle circle;
  int inlier_count = 0;
  std::vector<std::uint8_t> inliers;  // one flag per input point
};

struct CircleRansacParams {
  int iterations = 100;
  double inlier_tol = 2.0;  // |distance-to-center - radius| threshold
};

// Fits a circle by sampled circumcircles: the candidate maximizing inlier
// count wins, ties prefer the smaller radius, then the earlier iteration.
inline CircleFit ransac_circle(const std::vector<Eigen::Vector2d>& points,
                               const CircleRansacParams& params,
                               std::uint64_t seed) {
  require(points.size() >= 3, ErrorCode::TooFewPoints,
          "circle fitting needs at least 3 points");
  require(params.iterations > 0 && params.inlier_tol >= 0,
          ErrorCode::ConfigError, "bad RANSAC parameters");

  const int n = static_cast<int>(points.size());
  Rng root(seed);
  CircleFit best;
  bool have_candidate = false;

  for (int iter = 0; iter < params.iterations; ++iter) {
    Rng rng = root.split(static_cast<std::uint64_t>(iter));
    int i = rng.uniform_int(0, n - 1);
    int j = rng.uniform_int(0, n - 2);
    if (j >= i) ++j;
    int k = rng.uniform_int(0, n - 3);
    if (k >= std::min(i, j)) ++k;
    if (k >= std::max(i, j)) ++k;

    Circle cand;
    try {
      cand = circumcircle(points[static_cast<std::size_t>(i)],
                          points[static_cast<std::size_t>(j)],
                          points[static_cast<std::size_t>(k)]);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateSample) continue;
      throw;
    }

    int count = 0;
    std::vector<std::uint8_t> flags(points.size(), 0);
    for (std::size_t p = 0; p < points.size(); ++p) {
      const double dist = (points[p] - cand.center).norm();
      if (std::abs(dist - cand.radius) <= params.inlier_tol) {
        flags[p] = 1;
        ++count;
      }
    }

    const bool better =
        !have_candidate || count > best.inlier_count ||
        (count == best.inlier_count && cand.radius < best.circle.radius);
    if (better) {
      best.circle = cand;
      best.inlier_count = count;
      best.inliers = std::move(flags);
      have_candidate = true;
    }
  }

  require(have_candidate, ErrorCode::DegenerateSample,
          "every sampled triple was collinear");
  return best;
}

}  // namespace mvkit
