#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "mvkit/errors.hpp"
#include "mvkit/rng.hpp"

namespace mvkit {

struct Correspondence {
  Eigen::Vector2d a;  // first view, pixels
  Eigen::Vector2d b;  // second view, pixels
};

// First-order geometric reprojection error of b^T F a = 0:
//   (b~^T F a~)^2 / ((F a~)_1^2 + (F a~)_2^2 + (F^T b~)_1^2 + (F^T b~)_2^2)
// in squared pixels. The gradient terms must not all underflow.
inline double sampson_distance(const Eigen::Matrix3d& F,
                               const Eigen::Vector2d& a,
                               const Eigen::Vector2d& b) {
  const Eigen::Vector3d ah(a.x(), a.y(), 1.0);
  const Eigen::Vector3d bh(b.x(), b.y(), 1.0);
  const Eigen::Vector3d Fa = F * ah;
  const Eigen::Vector3d Ftb = F.transpose() * bh;
  const double t1 = Fa(0) * Fa(0), t2 = Fa(1) * Fa(1);
  const double t3 = Ftb(0) * Ftb(0), t4 = Ftb(1) * Ftb(1);
  require(t1 >= 1e-300 || t2 >= 1e-300 || t3 >= 1e-300 || t4 >= 1e-300,
          ErrorCode::ZeroGradient, "all Sampson gradient terms underflow");
  const double num = bh.dot(Fa);
  return num * num / (t1 + t2 + t3 + t4);
}

namespace detail {

struct Normalization {
  Eigen::Matrix3d T;  // similarity: centroid to origin, RMS distance sqrt(2)
  bool ok = false;
};

inline Normalization hartley_normalization(
    const std::vector<Correspondence>& corrs, const std::vector<int>& idx,
    bool second_view) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (int i : idx) {
    const auto& c = corrs[static_cast<std::size_t>(i)];
    centroid += second_view ? c.b : c.a;
  }
  centroid /= static_cast<double>(idx.size());
  double rms = 0.0;
  for (int i : idx) {
    const auto& c = corrs[static_cast<std::size_t>(i)];
    rms += ((second_view ? c.b : c.a) - centroid).squaredNorm();
  }
  rms = std::sqrt(rms / static_cast<double>(idx.size()));
  Normalization out;
  if (rms < 1e-12) return out;  // all points coincide
  const double s = std::sqrt(2.0) / rms;
  out.T << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  out.ok = true;
  return out;
}

// Normalized 8-point estimate over the given subset (8 for a minimal sample,
// more for a least-squares refit). Returns nothing when the subset is
// degenerate. The result has rank 2, unit Frobenius norm, and a sign fixed
// by its largest-magnitude entry.
inline std::optional<Eigen::Matrix3d> eight_point(
    const std::vector<Correspondence>& corrs, const std::vector<int>& idx) {
  if (idx.size() < 8) return std::nullopt;
  const Normalization na = hartley_normalization(corrs, idx, false);
  const Normalization nb = hartley_normalization(corrs, idx, true);
  if (!na.ok || !nb.ok) return std::nullopt;

  Eigen::MatrixXd A(static_cast<Eigen::Index>(idx.size()), 9);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto& c = corrs[static_cast<std::size_t>(idx[r])];
    const Eigen::Vector3d p = na.T * Eigen::Vector3d(c.a.x(), c.a.y(), 1.0);
    const Eigen::Vector3d q = nb.T * Eigen::Vector3d(c.b.x(), c.b.y(), 1.0);
    A.row(static_cast<Eigen::Index>(r)) << q.x() * p.x(), q.x() * p.y(), q.x(),
        q.y() * p.x(), q.y() * p.y(), q.y(), p.x(), p.y(), 1.0;
  }

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
  // A minimal sample needs rank 8; anything lower pins no unique F.
  if (idx.size() == 8) {
    const auto& sv = svd.singularValues();
    if (sv(7) <= sv(0) * 1e-9) return std::nullopt;
  }
  const Eigen::VectorXd f = svd.matrixV().col(8);
  Eigen::Matrix3d Fn;
  Fn << f(0), f(1), f(2), f(3), f(4), f(5), f(6), f(7), f(8);

  Eigen::JacobiSVD<Eigen::Matrix3d> fsvd(
      Fn, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Vector3d sigma = fsvd.singularValues();
  sigma(2) = 0.0;
  Fn = fsvd.matrixU() * sigma.asDiagonal() * fsvd.matrixV().transpose();

  Eigen::Matrix3d F = nb.T.transpose() * Fn * na.T;
  const double norm = F.norm();
  if (!(norm > 0) || !std::isfinite(norm)) return std::nullopt;
  F /= norm;

  // Deterministic sign: largest-magnitude entry positive.
  Eigen::Index mr = 0, mc = 0;
  F.cwiseAbs().maxCoeff(&mr, &mc);
  if (F(mr, mc) < 0) F = -F;
  return F;
}

}  // namespace detail

struct FundamentalRansacParams {
  int iterations = 1000;
  double inlier_tol = 0.5;  // Sampson distance, squared pixels
};

struct FundamentalFit {
  Eigen::Matrix3d F = Eigen::Matrix3d::Zero();
  int inlier_count = 0;
  std::vector<std::uint8_t> inliers;
};

// Robust fundamental-matrix estimation: minimal 8-point samples scored by
// Sampson inliers, best candidate kept (ties prefer the earlier iteration),
// then a least-squares refit on that candidate's inliers. Inlier flags are
// recomputed under the refitted matrix.
inline FundamentalFit ransac_fundamental(
    const std::vector<Correspondence>& corrs,
    const FundamentalRansacParams& params, std::uint64_t seed) {
  require(corrs.size() >= 8, ErrorCode::TooFewCorrespondences,
          "fundamental-matrix estimation needs at least 8 correspondences");
  require(params.iterations > 0 && params.inlier_tol >= 0,
          ErrorCode::ConfigError, "bad RANSAC parameters");

  const int n = static_cast<int>(corrs.size());
  Rng root(seed);

  auto count_inliers = [&](const Eigen::Matrix3d& F,
                           std::vector<std::uint8_t>& flags) {
    int count = 0;
    flags.assign(corrs.size(), 0);
    for (std::size_t i = 0; i < corrs.size(); ++i) {
      double d;
      try {
        d = sampson_distance(F, corrs[i].a, corrs[i].b);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroGradient) continue;
        throw;
      }
      if (d <= params.inlier_tol) {
        flags[i] = 1;
        ++count;
      }
    }
    return count;
  };

  FundamentalFit best;
  bool have_candidate = false;
  std::vector<int> sample(8);
  std::vector<int> pool(static_cast<std::size_t>(n));

  for (int iter = 0; iter < params.iterations; ++iter) {
    Rng rng = root.split(static_cast<std::uint64_t>(iter));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < 8; ++i) {
      const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
      sample[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(i)];
    }

    const auto cand = detail::eight_point(corrs, sample);
    if (!cand) continue;

    std::vector<std::uint8_t> flags;
    const int count = count_inliers(*cand, flags);
    if (!have_candidate || count > best.inlier_count) {
      best.F = *cand;
      best.inlier_count = count;
      best.inliers = std::move(flags);
      have_candidate = true;
    }
  }

  require(have_candidate, ErrorCode::DegenerateConfiguration,
          "every minimal sample was degenerate");

  std::vector<int> final_idx;
  for (std::size_t i = 0; i < best.inliers.size(); ++i)
    if (best.inliers[i]) final_idx.push_back(static_cast<int>(i));
  if (final_idx.size() >= 8) {
    if (const auto refit = detail::eight_point(corrs, final_idx)) {
      best.F = *refit;
      best.inlier_count = count_inliers(best.F, best.inliers);
    }
  }
  return best;
}

}  // namespace mvkit
