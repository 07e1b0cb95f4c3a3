// Circle fitting, Sampson distance, and robust fundamental-matrix
// estimation. Synthetic two-view geometry serves as the oracle: pixels are
// generated by projecting known 3D points through known cameras, so the
// epipolar constraint holds exactly by construction.

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mvkit/camera.hpp"
#include "mvkit/circle_fit.hpp"
#include "mvkit/fundamental.hpp"
#include "mvkit/rng.hpp"

using namespace mvkit;

namespace {

// Exact correspondences from two pinhole views of random 3D points.
// Returns pixel pairs plus the ground-truth F = K2^-T [t]x R K1^-1 used to
// cross-check Sampson distances independently of the estimator.
struct TwoViewScene {
  std::vector<Correspondence> corrs;
  Eigen::Matrix3d F_true;
};

TwoViewScene make_scene(int n_points, std::uint64_t seed) {
  const Eigen::Matrix3d K =
      (Eigen::Matrix3d() << 120, 0, 64, 0, 120, 48, 0, 0, 1).finished();
  const Eigen::Matrix3d R =
      Eigen::AngleAxisd(0.15, Eigen::Vector3d(0.2, 1.0, 0.1).normalized())
          .toRotationMatrix();
  const Eigen::Vector3d t(0.4, -0.1, 0.08);

  Eigen::Matrix3d tx;
  tx << 0, -t.z(), t.y(), t.z(), 0, -t.x(), -t.y(), t.x(), 0;

  TwoViewScene scene;
  scene.F_true = K.inverse().transpose() * tx * R * K.inverse();
  scene.F_true /= scene.F_true.norm();

  Rng rng(seed);
  while (static_cast<int>(scene.corrs.size()) < n_points) {
    const Eigen::Vector3d X(rng.uniform() * 2.0 - 1.0,
                            rng.uniform() * 2.0 - 1.0,
                            3.0 + rng.uniform() * 2.0);
    const Eigen::Vector3d X2 = R * X + t;
    if (X2.z() <= 0.1) continue;
    const Eigen::Vector3d p1 = K * X;
    const Eigen::Vector3d p2 = K * X2;
    scene.corrs.push_back(
        {{p1.x() / p1.z(), p1.y() / p1.z()}, {p2.x() / p2.z(), p2.y() / p2.z()}});
  }
  return scene;
}

}  // namespace

// --------------------------------------------------------------- circles

TEST(Circumcircle, HandComputedBisectors) {
  // Bisector of (0,0)-(2,0): x=1. Bisector of (0,0)-(1,1): x+y=1.
  // Intersection (1,0); radius |(0,0)-(1,0)| = 1.
  const Circle c = circumcircle({0, 0}, {2, 0}, {1, 1});
  EXPECT_NEAR(c.center.x(), 1.0, 1e-12);
  EXPECT_NEAR(c.center.y(), 0.0, 1e-12);
  EXPECT_NEAR(c.radius, 1.0, 1e-12);
}

TEST(Circumcircle, SymmetricUnitCircle) {
  const Circle c = circumcircle({1, 0}, {0, 1}, {-1, 0});
  EXPECT_NEAR(c.center.norm(), 0.0, 1e-12);
  EXPECT_NEAR(c.radius, 1.0, 1e-12);
}

TEST(Circumcircle, CollinearRejected) {
  EXPECT_THROW(circumcircle({0, 0}, {1, 0}, {0.5, 1e-15}), Error);
  try {
    circumcircle({0, 0}, {1, 0}, {2, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateSample);
  }
}

TEST(Circumcircle, AllThreePointsLieOnTheCircle) {
  Rng rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Vector2d a(rng.uniform() * 10, rng.uniform() * 10);
    const Eigen::Vector2d b(rng.uniform() * 10, rng.uniform() * 10);
    const Eigen::Vector2d c(rng.uniform() * 10, rng.uniform() * 10);
    Circle circ;
    try {
      circ = circumcircle(a, b, c);
    } catch (const Error&) {
      continue;
    }
    EXPECT_NEAR((a - circ.center).norm(), circ.radius, 1e-9);
    EXPECT_NEAR((b - circ.center).norm(), circ.radius, 1e-9);
    EXPECT_NEAR((c - circ.center).norm(), circ.radius, 1e-9);
  }
}

TEST(Circumcircle, TranslationAndScaleEquivariance) {
  const Eigen::Vector2d a(0.3, 1.1), b(2.2, 0.4), c(1.0, 2.6);
  const Eigen::Vector2d v(17.5, -3.25);
  const Circle base = circumcircle(a, b, c);
  const Circle moved = circumcircle(a + v, b + v, c + v);
  EXPECT_NEAR((moved.center - (base.center + v)).norm(), 0.0, 1e-9);
  EXPECT_NEAR(moved.radius, base.radius, 1e-12);

  const double s = 3.5;
  const Circle scaled = circumcircle(s * a, s * b, s * c);
  EXPECT_NEAR(scaled.radius, s * base.radius, 1e-9);
}

TEST(RansacCircle, ExactPointsRecovered) {
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 100; ++i) {
    const double ang = 2.0 * std::numbers::pi * i / 100.0;
    pts.emplace_back(5.0 + 12.0 * std::cos(ang), 5.0 + 12.0 * std::sin(ang));
  }
  const CircleFit fit = ransac_circle(pts, {100, 0.5}, 7);
  EXPECT_GE(fit.circle.radius, 11.99);
  EXPECT_LE(fit.circle.radius, 12.01);
  EXPECT_EQ(fit.inlier_count, 100);
}

TEST(RansacCircle, ThreePointsReturnTheirCircumcircle) {
  const std::vector<Eigen::Vector2d> pts{{0, 0}, {2, 0}, {1, 1}};
  const CircleFit fit = ransac_circle(pts, {50, 0.25}, 3);
  EXPECT_NEAR(fit.circle.center.x(), 1.0, 1e-12);
  EXPECT_NEAR(fit.circle.radius, 1.0, 1e-12);
  EXPECT_EQ(fit.inlier_count, 3);
}

TEST(RansacCircle, OutlierContamination) {
  // Oracle by construction: the 70 on-circle points are inliers of the true
  // circle at tol 1.0, so any fit with >= 65 inliers has found it.
  Rng rng(41);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 70; ++i) {
    const double ang = 2.0 * std::numbers::pi * i / 70.0;
    pts.emplace_back(50.0 + 12.0 * std::cos(ang), 50.0 + 12.0 * std::sin(ang));
  }
  for (int i = 0; i < 30; ++i)
    pts.emplace_back(rng.uniform() * 100.0, rng.uniform() * 100.0);

  const CircleFit fit = ransac_circle(pts, {500, 1.0}, 11);
  EXPECT_GE(fit.inlier_count, 65);
  EXPECT_NEAR(fit.circle.radius, 12.0, 1.0);
}

TEST(RansacCircle, DeterministicForFixedSeed) {
  Rng rng(2);
  std::vector<Eigen::Vector2d> pts;
  for (int i = 0; i < 40; ++i)
    pts.emplace_back(rng.uniform() * 30, rng.uniform() * 30);
  const CircleFit f1 = ransac_circle(pts, {200, 1.5}, 77);
  const CircleFit f2 = ransac_circle(pts, {200, 1.5}, 77);
  EXPECT_EQ(f1.circle.center, f2.circle.center);
  EXPECT_EQ(f1.circle.radius, f2.circle.radius);
  EXPECT_EQ(f1.inliers, f2.inliers);
}

TEST(RansacCircle, TooFewPoints) {
  try {
    ransac_circle({{0, 0}, {1, 1}}, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewPoints);
  }
}

// --------------------------------------------------------------- Sampson

TEST(Sampson, HandEvaluatedPureTranslation) {
  // F = [t]x for t=(1,0,0); x=(0,0), x2=(0,1):
  // numerator = -1, denominator = 1 + 0 + 1 + 0 = 2, distance = 0.5.
  Eigen::Matrix3d F;
  F << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_DOUBLE_EQ(sampson_distance(F, {0, 0}, {0, 1}), 0.5);
}

TEST(Sampson, ExactEpipolarPairsScoreZero) {
  const TwoViewScene scene = make_scene(100, 9);
  for (const Correspondence& c : scene.corrs)
    EXPECT_NEAR(sampson_distance(scene.F_true, c.a, c.b), 0.0, 1e-12);
}

TEST(Sampson, FirstOrderQuadraticScaling) {
  const TwoViewScene scene = make_scene(1, 10);
  const Correspondence& c = scene.corrs.front();
  const Eigen::Vector2d dir(0.6, 0.8);
  const double eps = 1e-4;
  const double d1 =
      sampson_distance(scene.F_true, c.a, c.b + eps * dir);
  const double d2 =
      sampson_distance(scene.F_true, c.a, c.b + 2.0 * eps * dir);
  EXPECT_NEAR(d2 / d1, 4.0, 0.2);  // doubling the noise quadruples the error
}

TEST(Sampson, UnderflowRaisesZeroGradient) {
  Eigen::Matrix3d F = Eigen::Matrix3d::Zero();
  F(2, 2) = 1.0;  // both gradients vanish identically
  try {
    sampson_distance(F, {0, 0}, {0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroGradient);
  }
}

// ---------------------------------------------------------- fundamental

TEST(Fundamental, ExactSceneAllInliers) {
  const TwoViewScene scene = make_scene(200, 13);
  const FundamentalFit fit =
      ransac_fundamental(scene.corrs, {1000, 0.25}, 21);
  EXPECT_EQ(fit.inlier_count, 200);
  for (const Correspondence& c : scene.corrs)
    EXPECT_LT(sampson_distance(fit.F, c.a, c.b), 1e-6);
}

TEST(Fundamental, ReturnedMatrixIsNormalizedRankTwo) {
  const TwoViewScene scene = make_scene(120, 14);
  const FundamentalFit fit = ransac_fundamental(scene.corrs, {}, 5);
  EXPECT_NEAR(fit.F.norm(), 1.0, 1e-12);
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(fit.F);
  EXPECT_LT(svd.singularValues()(2) / svd.singularValues()(0), 1e-8);
}

TEST(Fundamental, DisplacedPointsExcluded) {
  // Displace across the point's own epipolar line: an offset along the line
  // keeps the constraint satisfied and is invisible to any estimator.
  TwoViewScene scene = make_scene(200, 15);
  Rng rng(16);
  std::vector<int> displaced;
  for (int i = 0; i < 40; ++i) {
    const int idx = static_cast<int>(rng.below(scene.corrs.size()));
    Correspondence& c = scene.corrs[static_cast<std::size_t>(idx)];
    const Eigen::Vector3d l =
        scene.F_true * Eigen::Vector3d(c.a.x(), c.a.y(), 1.0);
    c.b += 10.0 * Eigen::Vector2d(l(0), l(1)).normalized();
    displaced.push_back(idx);
  }
  std::sort(displaced.begin(), displaced.end());
  displaced.erase(std::unique(displaced.begin(), displaced.end()),
                  displaced.end());

  const FundamentalFit fit = ransac_fundamental(scene.corrs, {1000, 0.5}, 33);
  int excluded = 0;
  for (int idx : displaced)
    if (!fit.inliers[static_cast<std::size_t>(idx)]) ++excluded;
  EXPECT_EQ(excluded, static_cast<int>(displaced.size()));
  EXPECT_EQ(fit.inlier_count,
            static_cast<int>(scene.corrs.size() - displaced.size()));
}

TEST(Fundamental, TooFewCorrespondences) {
  const TwoViewScene scene = make_scene(7, 17);
  try {
    ransac_fundamental(scene.corrs, {}, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewCorrespondences);
  }
}

TEST(Fundamental, CoincidentPointsAreDegenerate) {
  // Every correspondence identical: all minimal samples rank-deficient.
  std::vector<Correspondence> corrs(20, {{10, 10}, {10, 10}});
  try {
    ransac_fundamental(corrs, {50, 0.5}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

TEST(Fundamental, DeterministicForFixedSeed) {
  const TwoViewScene scene = make_scene(64, 18);
  const FundamentalFit f1 = ransac_fundamental(scene.corrs, {}, 4);
  const FundamentalFit f2 = ransac_fundamental(scene.corrs, {}, 4);
  EXPECT_EQ(f1.F, f2.F);
  EXPECT_EQ(f1.inliers, f2.inliers);
}
