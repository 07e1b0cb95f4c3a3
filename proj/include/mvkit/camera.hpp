#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "mvkit/errors.hpp"

namespace mvkit {

// Pinhole camera. K is the 3x3 intrinsic matrix (zero skew, principal point
// inside the image); T maps world coordinates to camera coordinates.
struct Camera {
  Eigen::Matrix3d K = Eigen::Matrix3d::Identity();
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();

  static Camera from_intrinsics(double fx, double fy, double cx, double cy) {
    Camera cam;
    cam.K << fx, 0, cx, 0, fy, cy, 0, 0, 1;
    return cam;
  }

  Eigen::Matrix3d rotation() const { return T.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return T.topRightCorner<3, 1>(); }

  void validate() const {
    require(K(0, 0) > 0 && K(1, 1) > 0, ErrorCode::SchemaError,
            "focal lengths must be positive");
    require(K(0, 1) == 0.0 && K(1, 0) == 0.0, ErrorCode::SchemaError,
            "intrinsics must have zero skew");
    require(K(2, 0) == 0.0 && K(2, 1) == 0.0 && K(2, 2) == 1.0,
            ErrorCode::SchemaError, "last intrinsic row must be (0,0,1)");
    const Eigen::Matrix3d R = rotation();
    const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity())
                             .cwiseAbs()
                             .maxCoeff();
    require(ortho < 1e-9, ErrorCode::InvalidRotation,
            "rotation block is not orthonormal");
    require(R.determinant() > 0, ErrorCode::InvalidRotation,
            "rotation block must be proper (det > 0)");
    const Eigen::RowVector4d bottom = T.row(3);
    require(bottom(0) == 0.0 && bottom(1) == 0.0 && bottom(2) == 0.0 &&
                bottom(3) == 1.0,
            ErrorCode::SchemaError, "last transform row must be (0,0,0,1)");
  }
};

// Inverse of a rigid transform without a general matrix inversion.
inline Eigen::Matrix4d invert_rigid(const Eigen::Matrix4d& T) {
  Eigen::Matrix4d inv = Eigen::Matrix4d::Identity();
  const Eigen::Matrix3d Rt = T.topLeftCorner<3, 3>().transpose();
  inv.topLeftCorner<3, 3>() = Rt;
  inv.topRightCorner<3, 1>() = -Rt * T.topRightCorner<3, 1>();
  return inv;
}

// Pixel (u,v) at depth d > 0 lifted to camera coordinates.
inline Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth,
                                 const Eigen::Matrix3d& K) {
  require(depth > 0 && std::isfinite(depth), ErrorCode::NonPositiveDepth,
          "unproject requires positive finite depth");
  const double x = (pixel.x() - K(0, 2)) / K(0, 0);
  const double y = (pixel.y() - K(1, 2)) / K(1, 1);
  return {depth * x, depth * y, depth};
}

// Camera-frame point to pixel coordinates; the point must sit in front of
// the camera.
inline Eigen::Vector2d project(const Eigen::Vector3d& point,
                               const Eigen::Matrix3d& K) {
  require(point.z() > 0, ErrorCode::NonPositiveDepth,
          "project requires z > 0");
  return {K(0, 0) * point.x() / point.z() + K(0, 2),
          K(1, 1) * point.y() / point.z() + K(1, 2)};
}

struct Reprojection {
  Eigen::Vector2d pixel;
  double depth = 0.0;
};

// Transfers a source pixel with known depth into the destination view.
inline Reprojection reproject_pixel(const Eigen::Vector2d& pixel, double depth,
                                    const Camera& src, const Camera& dst) {
  const Eigen::Vector3d cam_src = unproject(pixel, depth, src.K);
  const Eigen::Matrix4d rel = dst.T * invert_rigid(src.T);
  const Eigen::Vector3d cam_dst =
      rel.topLeftCorner<3, 3>() * cam_src + rel.topRightCorner<3, 1>();
  require(cam_dst.z() > 0, ErrorCode::BehindCamera,
          "point maps behind the destination camera");
  return {project(cam_dst, dst.K), cam_dst.z()};
}

}  // namespace mvkit
