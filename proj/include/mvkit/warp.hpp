#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "mvkit/camera.hpp"
#include "mvkit/grid.hpp"

namespace mvkit {

struct WarpResult {
  Image image;    // fill value 0 where uncovered
  Mask mask;      // true where a source pixel landed
  DepthMap depth; // destination-view depth of the winning splat
};

struct WarpOptions {
  // Default splats each source pixel to the nearest integer target pixel.
  // With splat2x2 the four cells around the continuous target coordinate
  // receive the splat, all under the same z-test.
  bool splat2x2 = false;
};

// Reprojects every valid source pixel into the destination view and splats
// it with a z-buffer: the smaller destination depth wins, ties keep the
// first splat in row-major source order. Pixels that land outside the
// destination frame or behind the camera are dropped.
inline WarpResult forward_warp(const Image& src_image, const DepthMap& src_depth,
                               const Camera& src_cam, const Camera& dst_cam,
                               const WarpOptions& options = {}) {
  require(src_image.height() == src_depth.height() &&
              src_image.width() == src_depth.width(),
          ErrorCode::ShapeMismatch, "image and depth dimensions differ");

  const int h = src_image.height();
  const int w = src_image.width();
  const int c = src_image.channels();

  WarpResult out;
  out.image = Image(h, w, c, 0.0f);
  out.mask = Mask(h, w, 1, 0);
  out.depth = DepthMap(h, w);

  Grid<double> zbuf(h, w, 1, std::numeric_limits<double>::infinity());

  const Eigen::Matrix4d rel = dst_cam.T * invert_rigid(src_cam.T);
  const Eigen::Matrix3d R = rel.topLeftCorner<3, 3>();
  const Eigen::Vector3d t = rel.topRightCorner<3, 1>();
  const double fx = src_cam.K(0, 0), fy = src_cam.K(1, 1);
  const double cx = src_cam.K(0, 2), cy = src_cam.K(1, 2);

  auto splat = [&](int ty, int tx, double z, int sy, int sx) {
    if (ty < 0 || ty >= h || tx < 0 || tx >= w) return;
    if (z >= zbuf.at(ty, tx)) return;
    zbuf.at(ty, tx) = z;
    for (int ch = 0; ch < c; ++ch)
      out.image.at(ty, tx, ch) = src_image.at(sy, sx, ch);
    out.mask.at(ty, tx) = 1;
    out.depth.set(ty, tx, static_cast<float>(z));
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!src_depth.is_valid(y, x)) continue;
      const double d = src_depth.at(y, x);
      if (!(d > 0) || !std::isfinite(d)) continue;

      const Eigen::Vector3d cam_src(d * (x - cx) / fx, d * (y - cy) / fy, d);
      const Eigen::Vector3d cam_dst = R * cam_src + t;
      if (cam_dst.z() <= 0) continue;

      const double u = dst_cam.K(0, 0) * cam_dst.x() / cam_dst.z() + dst_cam.K(0, 2);
      const double v = dst_cam.K(1, 1) * cam_dst.y() / cam_dst.z() + dst_cam.K(1, 2);
      if (!std::isfinite(u) || !std::isfinite(v)) continue;

      if (options.splat2x2) {
        const int x0 = static_cast<int>(std::floor(u));
        const int y0 = static_cast<int>(std::floor(v));
        for (int dy = 0; dy <= 1; ++dy)
          for (int dx = 0; dx <= 1; ++dx)
            splat(y0 + dy, x0 + dx, cam_dst.z(), y, x);
      } else {
        splat(static_cast<int>(std::lround(v)), static_cast<int>(std::lround(u)),
              cam_dst.z(), y, x);
      }
    }
  }
  return out;
}

}  // namespace mvkit
