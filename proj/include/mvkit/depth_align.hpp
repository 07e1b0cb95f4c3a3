#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mvkit/camera.hpp"
#include "mvkit/errors.hpp"
#include "mvkit/grid.hpp"
#include "mvkit/rng.hpp"

namespace mvkit {

// One keypoint correspondence: a source pixel with its estimated depth and
// the matching pixel in an anchor view. Several matches may share a source
// pixel (one per anchor).
struct Match {
  Eigen::Vector2d src_px;
  int anchor_view = 0;
  Eigen::Vector2d anchor_px;
  double src_depth = 0.0;
};

using MatchSet = std::vector<Match>;

struct AlignParams {
  int max_iterations = 200;
  double initial_step = 0.1;        // in log-depth
  double outlier_residual_px = 2.0; // guidance filter
};

struct KeypointAlignment {
  double d_star = 0.0;
  double alpha = 1.0;  // d_star / input depth
  double beta = 0.0;   // kept for the (scale, shift) interface; always 0
  double residual_px = 0.0;
  bool no_descent = false;
};

// The 1-D reprojection objective for one keypoint: corrected depth d*
// parameterized as exp(theta), residuals measured between the reprojected
// source pixel and its matched anchor pixels, normalized by (W, H).
class AlignmentProblem {
 public:
  AlignmentProblem(const Eigen::Vector2d& src_px, const Camera& src_cam,
                   const std::vector<const Camera*>& anchor_cams,
                   const std::vector<Eigen::Vector2d>& anchor_px, int width,
                   int height)
      : targets_(anchor_px), width_(width), height_(height) {
    require(!anchor_cams.empty() && anchor_cams.size() == anchor_px.size(),
            ErrorCode::ShapeMismatch, "need one camera per anchor pixel");
    const Eigen::Vector3d ray(
        (src_px.x() - src_cam.K(0, 2)) / src_cam.K(0, 0),
        (src_px.y() - src_cam.K(1, 2)) / src_cam.K(1, 1), 1.0);
    const Eigen::Matrix4d src_inv = invert_rigid(src_cam.T);
    for (const Camera* cam : anchor_cams) {
      const Eigen::Matrix4d rel = cam->T * src_inv;
      PerAnchor a;
      a.dir = rel.topLeftCorner<3, 3>() * ray;  // camera point = d* dir + off
      a.off = rel.topRightCorner<3, 1>();
      a.fx = cam->K(0, 0);
      a.fy = cam->K(1, 1);
      a.cx = cam->K(0, 2);
      a.cy = cam->K(1, 2);
      anchors_.push_back(a);
    }
  }

  // Loss at log-depth theta; +inf when the point falls behind any anchor.
  double loss(double theta) const {
    const double d = std::exp(theta);
    double total = 0.0;
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
      const PerAnchor& a = anchors_[i];
      const Eigen::Vector3d p = d * a.dir + a.off;
      if (p.z() <= 0) return std::numeric_limits<double>::infinity();
      const double du = (a.fx * p.x() / p.z() + a.cx - targets_[i].x()) / width_;
      const double dv = (a.fy * p.y() / p.z() + a.cy - targets_[i].y()) / height_;
      total += du * du + dv * dv;
    }
    return total;
  }

  // Analytic d loss / d theta. Matches a central finite difference of
  // loss(); infinite when the loss is undefined at theta.
  double gradient(double theta) const {
    const double d = std::exp(theta);
    double g = 0.0;
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
      const PerAnchor& a = anchors_[i];
      const Eigen::Vector3d p = d * a.dir + a.off;
      if (p.z() <= 0) return std::numeric_limits<double>::infinity();
      const double inv_z = 1.0 / p.z();
      const double u = a.fx * p.x() * inv_z + a.cx;
      const double v = a.fy * p.y() * inv_z + a.cy;
      const double du_dd =
          a.fx * (a.dir.x() * p.z() - p.x() * a.dir.z()) * inv_z * inv_z;
      const double dv_dd =
          a.fy * (a.dir.y() * p.z() - p.y() * a.dir.z()) * inv_z * inv_z;
      g += 2.0 * (u - targets_[i].x()) / (width_ * static_cast<double>(width_)) * du_dd;
      g += 2.0 * (v - targets_[i].y()) / (height_ * static_cast<double>(height_)) * dv_dd;
    }
    return g * d;  // chain rule through d = exp(theta)
  }

  // RMS reprojection distance in unnormalized pixels at depth d.
  double residual_px(double d) const {
    double total = 0.0;
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
      const PerAnchor& a = anchors_[i];
      const Eigen::Vector3d p = d * a.dir + a.off;
      if (p.z() <= 0) return std::numeric_limits<double>::infinity();
      const double du = a.fx * p.x() / p.z() + a.cx - targets_[i].x();
      const double dv = a.fy * p.y() / p.z() + a.cy - targets_[i].y();
      total += du * du + dv * dv;
    }
    return std::sqrt(total / static_cast<double>(anchors_.size()));
  }

  // Pixel displacement per unit relative depth change at depth d. Zero for
  // degenerate geometry (for example a zero baseline), where the loss is
  // flat and no descent direction exists.
  double sensitivity(double d) const {
    double s = 0.0;
    for (const PerAnchor& a : anchors_) {
      const Eigen::Vector3d p = d * a.dir + a.off;
      if (p.z() <= 0) continue;
      const double inv_z = 1.0 / p.z();
      const double du_dd =
          a.fx * (a.dir.x() * p.z() - p.x() * a.dir.z()) * inv_z * inv_z;
      const double dv_dd =
          a.fy * (a.dir.y() * p.z() - p.y() * a.dir.z()) * inv_z * inv_z;
      s += (du_dd * d) * (du_dd * d) + (dv_dd * d) * (dv_dd * d);
    }
    return s;
  }

 private:
  struct PerAnchor {
    Eigen::Vector3d dir, off;
    double fx, fy, cx, cy;
  };
  std::vector<PerAnchor> anchors_;
  std::vector<Eigen::Vector2d> targets_;
  int width_, height_;
};

// Minimizes the keypoint's reprojection loss over d* = exp(theta) with
// backtracking gradient descent from theta = log(depth). Reports no_descent
// when the loss is flat at the input (degenerate geometry) or when no step
// improves it and the input is not already at a (near-)zero residual; in
// both cases d_star stays at the input depth.
inline KeypointAlignment align_keypoint(double depth,
                                        const Eigen::Vector2d& src_px,
                                        const std::vector<Eigen::Vector2d>& anchor_px,
                                        const Camera& src_cam,
                                        const std::vector<const Camera*>& anchor_cams,
                                        int width, int height,
                                        const AlignParams& params = {}) {
  require(depth > 0 && std::isfinite(depth), ErrorCode::NonPositiveDepth,
          "keypoint depth must be positive and finite");
  require(width > 0 && height > 0, ErrorCode::ShapeMismatch,
          "frame dimensions must be positive");

  const AlignmentProblem problem(src_px, src_cam, anchor_cams, anchor_px,
                                 width, height);

  KeypointAlignment out;
  out.d_star = depth;
  out.residual_px = problem.residual_px(depth);

  if (problem.sensitivity(depth) < 1e-18) {
    out.no_descent = true;
    return out;
  }

  double theta = std::log(depth);
  double current = problem.loss(theta);
  if (!std::isfinite(current)) {
    out.no_descent = true;
    return out;
  }
  const double initial = current;
  double step = params.initial_step;
  constexpr double kArmijo = 1e-4;

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const double g = problem.gradient(theta);
    if (!std::isfinite(g) || std::abs(g) < 1e-18) break;
    bool moved = false;
    while (step > 1e-14) {
      const double trial = theta - step * g;
      const double lt = problem.loss(trial);
      if (lt <= current - kArmijo * step * g * g) {
        theta = trial;
        current = lt;
        step = std::min(step * 2.0, 1.0);
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
    if (current < 1e-32) break;
  }

  const double d_final = std::exp(theta);
  const double final_residual = problem.residual_px(d_final);
  if (current < initial) {
    out.d_star = d_final;
    out.residual_px = final_residual;
  } else if (out.residual_px > 1e-6) {
    out.no_descent = true;  // nothing improved and the start is not converged
  }
  out.alpha = out.d_star / depth;
  out.beta = 0.0;
  return out;
}

struct GuidancePoint {
  double u = 0.0, v = 0.0;  // source pixel
  double d_star = 0.0;
  double alpha = 1.0;
  double beta = 0.0;
  double residual_px = 0.0;
};

using SparseGuidance = std::vector<GuidancePoint>;

// Aligns every keypoint in the match set independently and keeps the ones
// that converged with a residual at or below the outlier threshold.
// Matches sharing a source pixel form one keypoint with several anchors and
// must agree on the source depth sample.
inline SparseGuidance align_sparse(const DepthMap& depth,
                                   const MatchSet& matches,
                                   const Camera& src_cam,
                                   const std::vector<Camera>& cameras,
                                   const AlignParams& params = {}) {
  require(!matches.empty(), ErrorCode::EmptyGuidance, "match set is empty");

  struct Group {
    Eigen::Vector2d src_px;
    double src_depth;
    std::vector<Eigen::Vector2d> anchor_px;
    std::vector<const Camera*> anchor_cams;
  };
  std::vector<Group> groups;
  for (const Match& m : matches) {
    require(m.anchor_view >= 0 &&
                m.anchor_view < static_cast<int>(cameras.size()),
            ErrorCode::ConfigError, "anchor view index out of range");
    require(m.src_depth > 0 && std::isfinite(m.src_depth),
            ErrorCode::NonPositiveDepth, "match carries non-positive depth");
    Group* g = nullptr;
    for (Group& existing : groups)
      if (existing.src_px.x() == m.src_px.x() &&
          existing.src_px.y() == m.src_px.y()) {
        g = &existing;
        break;
      }
    if (g == nullptr) {
      groups.push_back({m.src_px, m.src_depth, {}, {}});
      g = &groups.back();
    } else {
      require(g->src_depth == m.src_depth, ErrorCode::InconsistentMatches,
              "matches for one keypoint disagree on source depth");
    }
    g->anchor_px.push_back(m.anchor_px);
    g->anchor_cams.push_back(&cameras[static_cast<std::size_t>(m.anchor_view)]);
  }

  SparseGuidance guidance;
  for (const Group& g : groups) {
    const KeypointAlignment a =
        align_keypoint(g.src_depth, g.src_px, g.anchor_px, src_cam,
                       g.anchor_cams, depth.width(), depth.height(), params);
    if (a.no_descent || a.residual_px > params.outlier_residual_px) continue;
    guidance.push_back(
        {g.src_px.x(), g.src_px.y(), a.d_star, a.alpha, a.beta, a.residual_px});
  }
  require(!guidance.empty(), ErrorCode::EmptyGuidance,
          "no keypoint survived alignment");
  return guidance;
}

// Oracle correspondences: samples n distinct pixels with valid depth and
// reprojects each into every anchor view, keeping in-bounds landings.
// Replaces detector+matcher ingestion for synthetic scenes.
inline MatchSet synth_matches(const DepthMap& gt_depth, const Camera& src_cam,
                              const std::vector<Camera>& cameras,
                              const std::vector<int>& anchor_views, int n,
                              std::uint64_t seed) {
  require(n > 0, ErrorCode::ConfigError, "need a positive sample count");
  std::vector<std::pair<int, int>> valid;
  for (int y = 0; y < gt_depth.height(); ++y)
    for (int x = 0; x < gt_depth.width(); ++x)
      if (gt_depth.is_valid(y, x) && gt_depth.at(y, x) > 0)
        valid.emplace_back(y, x);
  require(static_cast<int>(valid.size()) >= n, ErrorCode::NoValidPixels,
          "fewer valid depth pixels than requested samples");

  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const std::size_t j =
        static_cast<std::size_t>(i) +
        static_cast<std::size_t>(rng.below(valid.size() - static_cast<std::size_t>(i)));
    std::swap(valid[static_cast<std::size_t>(i)], valid[j]);
  }

  MatchSet matches;
  for (int i = 0; i < n; ++i) {
    const auto [y, x] = valid[static_cast<std::size_t>(i)];
    const Eigen::Vector2d px(x, y);
    const double d = gt_depth.at(y, x);
    for (int view : anchor_views) {
      require(view >= 0 && view < static_cast<int>(cameras.size()),
              ErrorCode::ConfigError, "anchor view index out of range");
      Reprojection r;
      try {
        r = reproject_pixel(px, d, src_cam, cameras[static_cast<std::size_t>(view)]);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::BehindCamera) continue;
        throw;
      }
      if (r.pixel.x() < 0 || r.pixel.x() > gt_depth.width() - 1 ||
          r.pixel.y() < 0 || r.pixel.y() > gt_depth.height() - 1)
        continue;
      matches.push_back({px, view, r.pixel, d});
    }
  }
  require(!matches.empty(), ErrorCode::NoValidPixels,
          "no sampled pixel lands inside any anchor view");
  return matches;
}

}  // namespace mvkit
