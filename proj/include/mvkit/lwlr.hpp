#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "mvkit/depth_align.hpp"
#include "mvkit/errors.hpp"
#include "mvkit/grid.hpp"
#include "mvkit/parallel.hpp"

namespace mvkit {

struct LwlrParams {
  double bandwidth = 0.2;  // Gaussian kernel width in normalized coordinates
  double lambda = 1e-4;    // ridge term on the shift coefficient only
};

struct ScaleShift {
  double scale = 1.0;
  double shift = 0.0;
};

namespace detail {

// Guidance flattened for the dense pass: source depth looked up at each
// point's nearest pixel, plus its position and target depth.
struct GuidanceTable {
  std::vector<double> x;       // source depth at the guidance pixel
  std::vector<double> u, v;
  std::vector<double> d_star;
};

inline GuidanceTable build_guidance_table(const SparseGuidance& guidance,
                                          const DepthMap& depth) {
  GuidanceTable t;
  for (const GuidancePoint& g : guidance) {
    const int px = static_cast<int>(std::lround(g.u));
    const int py = static_cast<int>(std::lround(g.v));
    require(depth.value.in_bounds(py, px), ErrorCode::ShapeMismatch,
            "guidance point outside the depth map");
    require(depth.is_valid(py, px), ErrorCode::NoValidPixels,
            "guidance point sits on an invalid depth pixel");
    t.x.push_back(depth.at(py, px));
    t.u.push_back(g.u);
    t.v.push_back(g.v);
    t.d_star.push_back(g.d_star);
  }
  return t;
}

// Weighted normal equations with lambda on the shift-shift entry; rejects
// condition numbers beyond 1e12.
inline ScaleShift solve_local_affine(double u, double v,
                                     const GuidanceTable& t, double norm,
                                     const LwlrParams& params) {
  const double inv_two_b2 = 1.0 / (2.0 * params.bandwidth * params.bandwidth);
  constexpr double kGaussNorm = 0.3989422804014327;  // 1 / sqrt(2 pi)

  double m00 = 0.0, m01 = 0.0, m11 = 0.0, r0 = 0.0, r1 = 0.0;
  for (std::size_t k = 0; k < t.x.size(); ++k) {
    const double dx = (u - t.u[k]) / norm;
    const double dy = (v - t.v[k]) / norm;
    const double w = kGaussNorm * std::exp(-(dx * dx + dy * dy) * inv_two_b2);
    const double x = t.x[k];
    m00 += w * x * x;
    m01 += w * x;
    m11 += w;
    r0 += w * x * t.d_star[k];
    r1 += w * t.d_star[k];
  }
  m11 += params.lambda;

  const double det = m00 * m11 - m01 * m01;
  const double trace = m00 + m11;
  const double disc = std::sqrt(std::max(0.0, trace * trace - 4.0 * det));
  const double eig_min = (trace - disc) / 2.0;
  const double eig_max = (trace + disc) / 2.0;
  require(eig_min > 0 && eig_max / eig_min <= 1e12, ErrorCode::SingularSystem,
          "normal equations are singular or near-singular");

  return {(m11 * r0 - m01 * r1) / det, (m00 * r1 - m01 * r0) / det};
}

}  // namespace detail

// Local (scale, shift) at one query pixel: weighted least squares of rows
// [D(u_k,v_k), 1] against targets d*_k, Gaussian weights over distances
// normalized by max(H, W).
inline ScaleShift lwlr_pixel(double u, double v, const SparseGuidance& guidance,
                             const DepthMap& depth,
                             const LwlrParams& params = {}) {
  require(!guidance.empty(), ErrorCode::EmptyGuidance, "no guidance points");
  require(params.bandwidth > 0, ErrorCode::ConfigError,
          "bandwidth must be positive");
  require(params.lambda >= 0, ErrorCode::ConfigError,
          "lambda must be non-negative");
  const detail::GuidanceTable table = detail::build_guidance_table(guidance, depth);
  const double norm = static_cast<double>(std::max(depth.height(), depth.width()));
  return detail::solve_local_affine(u, v, table, norm, params);
}

struct ScaledDepth {
  DepthMap depth;  // scale*D + shift, guided pixels overwritten by d*
  Grid<float> scale_map;
  Grid<float> shift_map;
};

// Dense metric recovery: solves the local affine map at every location,
// applies it to valid depth pixels, then overwrites each guidance point's
// nearest pixel with its d* exactly. Rows are processed in parallel;
// output is identical for any thread count.
inline ScaledDepth lwlr_recover(const DepthMap& depth,
                                const SparseGuidance& guidance,
                                const LwlrParams& params = {},
                                int threads = 1) {
  require(!guidance.empty(), ErrorCode::EmptyGuidance, "no guidance points");
  require(params.bandwidth > 0, ErrorCode::ConfigError,
          "bandwidth must be positive");
  require(params.lambda >= 0, ErrorCode::ConfigError,
          "lambda must be non-negative");
  const int h = depth.height(), w = depth.width();
  require(h > 0 && w > 0, ErrorCode::ShapeMismatch, "depth map is empty");

  const detail::GuidanceTable table = detail::build_guidance_table(guidance, depth);
  const double norm = static_cast<double>(std::max(h, w));

  ScaledDepth out;
  out.depth = DepthMap(h, w);
  out.scale_map = Grid<float>(h, w, 1, 0.0f);
  out.shift_map = Grid<float>(h, w, 1, 0.0f);

  std::atomic<bool> singular{false};
  parallel_for(0, h, threads, [&](int y) {
    for (int x = 0; x < w; ++x) {
      ScaleShift s;
      try {
        s = detail::solve_local_affine(x, y, table, norm, params);
      } catch (const Error&) {
        singular.store(true, std::memory_order_relaxed);
        return;
      }
      out.scale_map.at(y, x) = static_cast<float>(s.scale);
      out.shift_map.at(y, x) = static_cast<float>(s.shift);
      if (depth.is_valid(y, x))
        out.depth.set(y, x,
                      static_cast<float>(s.scale * depth.at(y, x) + s.shift));
    }
  });
  require(!singular.load(), ErrorCode::SingularSystem,
          "normal equations are singular or near-singular");

  for (std::size_t k = 0; k < table.u.size(); ++k) {
    const int x = static_cast<int>(std::lround(table.u[k]));
    const int y = static_cast<int>(std::lround(table.v[k]));
    out.depth.set(y, x, static_cast<float>(table.d_star[k]));
  }
  return out;
}

}  // namespace mvkit
