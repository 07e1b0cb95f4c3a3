#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "mvkit/errors.hpp"
#include "mvkit/grid.hpp"
#include "mvkit/rng.hpp"
#include "mvkit/schedule.hpp"

namespace mvkit {

// A clip with S >= 1 clean reference frames; every other frame is a
// generation target. Masks flag pixels to be hidden from the condition and
// are all-false on references.
struct ViewSet {
  std::vector<Image> frames;
  std::vector<Mask> masks;
  std::vector<int> reference_indices;

  bool is_reference(int index) const {
    return std::find(reference_indices.begin(), reference_indices.end(),
                     index) != reference_indices.end();
  }

  void validate() const {
    require(!frames.empty(), ErrorCode::EmptyClip, "view set has no frames");
    require(masks.size() == frames.size(), ErrorCode::ShapeMismatch,
            "need one mask per frame");
    require(!reference_indices.empty(), ErrorCode::ConfigError,
            "need at least one reference frame");
    const auto& first = frames.front();
    require(first.channels() == 1 || first.channels() == 3,
            ErrorCode::BadChannelCount, "frames must have 1 or 3 channels");
    for (std::size_t i = 0; i < frames.size(); ++i) {
      require(frames[i].same_shape(first), ErrorCode::ShapeMismatch,
              "frame " + std::to_string(i) + " shape differs");
      require(masks[i].height() == first.height() &&
                  masks[i].width() == first.width(),
              ErrorCode::ShapeMismatch,
              "mask " + std::to_string(i) + " shape differs");
      for (float v : frames[i])
        require(std::isfinite(v) && v >= 0.0f && v <= 1.0f,
                ErrorCode::ShapeMismatch,
                "frame values must be finite and in [0,1]");
    }
    for (int r : reference_indices) {
      require(r >= 0 && r < static_cast<int>(frames.size()),
              ErrorCode::ConfigError, "reference index out of range");
      for (auto m : masks[static_cast<std::size_t>(r)])
        require(m == 0, ErrorCode::ConfigError,
                "reference frames must carry all-false masks");
    }
  }
};

// Forward diffusion x_t = sqrt(abar_t) x0 + sqrt(1-abar_t) eps with caller
// supplied standard-normal draws. t = 0 returns x0 bit-for-bit.
inline Image add_noise(const Image& x0, int t, const Image& noise,
                       const Schedule& schedule) {
  require(noise.same_shape(x0), ErrorCode::ShapeMismatch,
          "noise raster shape differs from input");
  if (t == 0) {
    (void)schedule.alpha_bar(0);
    return x0;
  }
  const double ab = schedule.alpha_bar(t);
  const double s_signal = std::sqrt(ab);
  const double s_noise = std::sqrt(1.0 - ab);
  Image out(x0.height(), x0.width(), x0.channels());
  const float* px = x0.data();
  const float* pn = noise.data();
  float* po = out.data();
  for (std::size_t i = 0; i < x0.size(); ++i)
    po[i] = static_cast<float>(s_signal * px[i] + s_noise * pn[i]);
  return out;
}

// Corrupted conditions C_t: mask out hidden pixels, then apply forward
// diffusion at the milder timestep t' = f(t). When t' = 0 unmasked pixels
// pass through bit-for-bit.
inline std::vector<Image> corrupt(const ViewSet& views, int t,
                                  const std::vector<Image>& noise,
                                  const Schedule& schedule) {
  views.validate();
  require(noise.size() == views.frames.size(), ErrorCode::ShapeMismatch,
          "need one noise raster per frame");
  const int t_prime = schedule.f_of_t(t);
  const double ab = schedule.alpha_bar(t_prime);
  const double s_signal = std::sqrt(ab);
  const double s_noise = std::sqrt(1.0 - ab);

  std::vector<Image> out;
  out.reserve(views.frames.size());
  for (std::size_t f = 0; f < views.frames.size(); ++f) {
    const Image& x0 = views.frames[f];
    const Mask& m = views.masks[f];
    require(noise[f].same_shape(x0), ErrorCode::ShapeMismatch,
            "noise raster " + std::to_string(f) + " shape differs");
    Image c(x0.height(), x0.width(), x0.channels());
    for (int y = 0; y < x0.height(); ++y) {
      for (int x = 0; x < x0.width(); ++x) {
        const bool hidden = m.at(y, x) != 0;
        for (int ch = 0; ch < x0.channels(); ++ch) {
          const float clean = hidden ? 0.0f : x0.at(y, x, ch);
          c.at(y, x, ch) =
              t_prime == 0
                  ? clean
                  : static_cast<float>(s_signal * clean +
                                       s_noise * noise[f].at(y, x, ch));
        }
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

// Per-frame condition raster plus the mask channel that rides along with it.
struct Condition {
  std::vector<Image> rasters;
  std::vector<Mask> masks;
};

// Blends corrupted conditions with the current noisy states using w(t), then
// overwrites reference slots with their clean frames. The w = 1 and w = 0
// endpoints reproduce C_t and x_t exactly.
inline Condition build_condition(const ViewSet& views,
                                 const std::vector<Image>& x_t, int t,
                                 const std::vector<Image>& noise,
                                 const Schedule& schedule) {
  require(x_t.size() == views.frames.size(), ErrorCode::ShapeMismatch,
          "need one noisy state per frame");
  std::vector<Image> corrupted = corrupt(views, t, noise, schedule);
  const double w = schedule.w_of_t(t);

  Condition cond;
  cond.masks = views.masks;
  cond.rasters.reserve(views.frames.size());
  for (std::size_t f = 0; f < views.frames.size(); ++f) {
    if (views.is_reference(static_cast<int>(f))) {
      cond.rasters.push_back(views.frames[f]);
      continue;
    }
    require(x_t[f].same_shape(views.frames[f]), ErrorCode::ShapeMismatch,
            "noisy state " + std::to_string(f) + " shape differs");
    if (w == 1.0) {
      cond.rasters.push_back(std::move(corrupted[f]));
    } else if (w == 0.0) {
      cond.rasters.push_back(x_t[f]);
    } else {
      Image blended(views.frames[f].height(), views.frames[f].width(),
                    views.frames[f].channels());
      const float* pc = corrupted[f].data();
      const float* pn = x_t[f].data();
      float* po = blended.data();
      for (std::size_t i = 0; i < blended.size(); ++i)
        po[i] = static_cast<float>(w * pc[i] + (1.0 - w) * pn[i]);
      cond.rasters.push_back(std::move(blended));
    }
  }
  return cond;
}

struct IrregularMaskParams {
  int min_strokes = 2, max_strokes = 5;
  int min_rects = 1, max_rects = 3;
  double min_fraction = 0.1, max_fraction = 0.6;
  int max_tries = 16;
  // Shape sizes, relative to min(height, width).
  double min_stroke_radius = 0.02, max_stroke_radius = 0.06;
  double min_segment = 0.05, max_segment = 0.20;
  int min_stroke_steps = 4, max_stroke_steps = 10;
  double min_rect_side = 0.10, max_rect_side = 0.35;
};

namespace detail {

inline void stamp_disc(Mask& mask, double cx, double cy, double radius) {
  const int x0 = std::max(0, static_cast<int>(std::floor(cx - radius)));
  const int x1 = std::min(mask.width() - 1, static_cast<int>(std::ceil(cx + radius)));
  const int y0 = std::max(0, static_cast<int>(std::floor(cy - radius)));
  const int y1 = std::min(mask.height() - 1, static_cast<int>(std::ceil(cy + radius)));
  const double r2 = radius * radius;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x - cx, dy = y - cy;
      if (dx * dx + dy * dy <= r2) mask.at(y, x) = 1;
    }
}

inline void draw_stroke(Mask& mask, Rng& rng, const IrregularMaskParams& p) {
  const double scale = std::min(mask.height(), mask.width());
  const double radius =
      rng.uniform(p.min_stroke_radius, p.max_stroke_radius) * scale;
  double x = rng.uniform(0.0, mask.width() - 1.0);
  double y = rng.uniform(0.0, mask.height() - 1.0);
  double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const int steps = rng.uniform_int(p.min_stroke_steps, p.max_stroke_steps);
  stamp_disc(mask, x, y, radius);
  for (int s = 0; s < steps; ++s) {
    angle += rng.uniform(-0.7, 0.7);
    const double len = rng.uniform(p.min_segment, p.max_segment) * scale;
    const double nx = x + len * std::cos(angle);
    const double ny = y + len * std::sin(angle);
    const int dots = std::max(1, static_cast<int>(std::ceil(len)));
    for (int i = 1; i <= dots; ++i) {
      const double f = static_cast<double>(i) / dots;
      stamp_disc(mask, x + f * (nx - x), y + f * (ny - y), radius);
    }
    x = nx;
    y = ny;
  }
}

inline void draw_rect(Mask& mask, Rng& rng, const IrregularMaskParams& p) {
  const int rw = std::max(
      1, static_cast<int>(std::lround(
             rng.uniform(p.min_rect_side, p.max_rect_side) * mask.width())));
  const int rh = std::max(
      1, static_cast<int>(std::lround(
             rng.uniform(p.min_rect_side, p.max_rect_side) * mask.height())));
  const int x0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(
      std::max(1, mask.width() - rw + 1))));
  const int y0 = static_cast<int>(rng.below(static_cast<std::uint64_t>(
      std::max(1, mask.height() - rh + 1))));
  for (int y = y0; y < std::min(mask.height(), y0 + rh); ++y)
    for (int x = x0; x < std::min(mask.width(), x0 + rw); ++x)
      mask.at(y, x) = 1;
}

}  // namespace detail

// Random strokes plus rectangles, resampled until the masked fraction lands
// inside [min_fraction, max_fraction]. Each retry uses a fresh substream so
// the result is a pure function of the seed.
inline Mask irregular_mask(int height, int width, std::uint64_t seed,
                           const IrregularMaskParams& params = {}) {
  require(height > 0 && width > 0, ErrorCode::ShapeMismatch,
          "mask dimensions must be positive");
  require(params.min_fraction <= params.max_fraction, ErrorCode::ConfigError,
          "mask fraction bounds are inverted");
  Rng root(seed);
  for (int attempt = 0; attempt < params.max_tries; ++attempt) {
    Rng rng = root.split(static_cast<std::uint64_t>(attempt));
    Mask mask(height, width, 1, 0);
    const int strokes = rng.uniform_int(params.min_strokes, params.max_strokes);
    const int rects = rng.uniform_int(params.min_rects, params.max_rects);
    for (int s = 0; s < strokes; ++s) detail::draw_stroke(mask, rng, params);
    for (int r = 0; r < rects; ++r) detail::draw_rect(mask, rng, params);
    const double frac = mask_fraction(mask);
    if (frac >= params.min_fraction && frac <= params.max_fraction) return mask;
  }
  raise(ErrorCode::MaskFractionUnreachable,
        "no mask landed in the requested fraction bounds after " +
            std::to_string(params.max_tries) + " tries");
}

// Convenience: one standard-normal raster shaped like the given image.
inline Image normal_raster(int height, int width, int channels, Rng& rng) {
  Image out(height, width, channels);
  for (auto& v : out) v = static_cast<float>(rng.normal());
  return out;
}

}  // namespace mvkit
