#pragma once

#include <algorithm>
#include <cmath>

#include "mvkit/errors.hpp"
#include "mvkit/grid.hpp"

namespace mvkit {

struct Hsv {
  double h;  // hue as a turn fraction in [0,1)
  double s;
  double v;
};

inline Hsv rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out{0.0, 0.0, mx};
  if (mx > 0.0) out.s = delta / mx;
  if (delta > 0.0) {
    double h;
    if (mx == r)
      h = (g - b) / delta;
    else if (mx == g)
      h = (b - r) / delta + 2.0;
    else
      h = (r - g) / delta + 4.0;
    h /= 6.0;
    if (h < 0.0) h += 1.0;
    if (h >= 1.0) h -= 1.0;
    out.h = h;
  }
  return out;
}

inline void hsv_to_rgb(const Hsv& in, double& r, double& g, double& b) {
  const double h = (in.h - std::floor(in.h)) * 6.0;
  const int sector = static_cast<int>(h) % 6;
  const double f = h - std::floor(h);
  const double p = in.v * (1.0 - in.s);
  const double q = in.v * (1.0 - in.s * f);
  const double t = in.v * (1.0 - in.s * (1.0 - f));
  switch (sector) {
    case 0: r = in.v; g = t; b = p; break;
    case 1: r = q; g = in.v; b = p; break;
    case 2: r = p; g = in.v; b = t; break;
    case 3: r = p; g = q; b = in.v; break;
    case 4: r = t; g = p; b = in.v; break;
    default: r = in.v; g = p; b = q; break;
  }
}

// Per-window brightness transfer in HSV space: scales each window's V
// channel so its mean matches the reference window, leaving H and S alone.
// Scales are clamped to [0.25, 4]; windows whose corrupted mean V falls
// below 1e-6 pass through unchanged. Edge windows are truncated.
inline Image brightness_align(const Image& corrupted, const Image& reference,
                              int window_height = 16, int window_width = 16) {
  require(corrupted.channels() == 3 && reference.channels() == 3,
          ErrorCode::BadChannelCount, "brightness alignment needs RGB images");
  require(corrupted.same_shape(reference), ErrorCode::ShapeMismatch,
          "corrupted and reference dimensions differ");
  require(window_height > 0 && window_width > 0, ErrorCode::ConfigError,
          "window dimensions must be positive");

  const int h = corrupted.height();
  const int w = corrupted.width();
  Image out = corrupted;

  for (int wy = 0; wy < h; wy += window_height) {
    for (int wx = 0; wx < w; wx += window_width) {
      const int y1 = std::min(h, wy + window_height);
      const int x1 = std::min(w, wx + window_width);

      double sum_cor = 0.0, sum_ref = 0.0;
      for (int y = wy; y < y1; ++y)
        for (int x = wx; x < x1; ++x) {
          sum_cor += std::max({corrupted.at(y, x, 0), corrupted.at(y, x, 1),
                               corrupted.at(y, x, 2)});
          sum_ref += std::max({reference.at(y, x, 0), reference.at(y, x, 1),
                               reference.at(y, x, 2)});
        }
      const double count = static_cast<double>(y1 - wy) * (x1 - wx);
      const double mean_cor = sum_cor / count;
      if (mean_cor < 1e-6) continue;
      const double scale = std::clamp(sum_ref / count / mean_cor, 0.25, 4.0);

      for (int y = wy; y < y1; ++y)
        for (int x = wx; x < x1; ++x) {
          Hsv hsv = rgb_to_hsv(out.at(y, x, 0), out.at(y, x, 1), out.at(y, x, 2));
          hsv.v = std::clamp(hsv.v * scale, 0.0, 1.0);
          double r, g, b;
          hsv_to_rgb(hsv, r, g, b);
          out.at(y, x, 0) = static_cast<float>(r);
          out.at(y, x, 1) = static_cast<float>(g);
          out.at(y, x, 2) = static_cast<float>(b);
        }
    }
  }
  return out;
}

}  // namespace mvkit
