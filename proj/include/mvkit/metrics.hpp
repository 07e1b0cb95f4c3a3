#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvkit/errors.hpp"
#include "mvkit/grid.hpp"

namespace mvkit {

// Peak signal-to-noise ratio in dB over all channels, capped at 99 dB when
// the MSE drops below 1e-12.
inline double psnr(const Image& a, const Image& b, double peak = 1.0) {
  require(a.same_shape(b), ErrorCode::ShapeMismatch,
          "psnr needs identically shaped images");
  require(!a.empty(), ErrorCode::ShapeMismatch, "psnr on empty images");
  require(peak > 0, ErrorCode::ConfigError, "peak must be positive");
  double mse = 0.0;
  const float* pa = a.data();
  const float* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse < 1e-12) return 99.0;
  return 10.0 * std::log10(peak * peak / mse);
}

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double peak = 1.0;
};

// Single-scale SSIM with a Gaussian window, evaluated on fully interior
// windows only and averaged over positions and channels.
inline double ssim(const Image& a, const Image& b, const SsimParams& params = {}) {
  require(a.same_shape(b), ErrorCode::ShapeMismatch,
          "ssim needs identically shaped images");
  require(params.window >= 1 && params.window % 2 == 1, ErrorCode::ConfigError,
          "window must be odd");
  require(a.height() >= params.window && a.width() >= params.window,
          ErrorCode::ShapeMismatch, "image smaller than the SSIM window");

  const int n = params.window;
  const int r = n / 2;
  std::vector<double> kernel(static_cast<std::size_t>(n));
  double ksum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = i - r;
    kernel[static_cast<std::size_t>(i)] =
        std::exp(-d * d / (2.0 * params.sigma * params.sigma));
    ksum += kernel[static_cast<std::size_t>(i)];
  }
  for (double& k : kernel) k /= ksum;

  const double c1 = params.k1 * params.peak * params.k1 * params.peak;
  const double c2 = params.k2 * params.peak * params.k2 * params.peak;

  const int h = a.height(), w = a.width(), ch = a.channels();
  const int out_h = h - n + 1, out_w = w - n + 1;

  // Separable Gaussian filtering of the five raw-moment planes.
  std::vector<double> row_a(static_cast<std::size_t>(h) * out_w);
  std::vector<double> row_b(row_a.size()), row_aa(row_a.size());
  std::vector<double> row_bb(row_a.size()), row_ab(row_a.size());

  double total = 0.0;
  for (int c = 0; c < ch; ++c) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < out_w; ++x) {
        double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
        for (int k = 0; k < n; ++k) {
          const double va = a.at(y, x + k, c);
          const double vb = b.at(y, x + k, c);
          const double kw = kernel[static_cast<std::size_t>(k)];
          sa += kw * va;
          sb += kw * vb;
          saa += kw * va * va;
          sbb += kw * vb * vb;
          sab += kw * va * vb;
        }
        const std::size_t idx = static_cast<std::size_t>(y) * out_w + x;
        row_a[idx] = sa;
        row_b[idx] = sb;
        row_aa[idx] = saa;
        row_bb[idx] = sbb;
        row_ab[idx] = sab;
      }

    double channel_sum = 0.0;
    for (int y = 0; y < out_h; ++y)
      for (int x = 0; x < out_w; ++x) {
        double mu_a = 0, mu_b = 0, e_aa = 0, e_bb = 0, e_ab = 0;
        for (int k = 0; k < n; ++k) {
          const std::size_t idx = static_cast<std::size_t>(y + k) * out_w + x;
          const double kw = kernel[static_cast<std::size_t>(k)];
          mu_a += kw * row_a[idx];
          mu_b += kw * row_b[idx];
          e_aa += kw * row_aa[idx];
          e_bb += kw * row_bb[idx];
          e_ab += kw * row_ab[idx];
        }
        const double var_a = e_aa - mu_a * mu_a;
        const double var_b = e_bb - mu_b * mu_b;
        const double cov = e_ab - mu_a * mu_b;
        const double num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2);
        const double den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2);
        channel_sum += num / den;
      }
    total += channel_sum / (static_cast<double>(out_h) * out_w);
  }
  return total / ch;
}

}  // namespace mvkit
