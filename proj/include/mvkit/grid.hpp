#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mvkit/errors.hpp"

namespace mvkit {

// Dense row-major raster with interleaved channels. Row 0 is the top row.
template <typename T>
class Grid {
 public:
  Grid() = default;

  Grid(int height, int width, int channels = 1, T fill = T{})
      : height_(height), width_(width), channels_(channels) {
    require(height >= 0 && width >= 0 && channels >= 1, ErrorCode::ShapeMismatch,
            "grid dimensions must be non-negative with at least one channel");
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return data_.empty(); }
  std::size_t size() const noexcept { return data_.size(); }

  T& at(int y, int x, int c = 0) {
    assert(in_bounds(y, x) && c >= 0 && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  const T& at(int y, int x, int c = 0) const {
    assert(in_bounds(y, x) && c >= 0 && c < channels_);
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  bool in_bounds(int y, int x) const noexcept {
    return y >= 0 && y < height_ && x >= 0 && x < width_;
  }

  bool same_shape(const Grid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  std::vector<T>& raw() noexcept { return data_; }
  const std::vector<T>& raw() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ &&
           a.channels_ == b.channels_ && a.data_ == b.data_;
  }

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

// Pixel values live in [0,1]; 1 or 3 channels.
using Image = Grid<float>;

// Boolean raster stored as 0/1 bytes.
using Mask = Grid<std::uint8_t>;

// Two channels: (du, dv) displacement in pixels.
using FlowField = Grid<float>;

// Positive finite depth in scene units plus a per-pixel validity flag.
struct DepthMap {
  Grid<float> value;
  Mask valid;

  DepthMap() = default;
  DepthMap(int height, int width, float fill = 0.0f, bool valid_fill = false)
      : value(height, width, 1, fill),
        valid(height, width, 1, valid_fill ? std::uint8_t{1} : std::uint8_t{0}) {}

  int height() const noexcept { return value.height(); }
  int width() const noexcept { return value.width(); }

  bool is_valid(int y, int x) const { return valid.at(y, x) != 0; }
  float at(int y, int x) const { return value.at(y, x); }

  void set(int y, int x, float depth) {
    value.at(y, x) = depth;
    valid.at(y, x) = 1;
  }
  void invalidate(int y, int x) {
    value.at(y, x) = 0.0f;
    valid.at(y, x) = 0;
  }
};

inline double mask_fraction(const Mask& mask) {
  if (mask.empty()) return 0.0;
  std::size_t set = 0;
  for (auto v : mask)
    if (v) ++set;
  return static_cast<double>(set) / static_cast<double>(mask.size());
}

}  // namespace mvkit
