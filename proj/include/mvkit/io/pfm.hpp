#pragma once

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "mvkit/errors.hpp"
#include "mvkit/grid.hpp"

namespace mvkit {

namespace detail {

inline bool host_little_endian() {
  return std::endian::native == std::endian::little;
}

inline void swap32_buffer(char* data, std::size_t count) {
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(data[4 * i + 0], data[4 * i + 3]);
    std::swap(data[4 * i + 1], data[4 * i + 2]);
  }
}

inline std::string read_file_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

inline void write_file_binary(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  require(out.good(), ErrorCode::IoError, "short write to " + path);
}

// Next whitespace-delimited token starting at pos; advances pos past it.
inline std::string next_token(const std::string& data, std::size_t& pos) {
  while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos])))
    ++pos;
  const std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])))
    ++pos;
  require(pos > start, ErrorCode::TruncatedPayload, "missing header token");
  return data.substr(start, pos - start);
}

}  // namespace detail

// PFM: "Pf" grayscale or "PF" RGB, dimensions, a scale whose sign encodes
// endianness (negative = little), one whitespace byte, then float32 rows
// stored bottom-up. Payload floats survive round trips bit-for-bit.
inline Grid<float> read_pfm(const std::string& path) {
  const std::string data = detail::read_file_binary(path);
  std::size_t pos = 0;
  const std::string magic = detail::next_token(data, pos);
  int channels = 0;
  if (magic == "PF")
    channels = 3;
  else if (magic == "Pf")
    channels = 1;
  else
    raise(ErrorCode::BadMagic, "not a PFM file: magic '" + magic + "'");

  int width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoi(detail::next_token(data, pos));
    height = std::stoi(detail::next_token(data, pos));
    scale = std::stod(detail::next_token(data, pos));
  } catch (const std::exception&) {
    raise(ErrorCode::BadMagic, "malformed PFM header in " + path);
  }
  require(width > 0 && height > 0, ErrorCode::DimensionOverflow,
          "PFM dimensions must be positive");
  require(width <= 100000 && height <= 100000, ErrorCode::DimensionOverflow,
          "PFM dimensions exceed 1e5");
  require(scale != 0.0, ErrorCode::BadMagic, "PFM scale must be non-zero");
  require(pos < data.size(), ErrorCode::TruncatedPayload,
          "PFM payload missing");
  ++pos;  // exactly one whitespace byte separates header and payload

  const std::size_t count =
      static_cast<std::size_t>(width) * height * static_cast<std::size_t>(channels);
  require(data.size() - pos >= count * 4, ErrorCode::TruncatedPayload,
          "PFM payload shorter than declared dimensions");

  std::string payload = data.substr(pos, count * 4);
  const bool file_little = scale < 0.0;
  if (file_little != detail::host_little_endian())
    detail::swap32_buffer(payload.data(), count);

  Grid<float> out(height, width, channels);
  const std::size_t row_bytes = static_cast<std::size_t>(width) * channels * 4;
  for (int y = 0; y < height; ++y) {
    const char* src = payload.data() +
                      static_cast<std::size_t>(height - 1 - y) * row_bytes;
    std::memcpy(&out.at(y, 0, 0), src, row_bytes);
  }
  return out;
}

inline void write_pfm(const std::string& path, const Grid<float>& raster) {
  require(raster.channels() == 1 || raster.channels() == 3,
          ErrorCode::BadChannelCount, "PFM supports 1 or 3 channels");
  require(raster.height() > 0 && raster.width() > 0, ErrorCode::ShapeMismatch,
          "cannot write an empty PFM");
  std::string out;
  out += raster.channels() == 3 ? "PF\n" : "Pf\n";
  out += std::to_string(raster.width()) + " " + std::to_string(raster.height()) + "\n";
  out += detail::host_little_endian() ? "-1.0\n" : "1.0\n";

  const std::size_t row_bytes =
      static_cast<std::size_t>(raster.width()) * raster.channels() * 4;
  std::string payload(static_cast<std::size_t>(raster.height()) * row_bytes, '\0');
  for (int y = 0; y < raster.height(); ++y) {
    char* dst = payload.data() +
                static_cast<std::size_t>(raster.height() - 1 - y) * row_bytes;
    std::memcpy(dst, &raster.at(y, 0, 0), row_bytes);
  }
  out += payload;
  detail::write_file_binary(path, out);
}

// Depth maps ride in single-channel PFMs; non-positive or non-finite values
// mark invalid pixels.
inline DepthMap read_depth_pfm(const std::string& path) {
  const Grid<float> raw = read_pfm(path);
  require(raw.channels() == 1, ErrorCode::BadChannelCount,
          "depth PFM must be single-channel");
  DepthMap out(raw.height(), raw.width());
  for (int y = 0; y < raw.height(); ++y)
    for (int x = 0; x < raw.width(); ++x) {
      const float v = raw.at(y, x);
      if (std::isfinite(v) && v > 0.0f) out.set(y, x, v);
    }
  return out;
}

inline void write_depth_pfm(const std::string& path, const DepthMap& depth) {
  Grid<float> raw(depth.height(), depth.width(), 1, 0.0f);
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x)
      raw.at(y, x) = depth.is_valid(y, x) ? depth.at(y, x) : 0.0f;
  write_pfm(path, raw);
}

}  // namespace mvkit
