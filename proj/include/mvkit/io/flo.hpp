#pragma once

#include <cstdint>
#include <cstring>
#include <string>

#include "mvkit/errors.hpp"
#include "mvkit/grid.hpp"
#include "mvkit/io/pfm.hpp"

namespace mvkit {

// Middlebury .flo: float magic 202021.25, int32 width and height, then
// row-major interleaved (du, dv) float32 pairs. Everything little-endian.
inline FlowField read_flo(const std::string& path) {
  const std::string data = detail::read_file_binary(path);
  require(data.size() >= 12, ErrorCode::TruncatedPayload,
          "flo file shorter than its header");

  auto load32 = [&](std::size_t offset) {
    std::uint32_t raw;
    std::memcpy(&raw, data.data() + offset, 4);
    if (!detail::host_little_endian())
      raw = __builtin_bswap32(raw);
    return raw;
  };

  float magic;
  { const std::uint32_t raw = load32(0); std::memcpy(&magic, &raw, 4); }
  require(magic == 202021.25f, ErrorCode::BadMagic,
          "flo magic mismatch in " + path);

  const std::int32_t width = static_cast<std::int32_t>(load32(4));
  const std::int32_t height = static_cast<std::int32_t>(load32(8));
  require(width > 0 && height > 0 && width <= 100000 && height <= 100000,
          ErrorCode::DimensionOverflow, "flo dimensions out of range");

  const std::size_t count = static_cast<std::size_t>(width) * height * 2;
  require(data.size() == 12 + count * 4, ErrorCode::TruncatedPayload,
          "flo payload length disagrees with its header");

  std::string payload = data.substr(12);
  if (!detail::host_little_endian())
    detail::swap32_buffer(payload.data(), count);

  FlowField out(height, width, 2);
  std::memcpy(out.data(), payload.data(), count * 4);
  return out;
}

inline void write_flo(const std::string& path, const FlowField& flow) {
  require(flow.channels() == 2, ErrorCode::BadChannelCount,
          "flow fields carry exactly 2 channels");
  require(flow.height() > 0 && flow.width() > 0, ErrorCode::ShapeMismatch,
          "cannot write an empty flow");
  require(flow.width() <= 100000 && flow.height() <= 100000,
          ErrorCode::DimensionOverflow, "flo dimensions out of range");

  std::string out(12 + flow.size() * 4, '\0');
  const float magic = 202021.25f;
  const std::int32_t w = flow.width(), h = flow.height();
  std::memcpy(out.data(), &magic, 4);
  std::memcpy(out.data() + 4, &w, 4);
  std::memcpy(out.data() + 8, &h, 4);
  std::memcpy(out.data() + 12, flow.data(), flow.size() * 4);
  if (!detail::host_little_endian())
    detail::swap32_buffer(out.data(), flow.size() + 3);
  detail::write_file_binary(path, out);
}

}  // namespace mvkit
