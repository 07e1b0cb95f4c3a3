#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "mvkit/errors.hpp"
#include "mvkit/grid.hpp"
#include "mvkit/io/pfm.hpp"

namespace mvkit {

namespace detail {

// PNM header token: like next_token but skips '#' comments.
inline std::string pnm_token(const std::string& data, std::size_t& pos) {
  while (pos < data.size()) {
    if (std::isspace(static_cast<unsigned char>(data[pos]))) {
      ++pos;
    } else if (data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  const std::size_t start = pos;
  while (pos < data.size() && !std::isspace(static_cast<unsigned char>(data[pos])))
    ++pos;
  require(pos > start, ErrorCode::TruncatedPayload, "missing PNM header token");
  return data.substr(start, pos - start);
}

struct PnmHeader {
  int width = 0, height = 0;
  std::size_t payload_offset = 0;
};

inline PnmHeader parse_pnm_header(const std::string& data,
                                  const std::string& expected_magic,
                                  const std::string& path) {
  std::size_t pos = 0;
  const std::string magic = pnm_token(data, pos);
  require(magic == expected_magic, ErrorCode::BadMagic,
          path + ": expected " + expected_magic + ", got '" + magic + "'");
  PnmHeader h;
  try {
    h.width = std::stoi(pnm_token(data, pos));
    h.height = std::stoi(pnm_token(data, pos));
    const int maxval = std::stoi(pnm_token(data, pos));
    require(maxval == 255, ErrorCode::UnsupportedFormat,
            path + ": only maxval 255 is supported");
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    raise(ErrorCode::BadMagic, "malformed PNM header in " + path);
  }
  require(h.width > 0 && h.height > 0 && h.width <= 100000 && h.height <= 100000,
          ErrorCode::DimensionOverflow, "PNM dimensions out of range");
  require(pos < data.size(), ErrorCode::TruncatedPayload,
          "PNM payload missing");
  h.payload_offset = pos + 1;  // single whitespace after maxval
  return h;
}

inline float u8_to_unit(std::uint8_t v) {
  return static_cast<float>(v) / 255.0f;
}

inline std::uint8_t unit_to_u8(float v) {
  const float clamped = v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

}  // namespace detail

// PPM P6, 8-bit RGB, mapped to [0,1] floats. The u8 payload survives a
// write-read-write cycle value for value.
inline Image read_ppm(const std::string& path) {
  const std::string data = detail::read_file_binary(path);
  const detail::PnmHeader h = detail::parse_pnm_header(data, "P6", path);
  const std::size_t count = static_cast<std::size_t>(h.width) * h.height * 3;
  require(data.size() - h.payload_offset >= count, ErrorCode::TruncatedPayload,
          "PPM payload shorter than declared dimensions");
  Image out(h.height, h.width, 3);
  const unsigned char* src =
      reinterpret_cast<const unsigned char*>(data.data() + h.payload_offset);
  float* dst = out.data();
  for (std::size_t i = 0; i < count; ++i)
    dst[i] = detail::u8_to_unit(src[i]);
  return out;
}

inline void write_ppm(const std::string& path, const Image& image) {
  require(image.channels() == 3, ErrorCode::BadChannelCount,
          "PPM requires 3 channels");
  require(image.height() > 0 && image.width() > 0, ErrorCode::ShapeMismatch,
          "cannot write an empty PPM");
  std::string out = "P6\n" + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + image.size());
  const float* src = image.data();
  for (std::size_t i = 0; i < image.size(); ++i)
    out[header + i] = static_cast<char>(detail::unit_to_u8(src[i]));
  detail::write_file_binary(path, out);
}

// PGM P5 used for binary masks: 0 stays false, anything else reads true;
// writes emit 0/255.
inline Mask read_pgm_mask(const std::string& path) {
  const std::string data = detail::read_file_binary(path);
  const detail::PnmHeader h = detail::parse_pnm_header(data, "P5", path);
  const std::size_t count = static_cast<std::size_t>(h.width) * h.height;
  require(data.size() - h.payload_offset >= count, ErrorCode::TruncatedPayload,
          "PGM payload shorter than declared dimensions");
  Mask out(h.height, h.width, 1);
  const unsigned char* src =
      reinterpret_cast<const unsigned char*>(data.data() + h.payload_offset);
  std::uint8_t* dst = out.data();
  for (std::size_t i = 0; i < count; ++i)
    dst[i] = src[i] ? 1 : 0;
  return out;
}

inline void write_pgm_mask(const std::string& path, const Mask& mask) {
  require(mask.channels() == 1, ErrorCode::BadChannelCount,
          "masks are single-channel");
  require(mask.height() > 0 && mask.width() > 0, ErrorCode::ShapeMismatch,
          "cannot write an empty PGM");
  std::string out = "P5\n" + std::to_string(mask.width()) + " " +
                    std::to_string(mask.height()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + mask.size());
  const std::uint8_t* src = mask.data();
  for (std::size_t i = 0; i < mask.size(); ++i)
    out[header + i] = static_cast<char>(src[i] ? 255 : 0);
  detail::write_file_binary(path, out);
}

// Grayscale images also travel as PGM when 8 bits suffice.
inline Image read_pgm(const std::string& path) {
  const std::string data = detail::read_file_binary(path);
  const detail::PnmHeader h = detail::parse_pnm_header(data, "P5", path);
  const std::size_t count = static_cast<std::size_t>(h.width) * h.height;
  require(data.size() - h.payload_offset >= count, ErrorCode::TruncatedPayload,
          "PGM payload shorter than declared dimensions");
  Image out(h.height, h.width, 1);
  const unsigned char* src =
      reinterpret_cast<const unsigned char*>(data.data() + h.payload_offset);
  float* dst = out.data();
  for (std::size_t i = 0; i < count; ++i)
    dst[i] = detail::u8_to_unit(src[i]);
  return out;
}

inline void write_pgm(const std::string& path, const Image& image) {
  require(image.channels() == 1, ErrorCode::BadChannelCount,
          "PGM requires 1 channel");
  require(image.height() > 0 && image.width() > 0, ErrorCode::ShapeMismatch,
          "cannot write an empty PGM");
  std::string out = "P5\n" + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n255\n";
  const std::size_t header = out.size();
  out.resize(header + image.size());
  const float* src = image.data();
  for (std::size_t i = 0; i < image.size(); ++i)
    out[header + i] = static_cast<char>(detail::unit_to_u8(src[i]));
  detail::write_file_binary(path, out);
}

}  // namespace mvkit
