#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mvkit/depth_align.hpp"
#include "mvkit/errors.hpp"
#include "mvkit/tracks.hpp"

namespace mvkit {

namespace detail {

inline std::vector<std::string> split_csv_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

inline double parse_csv_double(const std::string& field, int line_no,
                               const char* column) {
  // std::from_chars<double> is incomplete in some standard libraries;
  // strtod with a full-consumption check is equivalent here.
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  require(end == begin + field.size() && !field.empty() && std::isfinite(v),
          ErrorCode::RowParseError,
          "line " + std::to_string(line_no) + ": bad " + column + " value '" +
              field + "'");
  return v;
}

inline std::int64_t parse_csv_int(const std::string& field, int line_no,
                                  const char* column) {
  std::int64_t v = 0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), v);
  require(ec == std::errc() && ptr == field.data() + field.size(),
          ErrorCode::RowParseError,
          "line " + std::to_string(line_no) + ": bad " + column + " value '" +
              field + "'");
  return v;
}

}  // namespace detail

// Tracks CSV: header `track_id,frame,x,y,visible`, one row per observed
// point. Rows group into tracks by id (ordered by first appearance) with
// points sorted by frame; a duplicated (track_id, frame) pair is ambiguous
// and rejected.
inline TrackSet read_tracks_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::HeaderMismatch,
          path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "track_id,frame,x,y,visible", ErrorCode::HeaderMismatch,
          path + ": unexpected header '" + line + "'");

  TrackSet tracks;
  std::set<std::pair<std::int64_t, int>> seen;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = detail::split_csv_line(line);
    require(fields.size() == 5, ErrorCode::RowParseError,
            "line " + std::to_string(line_no) + ": expected 5 columns, got " +
                std::to_string(fields.size()));
    TrackPoint p;
    const std::int64_t id = detail::parse_csv_int(fields[0], line_no, "track_id");
    p.frame = static_cast<int>(detail::parse_csv_int(fields[1], line_no, "frame"));
    p.x = detail::parse_csv_double(fields[2], line_no, "x");
    p.y = detail::parse_csv_double(fields[3], line_no, "y");
    const std::int64_t vis = detail::parse_csv_int(fields[4], line_no, "visible");
    require(vis == 0 || vis == 1, ErrorCode::RowParseError,
            "line " + std::to_string(line_no) + ": visible must be 0 or 1");
    p.visible = vis == 1;

    require(seen.emplace(id, p.frame).second, ErrorCode::RowParseError,
            "line " + std::to_string(line_no) + ": duplicate (track_id, frame) = (" +
                std::to_string(id) + ", " + std::to_string(p.frame) +
                ") is ambiguous");

    Track* track = nullptr;
    for (Track& t : tracks)
      if (t.id == id) {
        track = &t;
        break;
      }
    if (track == nullptr) {
      tracks.push_back({id, {}});
      track = &tracks.back();
    }
    track->points.push_back(p);
  }
  for (Track& t : tracks)
    std::sort(t.points.begin(), t.points.end(),
              [](const TrackPoint& a, const TrackPoint& b) {
                return a.frame < b.frame;
              });
  return tracks;
}

inline void write_tracks_csv(const std::string& path, const TrackSet& tracks) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  out << "track_id,frame,x,y,visible\n";
  out.precision(17);
  for (const Track& t : tracks)
    for (const TrackPoint& p : t.points)
      out << t.id << "," << p.frame << "," << p.x << "," << p.y << ","
          << (p.visible ? 1 : 0) << "\n";
  require(out.good(), ErrorCode::IoError, "short write to " + path);
}

// Matches CSV: header `src_x,src_y,anchor_view,dst_x,dst_y,src_depth`.
// Rows beyond max_matches are dropped, matching the keypoint budget the
// alignment stage works with.
inline MatchSet read_matches_csv(const std::string& path,
                                 std::size_t max_matches = 1024) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);

  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::HeaderMismatch,
          path + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == "src_x,src_y,anchor_view,dst_x,dst_y,src_depth",
          ErrorCode::HeaderMismatch, path + ": unexpected header '" + line + "'");

  MatchSet matches;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    if (matches.size() >= max_matches) break;
    const auto fields = detail::split_csv_line(line);
    require(fields.size() == 6, ErrorCode::RowParseError,
            "line " + std::to_string(line_no) + ": expected 6 columns, got " +
                std::to_string(fields.size()));
    Match m;
    m.src_px.x() = detail::parse_csv_double(fields[0], line_no, "src_x");
    m.src_px.y() = detail::parse_csv_double(fields[1], line_no, "src_y");
    m.anchor_view = static_cast<int>(
        detail::parse_csv_int(fields[2], line_no, "anchor_view"));
    require(m.anchor_view >= 0, ErrorCode::RowParseError,
            "line " + std::to_string(line_no) + ": negative anchor_view");
    m.anchor_px.x() = detail::parse_csv_double(fields[3], line_no, "dst_x");
    m.anchor_px.y() = detail::parse_csv_double(fields[4], line_no, "dst_y");
    m.src_depth = detail::parse_csv_double(fields[5], line_no, "src_depth");
    require(m.src_depth > 0, ErrorCode::RowParseError,
            "line " + std::to_string(line_no) + ": src_depth must be positive");
    matches.push_back(m);
  }
  return matches;
}

inline void write_matches_csv(const std::string& path, const MatchSet& matches) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  out << "src_x,src_y,anchor_view,dst_x,dst_y,src_depth\n";
  out.precision(17);
  for (const Match& m : matches)
    out << m.src_px.x() << "," << m.src_px.y() << "," << m.anchor_view << ","
        << m.anchor_px.x() << "," << m.anchor_px.y() << "," << m.src_depth
        << "\n";
  require(out.good(), ErrorCode::IoError, "short write to " + path);
}

}  // namespace mvkit
