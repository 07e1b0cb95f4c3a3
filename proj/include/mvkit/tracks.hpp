#pragma once

#include <cstdint>
#include <vector>

namespace mvkit {

// One tracked keypoint across a clip. Points are ordered by frame index and
// carry a per-frame visibility flag; invisible points hold no usable
// coordinates.
struct TrackPoint {
  int frame = 0;
  double x = 0.0;
  double y = 0.0;
  bool visible = false;
};

struct Track {
  std::int64_t id = 0;
  std::vector<TrackPoint> points;
};

using TrackSet = std::vector<Track>;

}  // namespace mvkit
