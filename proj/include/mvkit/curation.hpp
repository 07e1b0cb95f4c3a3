#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mvkit/circle_fit.hpp"
#include "mvkit/errors.hpp"
#include "mvkit/fundamental.hpp"
#include "mvkit/grid.hpp"
#include "mvkit/tracks.hpp"

namespace mvkit {

// Everything a clip can bring to curation. Auxiliary inputs are optional and
// must match the frames they describe: one semantic mask per frame, one flow
// per consecutive frame pair, track coordinates in frame pixels.
struct ClipBundle {
  std::vector<Image> frames;
  std::vector<Mask> semantic_masks;
  std::vector<FlowField> flows;
  TrackSet tracks;
};

namespace detail {

inline int round_to_even(double x) {
  return 2 * static_cast<int>(std::lround(x / 2.0));
}

inline Image resize_bilinear(const Image& src, int out_h, int out_w) {
  Image out(out_h, out_w, src.channels());
  const double sy = static_cast<double>(src.height()) / out_h;
  const double sx = static_cast<double>(src.width()) / out_w;
  for (int y = 0; y < out_h; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0,
                                 static_cast<double>(src.height() - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < out_w; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0,
                                   static_cast<double>(src.width() - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < src.channels(); ++c) {
        const double top = (1.0 - wx) * src.at(y0, x0, c) + wx * src.at(y0, x1, c);
        const double bot = (1.0 - wx) * src.at(y1, x0, c) + wx * src.at(y1, x1, c);
        out.at(y, x, c) = static_cast<float>((1.0 - wy) * top + wy * bot);
      }
    }
  }
  return out;
}

}  // namespace detail

// Step 1: keep every temporal_rate-th frame, then resize so the short side
// equals target_short_side, preserving aspect ratio with the long side
// rounded to the nearest even length. Frames already at the target short
// side pass through untouched.
inline std::vector<Image> downsample_clip(const std::vector<Image>& frames,
                                          int temporal_rate,
                                          int target_short_side) {
  require(!frames.empty(), ErrorCode::EmptyClip, "clip has no frames");
  require(temporal_rate >= 1, ErrorCode::ConfigError,
          "temporal rate must be >= 1");
  require(target_short_side >= 1, ErrorCode::ConfigError,
          "target short side must be >= 1");
  std::vector<Image> out;
  for (std::size_t i = 0; i < frames.size();
       i += static_cast<std::size_t>(temporal_rate)) {
    const Image& f = frames[i];
    const int short_side = std::min(f.height(), f.width());
    if (short_side == target_short_side) {
      out.push_back(f);
      continue;
    }
    const double scale = static_cast<double>(target_short_side) / short_side;
    int out_h, out_w;
    if (f.height() <= f.width()) {
      out_h = target_short_side;
      out_w = detail::round_to_even(f.width() * scale);
    } else {
      out_w = target_short_side;
      out_h = detail::round_to_even(f.height() * scale);
    }
    require(out_h >= 1 && out_w >= 1, ErrorCode::ShapeMismatch,
            "downsampled frame would be empty");
    out.push_back(detail::resize_bilinear(f, out_h, out_w));
  }
  return out;
}

struct SemanticFilterResult {
  double fraction = 0.0;  // frames with any masked pixel / total frames
  bool rejected = false;
};

// Step 2: reject when strictly more than reject_fraction of the frames carry
// a non-empty semantic mask.
inline SemanticFilterResult semantic_dynamic_filter(
    const std::vector<Mask>& masks, double reject_fraction = 0.5) {
  require(!masks.empty(), ErrorCode::MissingMasks,
          "semantic filtering needs one mask per frame");
  int nonempty = 0;
  for (const Mask& m : masks) {
    for (auto v : m)
      if (v) {
        ++nonempty;
        break;
      }
  }
  SemanticFilterResult out;
  out.fraction = static_cast<double>(nonempty) / static_cast<double>(masks.size());
  out.rejected = out.fraction > reject_fraction;
  return out;
}

// Frame score from the masked-area fractions. The published table covers
// four cells; the two uncovered cells score 1.5 and an exactly empty mask
// scores 0.
inline double dynamic_score_entry(double theta_i, double theta_c) {
  if (theta_i == 0.0 && theta_c == 0.0) return 0.0;
  if (theta_i >= 0.12) {
    if (theta_c >= 0.35) return 2.0;
    return 1.5;  // includes the theta_c < 0.2 cell the table leaves open
  }
  if (theta_c >= 0.35) return 1.5;  // other open cell
  if (theta_c >= 0.2) return 1.0;
  return 0.5;
}

struct FrameDynamicScore {
  double theta_image = 0.0;    // masked fraction of the full frame
  double theta_central = 0.0;  // masked fraction of the central half-crop
  double score = 0.0;
};

// theta_i over the whole mask, theta_c over the centered region spanning
// rows [H/4, H-H/4) and cols [W/4, W-W/4) against the H/2 x W/2 reference
// area.
inline FrameDynamicScore dynamic_score_frame(const Mask& mask) {
  require(mask.height() > 0 && mask.width() > 0, ErrorCode::ShapeMismatch,
          "mask must be non-empty");
  const int h = mask.height(), w = mask.width();
  const int h0 = static_cast<int>(std::lround(0.25 * h));
  const int w0 = static_cast<int>(std::lround(0.25 * w));
  std::int64_t total = 0, central = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.at(y, x)) {
        ++total;
        if (y >= h0 && y < h - h0 && x >= w0 && x < w - w0) ++central;
      }
  FrameDynamicScore out;
  out.theta_image = static_cast<double>(total) / (static_cast<double>(h) * w);
  out.theta_central =
      static_cast<double>(central) / (static_cast<double>(h) * w / 4.0);
  out.score = dynamic_score_entry(out.theta_image, out.theta_central);
  return out;
}

struct SequenceDynamicScore {
  double total = 0.0;
  double threshold = 0.0;  // score_factor * frame count
  bool dynamic = false;    // total >= threshold
  std::vector<FrameDynamicScore> frames;
};

// Step 3 verdict: the clip counts as dynamic when the summed frame scores
// reach score_factor times the number of scored masks.
inline SequenceDynamicScore dynamic_score_sequence(
    const std::vector<Mask>& masks, double score_factor = 0.25) {
  require(!masks.empty(), ErrorCode::MissingMasks, "no masks to score");
  SequenceDynamicScore out;
  for (const Mask& m : masks) {
    out.frames.push_back(dynamic_score_frame(m));
    out.total += out.frames.back().score;
  }
  out.threshold = score_factor * static_cast<double>(masks.size());
  out.dynamic = out.total >= out.threshold;
  return out;
}

struct NonrigidParams {
  int grid_stride = 4;           // sampling stride for correspondences
  double sampson_threshold = 1.0;  // squared pixels; above = non-rigid
  FundamentalRansacParams ransac;
};

struct NonrigidResult {
  std::vector<Mask> masks;               // one per consecutive frame pair
  std::vector<std::uint8_t> degenerate;  // pair flagged when F was unfit
};

// Step 3 masks: per consecutive pair, estimate a fundamental matrix from a
// sparse grid of flow correspondences and flag every pixel whose flow
// violates it by more than sampson_threshold. A degenerate pair (for
// example zero motion) yields an all-false mask and a warning flag instead
// of failing the clip.
inline NonrigidResult nonrigid_masks_from_flow(
    const std::vector<FlowField>& flows, const NonrigidParams& params,
    std::uint64_t seed) {
  require(!flows.empty(), ErrorCode::EmptyClip, "no flow fields given");
  require(params.grid_stride >= 1, ErrorCode::ConfigError,
          "grid stride must be >= 1");
  NonrigidResult out;
  Rng root(seed);

  for (std::size_t pair = 0; pair < flows.size(); ++pair) {
    const FlowField& flow = flows[pair];
    require(flow.channels() == 2, ErrorCode::BadChannelCount,
            "flow fields need (du, dv) channels");
    for (float v : flow)
      require(std::isfinite(v), ErrorCode::ShapeMismatch,
              "flow contains non-finite values");
    const int h = flow.height(), w = flow.width();

    std::vector<Correspondence> corrs;
    for (int y = 0; y < h; y += params.grid_stride)
      for (int x = 0; x < w; x += params.grid_stride)
        corrs.push_back({{static_cast<double>(x), static_cast<double>(y)},
                         {x + static_cast<double>(flow.at(y, x, 0)),
                          y + static_cast<double>(flow.at(y, x, 1))}});
    require(corrs.size() >= 8, ErrorCode::TooFewCorrespondences,
            "flow grid yields fewer than 8 correspondences");

    Mask mask(h, w, 1, 0);
    bool degenerate = false;
    try {
      const FundamentalFit fit = ransac_fundamental(
          corrs, params.ransac, root.split(pair).next_u64());
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          const Eigen::Vector2d a(x, y);
          const Eigen::Vector2d b(x + static_cast<double>(flow.at(y, x, 0)),
                                  y + static_cast<double>(flow.at(y, x, 1)));
          double d = 0.0;
          try {
            d = sampson_distance(fit.F, a, b);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroGradient) throw;
          }
          if (d > params.sampson_threshold) mask.at(y, x) = 1;
        }
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateConfiguration) throw;
      degenerate = true;  // keep the all-false mask
    }
    out.masks.push_back(std::move(mask));
    out.degenerate.push_back(degenerate ? 1 : 0);
  }
  return out;
}

struct SmallViewpointParams {
  CircleRansacParams circle{100, 2.0};
  double radius_threshold = 20.0;     // a track is "small" when r <= this
  int count_threshold = 40;           // reject needs more than this many
  double mean_motion_threshold = 5.0; // ... and mean radius below this
};

struct SmallViewpointResult {
  int usable_tracks = 0;
  int small_count = 0;
  double mean_radius = 0.0;
  bool rejected = false;
  std::vector<double> radii;  // one per usable track
};

// Step 4: fit a circle to each track's visible points and reject the clip
// when many tracks stay on small circles and the mean radius is tiny.
// Tracks with fewer than 3 visible points are unusable; tracks whose points
// are all (near-)collinear cannot support a circumcircle and are skipped.
inline SmallViewpointResult small_viewpoint_filter(
    const TrackSet& tracks, const SmallViewpointParams& params,
    std::uint64_t seed) {
  SmallViewpointResult out;
  Rng root(seed);
  for (std::size_t ti = 0; ti < tracks.size(); ++ti) {
    std::vector<Eigen::Vector2d> pts;
    for (const TrackPoint& p : tracks[ti].points)
      if (p.visible) pts.emplace_back(p.x, p.y);
    if (pts.size() < 3) continue;
    CircleFit fit;
    try {
      fit = ransac_circle(pts, params.circle, root.split(ti).next_u64());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateSample) continue;
      throw;
    }
    out.radii.push_back(fit.circle.radius);
    ++out.usable_tracks;
    if (fit.circle.radius <= params.radius_threshold) ++out.small_count;
    out.mean_radius += fit.circle.radius;
  }
  require(out.usable_tracks > 0, ErrorCode::NoUsableTracks,
          "no track has 3 or more visible points");
  out.mean_radius /= out.usable_tracks;
  out.rejected = out.small_count > params.count_threshold &&
                 out.mean_radius < params.mean_motion_threshold;
  return out;
}

struct CurationConfig {
  bool enable_downsample = true;
  bool enable_semantic = true;
  bool enable_nonrigid = true;
  bool enable_small_viewpoint = true;
  int temporal_rate = 2;
  int target_short_side = 480;
  double semantic_reject_fraction = 0.5;
  double sequence_score_factor = 0.25;
  NonrigidParams nonrigid;
  SmallViewpointParams small_viewpoint;
  std::uint64_t seed = 0;
};

struct CurationReport {
  int schema_version = 1;
  bool accepted = false;
  std::string reject_stage;  // empty when accepted
  int frames_in = 0;
  int frames_kept = 0;
  int height = 0, width = 0;
  bool semantic_ran = false;
  SemanticFilterResult semantic;
  bool dynamic_ran = false;
  SequenceDynamicScore dynamic_score;
  int degenerate_flow_pairs = 0;
  bool small_viewpoint_ran = false;
  SmallViewpointResult small_viewpoint;
};

// Runs the four curation steps in order, stopping at the first rejection.
// Auxiliary inputs must describe the post-downsampling frames.
inline CurationReport curate_clip(const ClipBundle& bundle,
                                  const CurationConfig& config) {
  require(!bundle.frames.empty(), ErrorCode::EmptyClip, "clip has no frames");
  CurationReport report;
  report.frames_in = static_cast<int>(bundle.frames.size());

  std::vector<Image> frames =
      config.enable_downsample
          ? downsample_clip(bundle.frames, config.temporal_rate,
                            config.target_short_side)
          : bundle.frames;
  report.frames_kept = static_cast<int>(frames.size());
  report.height = frames.front().height();
  report.width = frames.front().width();

  if (config.enable_semantic) {
    require(bundle.semantic_masks.size() == frames.size(),
            ErrorCode::MissingMasks,
            "semantic filtering needs one mask per kept frame");
    for (const Mask& m : bundle.semantic_masks)
      require(m.height() == report.height && m.width() == report.width,
              ErrorCode::ShapeMismatch, "semantic mask dimensions differ");
    report.semantic_ran = true;
    report.semantic = semantic_dynamic_filter(bundle.semantic_masks,
                                              config.semantic_reject_fraction);
    if (report.semantic.rejected) {
      report.reject_stage = "semantic";
      return report;
    }
  }

  if (config.enable_nonrigid) {
    require(bundle.flows.size() + 1 == frames.size(), ErrorCode::ConfigError,
            "need one flow per consecutive frame pair");
    for (const FlowField& f : bundle.flows)
      require(f.height() == report.height && f.width() == report.width,
              ErrorCode::ShapeMismatch, "flow dimensions differ");
    const NonrigidResult nr =
        nonrigid_masks_from_flow(bundle.flows, config.nonrigid, config.seed);
    for (auto d : nr.degenerate)
      if (d) ++report.degenerate_flow_pairs;
    report.dynamic_ran = true;
    report.dynamic_score =
        dynamic_score_sequence(nr.masks, config.sequence_score_factor);
    if (report.dynamic_score.dynamic) {
      report.reject_stage = "dynamic_score";
      return report;
    }
  }

  if (config.enable_small_viewpoint) {
    for (const Track& t : bundle.tracks)
      for (const TrackPoint& p : t.points)
        if (p.visible)
          require(std::isfinite(p.x) && std::isfinite(p.y) && p.x >= 0 &&
                      p.x < report.width && p.y >= 0 && p.y < report.height,
                  ErrorCode::ShapeMismatch,
                  "visible track point falls outside the frame");
    report.small_viewpoint_ran = true;
    report.small_viewpoint = small_viewpoint_filter(
        bundle.tracks, config.small_viewpoint, config.seed + 1);
    if (report.small_viewpoint.rejected) {
      report.reject_stage = "small_viewpoint";
      return report;
    }
  }

  report.accepted = true;
  return report;
}

}  // namespace mvkit
