#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mvkit/camera.hpp"
#include "mvkit/depth_align.hpp"
#include "mvkit/errors.hpp"
#include "mvkit/generators.hpp"
#include "mvkit/grid.hpp"
#include "mvkit/io/csv.hpp"
#include "mvkit/io/pfm.hpp"
#include "mvkit/io/ppm.hpp"
#include "mvkit/lwlr.hpp"
#include "mvkit/metrics.hpp"
#include "mvkit/rng.hpp"
#include "mvkit/warp.hpp"

namespace mvkit {

// Ordered target cameras plus the iteration geometry: every step extends
// the generated prefix by up to `chunk` views conditioned on `anchors`
// previously generated ones.
struct Trajectory {
  std::vector<Camera> cameras;
  int chunk = 15;
  int anchors = 3;
};

struct PipelineState {
  std::vector<Image> generated;          // prefix of the trajectory
  std::vector<DepthMap> ingested_depth;  // indexed by view; empty = absent
  std::vector<DepthMap> aligned_depth;
  int iteration = 0;
  std::uint64_t seed = 0;
};

// Depth ingestion seam; the monocular estimator is replaced by files or
// by test fixtures.
class DepthSource {
 public:
  virtual ~DepthSource() = default;
  virtual DepthMap load(int view_index) = 0;
};

class DirectoryDepthSource : public DepthSource {
 public:
  explicit DirectoryDepthSource(std::string dir) : dir_(std::move(dir)) {}

  DepthMap load(int view_index) override {
    return read_depth_pfm(dir_ + "/" + depth_name(view_index));
  }

  static std::string depth_name(int view) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "depth_%03d.pfm", view);
    return buf;
  }

 private:
  std::string dir_;
};

class MemoryDepthSource : public DepthSource {
 public:
  explicit MemoryDepthSource(std::vector<DepthMap> maps)
      : maps_(std::move(maps)) {}

  DepthMap load(int view_index) override {
    require(view_index >= 0 && view_index < static_cast<int>(maps_.size()) &&
                maps_[static_cast<std::size_t>(view_index)].value.height() > 0,
            ErrorCode::IoError,
            "no depth stored for view " + std::to_string(view_index));
    return maps_[static_cast<std::size_t>(view_index)];
  }

 private:
  std::vector<DepthMap> maps_;
};

// Correspondence ingestion seam. An empty result skips alignment for the
// step, leaving the ingested depth in use as-is.
class MatchSource {
 public:
  virtual ~MatchSource() = default;
  virtual MatchSet get(int source_view, const std::vector<int>& anchor_views,
                       const std::vector<Camera>& cameras, Rng& rng) = 0;
};

// Reads matches_<view>.csv and keeps only rows pointing at the selected
// anchors; files may cover more anchors than one step selects.
class DirectoryMatchSource : public MatchSource {
 public:
  explicit DirectoryMatchSource(std::string dir, int max_matches = 1024)
      : dir_(std::move(dir)), max_matches_(max_matches) {}

  MatchSet get(int source_view, const std::vector<int>& anchor_views,
               const std::vector<Camera>&, Rng&) override {
    char buf[24];
    std::snprintf(buf, sizeof buf, "matches_%03d.csv", source_view);
    const MatchSet all = read_matches_csv(dir_ + "/" + buf, max_matches_);
    MatchSet kept;
    for (const Match& m : all)
      if (std::find(anchor_views.begin(), anchor_views.end(), m.anchor_view) !=
          anchor_views.end())
        kept.push_back(m);
    return kept;
  }

 private:
  std::string dir_;
  int max_matches_;
};

// Synthesizes exact correspondences from ground-truth depth; stands in
// for a feature matcher on synthetic scenes.
class SynthMatchSource : public MatchSource {
 public:
  SynthMatchSource(DepthSource& gt_depth, int count)
      : gt_depth_(gt_depth), count_(count) {}

  MatchSet get(int source_view, const std::vector<int>& anchor_views,
               const std::vector<Camera>& cameras, Rng& rng) override {
    const DepthMap gt = gt_depth_.load(source_view);
    return synth_matches(gt, cameras[static_cast<std::size_t>(source_view)],
                         cameras, anchor_views, count_, rng.next_u64());
  }

 private:
  DepthSource& gt_depth_;
  int count_;
};

struct PipelineOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  AlignParams align;
  LwlrParams lwlr;
  WarpOptions warp;
  std::string output_dir;  // empty keeps the run in memory
};

// What one step computed, for persistence and inspection.
struct StepArtifacts {
  int source_view = -1;
  std::vector<int> anchor_views;
  std::vector<int> target_views;
  std::vector<Image> warped;
  std::vector<Mask> masks;
  DepthMap used_depth;
  bool aligned = false;
};

// The first generated view is always an anchor; the remaining slots are
// distinct uniform draws from the other generated views, or all of them
// when fewer exist. Ascending order keeps downstream iteration stable.
inline std::vector<int> select_anchors(const PipelineState& state, int k,
                                       Rng& rng) {
  require(!state.generated.empty(), ErrorCode::EmptyState,
          "cannot select anchors before any view exists");
  require(k >= 1, ErrorCode::ConfigError, "anchor count must be positive");
  const int n = static_cast<int>(state.generated.size());
  std::vector<int> pool;
  for (int i = 1; i < n; ++i) pool.push_back(i);

  std::vector<int> anchors{0};
  if (static_cast<int>(pool.size()) <= k - 1) {
    anchors.insert(anchors.end(), pool.begin(), pool.end());
  } else {
    for (int i = 0; i < k - 1; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) +
          static_cast<std::size_t>(
              rng.below(pool.size() - static_cast<std::size_t>(i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
      anchors.push_back(pool[static_cast<std::size_t>(i)]);
    }
  }
  std::sort(anchors.begin(), anchors.end());
  return anchors;
}

namespace detail {

template <class F>
auto tagged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(stage);
    throw;
  }
}

}  // namespace detail

// One warp-and-generate iteration. The input state is never mutated: any
// stage failure propagates before the extended copy is returned, so the
// caller's state stays valid.
inline PipelineState pipeline_step(const PipelineState& state,
                                   const Trajectory& traj, DepthSource& depth,
                                   MatchSource* matches, Generator& generator,
                                   const PipelineOptions& opt,
                                   StepArtifacts* artifacts = nullptr) {
  require(!state.generated.empty(), ErrorCode::EmptyState,
          "pipeline needs at least one generated view");
  const int total = static_cast<int>(traj.cameras.size());
  const int have = static_cast<int>(state.generated.size());
  require(have < total, ErrorCode::ConfigError,
          "trajectory already fully generated");
  require(traj.chunk >= 1, ErrorCode::ConfigError, "chunk must be positive");

  const int source = have - 1;
  const int m = std::min(traj.chunk, total - have);
  const Camera& src_cam = traj.cameras[static_cast<std::size_t>(source)];

  Rng step_rng = Rng(state.seed).split(static_cast<std::uint64_t>(state.iteration));
  const std::vector<int> anchors = select_anchors(state, traj.anchors, step_rng);

  const DepthMap ingested =
      detail::tagged("ingest", [&] { return depth.load(source); });

  // Alignment needs at least one anchor other than the source itself; on
  // the first iteration the source is the only view, so its depth is used
  // unaligned.
  std::vector<int> align_anchors;
  for (int a : anchors)
    if (a != source) align_anchors.push_back(a);

  DepthMap used = ingested;
  bool aligned = false;
  if (matches != nullptr && !align_anchors.empty()) {
    const MatchSet set = detail::tagged("align", [&] {
      return matches->get(source, align_anchors, traj.cameras, step_rng);
    });
    if (!set.empty()) {
      const SparseGuidance guidance = detail::tagged("align", [&] {
        return align_sparse(ingested, set, src_cam, traj.cameras, opt.align);
      });
      used = detail::tagged("lwlr", [&] {
                return lwlr_recover(ingested, guidance, opt.lwlr, opt.threads);
              }).depth;
      aligned = true;
    }
  }

  std::vector<int> targets;
  std::vector<Image> warped;
  std::vector<Mask> masks;
  detail::tagged("warp", [&] {
    for (int j = have; j < have + m; ++j) {
      WarpResult r =
          forward_warp(state.generated[static_cast<std::size_t>(source)], used,
                       src_cam, traj.cameras[static_cast<std::size_t>(j)],
                       opt.warp);
      targets.push_back(j);
      warped.push_back(std::move(r.image));
      masks.push_back(std::move(r.mask));
    }
  });

  GeneratorRequest request;
  request.warped = warped;
  request.masks = masks;
  request.target_views = targets;
  request.anchor_views = anchors;
  for (int a : anchors) {
    request.anchor_images.push_back(state.generated[static_cast<std::size_t>(a)]);
    request.anchor_cameras.push_back(traj.cameras[static_cast<std::size_t>(a)]);
  }

  const std::vector<Image> produced =
      detail::tagged("generate", [&] { return generator.generate(request); });
  require(produced.size() == targets.size(), ErrorCode::GeneratorFailed,
          "generator returned " + std::to_string(produced.size()) +
              " frames for " + std::to_string(targets.size()) + " targets");
  for (const Image& img : produced)
    require(img.same_shape(state.generated.front()), ErrorCode::GeneratorFailed,
            "generated frame shape differs from the sequence");

  PipelineState next = state;
  next.ingested_depth.resize(static_cast<std::size_t>(total));
  next.aligned_depth.resize(static_cast<std::size_t>(total));
  next.ingested_depth[static_cast<std::size_t>(source)] = ingested;
  if (aligned) next.aligned_depth[static_cast<std::size_t>(source)] = used;
  for (const Image& img : produced) next.generated.push_back(img);
  next.iteration = state.iteration + 1;

  if (artifacts != nullptr) {
    artifacts->source_view = source;
    artifacts->anchor_views = anchors;
    artifacts->target_views = targets;
    artifacts->warped = std::move(warped);
    artifacts->masks = std::move(masks);
    artifacts->used_depth = used;
    artifacts->aligned = aligned;
  }
  return next;
}

struct RunResult {
  PipelineState state;
  nlohmann::json summary;
  std::vector<double> iteration_seconds;
};

namespace detail {

inline std::string view_file(const char* prefix, int view, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d.%s", prefix, view, ext);
  return buf;
}

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot open " + path);
  out << body;
  require(static_cast<bool>(out), ErrorCode::IoError, "cannot write " + path);
}

}  // namespace detail

// Full autoregressive run: seeds the state with the input views, steps
// until the trajectory is covered, and scores against ground truth when
// provided. All deterministic outputs land under output_dir as they are
// produced, so a failing stage leaves the completed prefix behind;
// wall-clock timings are reported separately so summary.json stays
// byte-stable across runs.
inline RunResult run_pipeline(const Trajectory& traj,
                              const std::vector<Image>& input_views,
                              DepthSource& depth, MatchSource* matches,
                              Generator& generator,
                              const std::vector<Image>* ground_truth,
                              const PipelineOptions& opt) {
  namespace fs = std::filesystem;
  require(!traj.cameras.empty(), ErrorCode::ConfigError,
          "trajectory has no cameras");
  require(!input_views.empty(), ErrorCode::ConfigError,
          "need at least one input view");
  require(input_views.size() <= traj.cameras.size(), ErrorCode::ConfigError,
          "more input views than trajectory cameras");
  require(traj.chunk >= 1, ErrorCode::ConfigError, "chunk must be positive");
  require(traj.anchors >= 1, ErrorCode::ConfigError,
          "anchor count must be positive");
  for (const Camera& cam : traj.cameras) cam.validate();
  for (const Image& img : input_views)
    require(img.same_shape(input_views.front()), ErrorCode::ShapeMismatch,
            "input views disagree on shape");
  if (ground_truth != nullptr)
    require(ground_truth->size() == traj.cameras.size(),
            ErrorCode::ConfigError,
            "ground truth must cover every trajectory view");

  const bool persist = !opt.output_dir.empty();
  fs::path root(opt.output_dir);
  if (persist) {
    std::error_code ec;
    for (const char* sub : {"images", "depth", "masks", "warped"}) {
      fs::create_directories(root / sub, ec);
      require(!ec, ErrorCode::IoError,
              "cannot create " + (root / sub).string());
    }
  }

  PipelineState state;
  state.generated = input_views;
  state.seed = opt.seed;

  if (persist)
    for (std::size_t i = 0; i < input_views.size(); ++i)
      write_ppm((root / "images" /
                 detail::view_file("view", static_cast<int>(i), "ppm"))
                    .string(),
                input_views[i]);

  RunResult result;
  const int total = static_cast<int>(traj.cameras.size());
  while (static_cast<int>(state.generated.size()) < total) {
    StepArtifacts art;
    const auto started = std::chrono::steady_clock::now();
    state = pipeline_step(state, traj, depth, matches, generator, opt, &art);
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - started;
    result.iteration_seconds.push_back(elapsed.count());

    if (persist) {
      for (std::size_t i = 0; i < art.target_views.size(); ++i) {
        const int view = art.target_views[i];
        write_ppm((root / "images" / detail::view_file("view", view, "ppm"))
                      .string(),
                  state.generated[static_cast<std::size_t>(view)]);
        write_ppm((root / "warped" / detail::view_file("view", view, "ppm"))
                      .string(),
                  art.warped[i]);
        write_pgm_mask(
            (root / "masks" / detail::view_file("view", view, "pgm")).string(),
            art.masks[i]);
      }
      write_depth_pfm(
          (root / "depth" / detail::view_file("depth", art.source_view, "pfm"))
              .string(),
          art.used_depth);
    }
  }

  nlohmann::json summary;
  summary["schema_version"] = 1;
  summary["views"] = total;
  summary["input_views"] = static_cast<int>(input_views.size());
  summary["iterations"] = state.iteration;
  summary["seed"] = state.seed;
  summary["chunk"] = traj.chunk;
  summary["anchors"] = traj.anchors;
  if (ground_truth != nullptr) {
    std::vector<double> scores;
    for (int i = 0; i < total; ++i)
      scores.push_back(psnr(state.generated[static_cast<std::size_t>(i)],
                            (*ground_truth)[static_cast<std::size_t>(i)]));
    summary["psnr"] = scores;
  }

  if (persist) {
    detail::write_text_file((root / "summary.json").string(),
                            summary.dump(2) + "\n");
    nlohmann::json timings;
    timings["iteration_seconds"] = result.iteration_seconds;
    double sum = 0.0;
    for (double s : result.iteration_seconds) sum += s;
    timings["total_seconds"] = sum;
    detail::write_text_file((root / "timings.json").string(),
                            timings.dump(2) + "\n");
  }

  result.state = std::move(state);
  result.summary = std::move(summary);
  return result;
}

}  // namespace mvkit
