#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mvkit/camera.hpp"
#include "mvkit/errors.hpp"
#include "mvkit/grid.hpp"
#include "mvkit/io/camera_json.hpp"
#include "mvkit/io/ppm.hpp"

namespace mvkit {

// What the view generator sees for one iteration: the forward-warped
// targets with their coverage masks, plus the anchor frames the outputs
// must stay consistent with.
struct GeneratorRequest {
  std::vector<Image> warped;
  std::vector<Mask> masks;
  std::vector<int> target_views;
  std::vector<int> anchor_views;
  std::vector<Image> anchor_images;
  std::vector<Camera> anchor_cameras;
};

// Stand-in seam for the multi-view generative model: any implementation
// that completes the uncovered regions can plug in here.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::vector<Image> generate(const GeneratorRequest& request) = 0;
};

// Iterative mean-of-covered-neighbors fill. Each round fills every
// uncovered pixel that touches a covered 8-neighbor with the per-channel
// mean of those neighbors, then marks it covered; covered pixels never
// change. A frame with no coverage at all becomes the fallback color.
inline Image hole_fill(const Image& image, const Mask& mask,
                       const std::vector<float>& fallback) {
  require(mask.height() == image.height() && mask.width() == image.width(),
          ErrorCode::ShapeMismatch, "mask dimensions differ from image");
  require(static_cast<int>(fallback.size()) == image.channels(),
          ErrorCode::BadChannelCount, "fallback needs one value per channel");

  const int h = image.height(), w = image.width(), c = image.channels();
  Image out = image;
  Mask covered = mask;

  bool any_covered = false;
  for (auto v : covered)
    if (v) {
      any_covered = true;
      break;
    }
  if (!any_covered) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        for (int ch = 0; ch < c; ++ch)
          out.at(y, x, ch) = fallback[static_cast<std::size_t>(ch)];
    return out;
  }

  std::vector<std::pair<int, int>> frontier;
  std::vector<float> values;
  while (true) {
    frontier.clear();
    values.clear();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (covered.at(y, x)) continue;
        double sum[3] = {0, 0, 0};
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if (dy == 0 && dx == 0) continue;
            const int ny = y + dy, nx = x + dx;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            if (!covered.at(ny, nx)) continue;
            for (int ch = 0; ch < c; ++ch) sum[ch] += out.at(ny, nx, ch);
            ++n;
          }
        if (n == 0) continue;
        frontier.emplace_back(y, x);
        for (int ch = 0; ch < c; ++ch)
          values.push_back(static_cast<float>(sum[ch] / n));
      }
    if (frontier.empty()) break;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      const auto [y, x] = frontier[i];
      covered.at(y, x) = 1;
      for (int ch = 0; ch < c; ++ch)
        out.at(y, x, ch) = values[i * static_cast<std::size_t>(c) +
                                  static_cast<std::size_t>(ch)];
    }
  }
  return out;
}

// Returns the ground-truth frame for every requested target; closes the
// loop exactly on synthetic scenes.
class OracleGenerator : public Generator {
 public:
  explicit OracleGenerator(std::vector<Image> ground_truth)
      : gt_(std::move(ground_truth)) {}

  std::vector<Image> generate(const GeneratorRequest& request) override {
    std::vector<Image> out;
    for (int view : request.target_views) {
      require(view >= 0 && view < static_cast<int>(gt_.size()),
              ErrorCode::GeneratorFailed,
              "oracle has no ground truth for view " + std::to_string(view));
      out.push_back(gt_[static_cast<std::size_t>(view)]);
    }
    return out;
  }

 private:
  std::vector<Image> gt_;
};

// Fills warp holes from covered neighbors; empty frames fall back to the
// first anchor's mean color.
class HoleFillGenerator : public Generator {
 public:
  std::vector<Image> generate(const GeneratorRequest& request) override {
    require(request.warped.size() == request.masks.size(),
            ErrorCode::ShapeMismatch, "one mask per warped frame required");
    require(!request.anchor_images.empty(), ErrorCode::GeneratorFailed,
            "hole filling needs at least one anchor image");
    const Image& anchor = request.anchor_images.front();
    std::vector<float> fallback(static_cast<std::size_t>(anchor.channels()), 0.0f);
    for (int ch = 0; ch < anchor.channels(); ++ch) {
      double sum = 0.0;
      for (int y = 0; y < anchor.height(); ++y)
        for (int x = 0; x < anchor.width(); ++x) sum += anchor.at(y, x, ch);
      fallback[static_cast<std::size_t>(ch)] = static_cast<float>(
          sum / (static_cast<double>(anchor.height()) * anchor.width()));
    }
    std::vector<Image> out;
    for (std::size_t i = 0; i < request.warped.size(); ++i)
      out.push_back(hole_fill(request.warped[i], request.masks[i], fallback));
    return out;
  }
};

// Runs an external command per iteration, exchanging PPM/PGM/JSON files.
// The template's {warped_dir}, {mask_dir}, {anchor_dir} and {out_dir}
// placeholders are substituted; the command must leave one
// view_<index>.ppm per target in {out_dir}.
class ExecGenerator : public Generator {
 public:
  ExecGenerator(std::string command_template, std::string scratch_dir)
      : template_(std::move(command_template)),
        scratch_(std::move(scratch_dir)) {}

  std::vector<Image> generate(const GeneratorRequest& request) override {
    namespace fs = std::filesystem;
    const fs::path root =
        fs::path(scratch_) / ("gen_" + std::to_string(invocation_++));
    const fs::path warped_dir = root / "warped";
    const fs::path mask_dir = root / "masks";
    const fs::path anchor_dir = root / "anchors";
    const fs::path out_dir = root / "out";
    std::error_code ec;
    for (const fs::path& p : {warped_dir, mask_dir, anchor_dir, out_dir}) {
      fs::create_directories(p, ec);
      require(!ec, ErrorCode::IoError, "cannot create " + p.string());
    }

    for (std::size_t i = 0; i < request.warped.size(); ++i) {
      const std::string name = view_name(request.target_views[i]);
      write_ppm((warped_dir / (name + ".ppm")).string(), request.warped[i]);
      write_pgm_mask((mask_dir / (name + ".pgm")).string(), request.masks[i]);
    }
    for (std::size_t i = 0; i < request.anchor_images.size(); ++i)
      write_ppm((anchor_dir / (view_name(request.anchor_views[i]) + ".ppm")).string(),
                request.anchor_images[i]);
    write_camera_json((anchor_dir / "cameras.json").string(),
                      request.anchor_cameras);

    std::string cmd = template_;
    substitute(cmd, "{warped_dir}", warped_dir.string());
    substitute(cmd, "{mask_dir}", mask_dir.string());
    substitute(cmd, "{anchor_dir}", anchor_dir.string());
    substitute(cmd, "{out_dir}", out_dir.string());

    const int rc = std::system(cmd.c_str());
    require(rc == 0, ErrorCode::GeneratorFailed,
            "generator command exited with status " + std::to_string(rc));

    std::vector<Image> out;
    for (int view : request.target_views) {
      const fs::path produced = out_dir / (view_name(view) + ".ppm");
      require(fs::exists(produced), ErrorCode::GeneratorFailed,
              "generator produced no " + produced.string());
      out.push_back(read_ppm(produced.string()));
    }
    return out;
  }

  static std::string view_name(int view) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "view_%03d", view);
    return buf;
  }

 private:
  static void substitute(std::string& text, const std::string& key,
                         const std::string& value) {
    for (std::size_t pos = text.find(key); pos != std::string::npos;
         pos = text.find(key, pos + value.size()))
      text.replace(pos, key.size(), value);
  }

  std::string template_;
  std::string scratch_;
  int invocation_ = 0;
};

}  // namespace mvkit
