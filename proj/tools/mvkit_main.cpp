// Command-line surface for the library: curation, conditioning, depth
// alignment, dense recovery, warping, the full pipeline, and metrics.
// Exit codes: 0 success, 1 domain error, 2 usage error.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvkit/mvkit.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string numbered(const char* prefix, int index, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%03d.%s", prefix, index, ext);
  return buf;
}

// Loads prefix_000.ext, prefix_001.ext, ... until the first gap.
template <class Reader>
auto read_sequence(const std::string& dir, const char* prefix, const char* ext,
                   Reader&& reader) {
  using Item = decltype(reader(std::string{}));
  mvkit::require(fs::is_directory(dir), mvkit::ErrorCode::IoError,
                 "not a directory: " + dir);
  std::vector<Item> items;
  for (int i = 0;; ++i) {
    const fs::path p = fs::path(dir) / numbered(prefix, i, ext);
    if (!fs::exists(p)) break;
    items.push_back(reader(p.string()));
  }
  mvkit::require(!items.empty(), mvkit::ErrorCode::IoError,
                 "no " + std::string(prefix) + "_*." + ext + " files in " + dir);
  return items;
}

struct GlobalOpts {
  std::uint64_t seed = 0;
  int threads = 1;
  bool json_errors = false;
};

// ---------------------------------------------------------------- curate

struct CurateOpts {
  std::string frames_dir, masks_dir, flows_dir, tracks_file, out_file;
  int temporal_rate = 2;
  int short_side = 480;
  bool no_downsample = false;
};

json curation_report_json(const mvkit::CurationReport& r) {
  json j;
  j["schema_version"] = r.schema_version;
  j["accepted"] = r.accepted;
  j["reject_stage"] = r.reject_stage;
  j["frames_in"] = r.frames_in;
  j["frames_kept"] = r.frames_kept;
  j["height"] = r.height;
  j["width"] = r.width;
  j["semantic"] = {{"ran", r.semantic_ran},
                   {"fraction", r.semantic.fraction},
                   {"rejected", r.semantic.rejected}};
  json scores = json::array();
  for (const auto& f : r.dynamic_score.frames)
    scores.push_back({{"theta_image", f.theta_image},
                      {"theta_central", f.theta_central},
                      {"score", f.score}});
  j["dynamic"] = {{"ran", r.dynamic_ran},
                  {"total", r.dynamic_score.total},
                  {"threshold", r.dynamic_score.threshold},
                  {"dynamic", r.dynamic_score.dynamic},
                  {"degenerate_pairs", r.degenerate_flow_pairs},
                  {"frame_scores", scores}};
  j["small_viewpoint"] = {{"ran", r.small_viewpoint_ran},
                          {"usable_tracks", r.small_viewpoint.usable_tracks},
                          {"small_count", r.small_viewpoint.small_count},
                          {"mean_radius", r.small_viewpoint.mean_radius},
                          {"rejected", r.small_viewpoint.rejected}};
  return j;
}

int run_curate(const GlobalOpts& g, const CurateOpts& o) {
  mvkit::ClipBundle bundle;
  mvkit::detail::tagged("ingest", [&] {
    bundle.frames = read_sequence(o.frames_dir, "frame", "ppm", mvkit::read_ppm);
    if (!o.masks_dir.empty())
      bundle.semantic_masks =
          read_sequence(o.masks_dir, "mask", "pgm", mvkit::read_pgm_mask);
    if (!o.flows_dir.empty())
      bundle.flows = read_sequence(o.flows_dir, "flow", "flo", mvkit::read_flo);
    if (!o.tracks_file.empty())
      bundle.tracks = mvkit::read_tracks_csv(o.tracks_file);
  });

  mvkit::CurationConfig config;
  config.enable_downsample = !o.no_downsample;
  config.enable_semantic = !o.masks_dir.empty();
  config.enable_nonrigid = !o.flows_dir.empty();
  config.enable_small_viewpoint = !o.tracks_file.empty();
  config.temporal_rate = o.temporal_rate;
  config.target_short_side = o.short_side;
  config.seed = g.seed;

  const mvkit::CurationReport report = mvkit::detail::tagged(
      "curate", [&] { return mvkit::curate_clip(bundle, config); });

  const std::string body = curation_report_json(report).dump(2) + "\n";
  if (o.out_file.empty()) {
    std::cout << body;
  } else {
    mvkit::detail::tagged("write", [&] {
      mvkit::detail::write_text_file(o.out_file, body);
    });
  }
  return 0;
}

// ----------------------------------------------------------------- vcond

struct VcondOpts {
  std::string frames_dir, masks_dir, out_dir;
  std::vector<int> refs{0};
  int t = 1000;
};

int run_vcond(const GlobalOpts& g, const VcondOpts& o) {
  mvkit::ViewSet views;
  mvkit::detail::tagged("ingest", [&] {
    views.frames = read_sequence(o.frames_dir, "frame", "ppm", mvkit::read_ppm);
    if (!o.masks_dir.empty())
      views.masks = read_sequence(o.masks_dir, "mask", "pgm", mvkit::read_pgm_mask);
  });
  views.reference_indices = o.refs;

  const int h = views.frames.front().height();
  const int w = views.frames.front().width();
  const int c = views.frames.front().channels();

  mvkit::Rng root(g.seed);
  mvkit::Rng mask_rng = root.split(1);
  mvkit::Rng cond_rng = root.split(2);
  mvkit::Rng state_rng = root.split(3);

  const mvkit::Schedule schedule{mvkit::ScheduleParams{}};
  mvkit::Condition cond;
  mvkit::detail::tagged("condition", [&] {
    if (views.masks.empty()) {
      for (std::size_t f = 0; f < views.frames.size(); ++f) {
        if (views.is_reference(static_cast<int>(f)))
          views.masks.emplace_back(h, w, 1, 0);
        else
          views.masks.push_back(mvkit::irregular_mask(
              h, w, mask_rng.split(static_cast<std::uint64_t>(f)).next_u64()));
      }
    }
    std::vector<mvkit::Image> cond_noise, x_t;
    for (std::size_t f = 0; f < views.frames.size(); ++f) {
      mvkit::Rng nc = cond_rng.split(static_cast<std::uint64_t>(f));
      cond_noise.push_back(mvkit::normal_raster(h, w, c, nc));
      mvkit::Rng ns = state_rng.split(static_cast<std::uint64_t>(f));
      mvkit::Image state_noise = mvkit::normal_raster(h, w, c, ns);
      x_t.push_back(mvkit::add_noise(views.frames[f], o.t, state_noise, schedule));
    }
    cond = mvkit::build_condition(views, x_t, o.t, cond_noise, schedule);
  });

  mvkit::detail::tagged("write", [&] {
    std::error_code ec;
    fs::create_directories(o.out_dir, ec);
    mvkit::require(!ec, mvkit::ErrorCode::IoError, "cannot create " + o.out_dir);
    for (std::size_t f = 0; f < cond.rasters.size(); ++f) {
      mvkit::write_pfm(
          (fs::path(o.out_dir) / numbered("cond", static_cast<int>(f), "pfm")).string(),
          cond.rasters[f]);
      mvkit::write_pgm_mask(
          (fs::path(o.out_dir) / numbered("mask", static_cast<int>(f), "pgm")).string(),
          cond.masks[f]);
    }
    json sidecar;
    sidecar["schema_version"] = 1;
    sidecar["t"] = o.t;
    sidecar["t_prime"] = schedule.f_of_t(o.t);
    sidecar["w_t"] = schedule.w_of_t(o.t);
    sidecar["seed"] = g.seed;
    sidecar["frames"] = static_cast<int>(cond.rasters.size());
    sidecar["references"] = o.refs;
    mvkit::detail::write_text_file(
        (fs::path(o.out_dir) / "condition.json").string(),
        sidecar.dump(2) + "\n");
  });
  return 0;
}

// ----------------------------------------------------------------- align

struct AlignOpts {
  std::string depth_file, matches_file, cameras_file, out_file;
  int src = 0;
  int max_iterations = 200;
  double outlier_px = 2.0;
  int max_matches = 1024;
};

int run_align(const GlobalOpts&, const AlignOpts& o) {
  mvkit::DepthMap depth;
  mvkit::MatchSet matches;
  std::vector<mvkit::Camera> cameras;
  mvkit::detail::tagged("ingest", [&] {
    depth = mvkit::read_depth_pfm(o.depth_file);
    matches = mvkit::read_matches_csv(o.matches_file, o.max_matches);
    cameras = mvkit::read_camera_json(o.cameras_file);
    mvkit::require(o.src >= 0 && o.src < static_cast<int>(cameras.size()),
                   mvkit::ErrorCode::ConfigError,
                   "--src out of range for " + std::to_string(cameras.size()) +
                       " cameras");
  });
  mvkit::AlignParams params;
  params.max_iterations = o.max_iterations;
  params.outlier_residual_px = o.outlier_px;
  const mvkit::SparseGuidance guidance = mvkit::detail::tagged("align", [&] {
    return mvkit::align_sparse(depth, matches,
                               cameras[static_cast<std::size_t>(o.src)],
                               cameras, params);
  });
  mvkit::detail::tagged("write",
                        [&] { mvkit::write_guidance_json(o.out_file, guidance); });
  std::printf("%zu guidance points\n", guidance.size());
  return 0;
}

// ------------------------------------------------------------------ lwlr

struct LwlrOpts {
  std::string depth_file, guidance_file, out_file, scale_map, shift_map;
  double bandwidth = 0.2;
  double lambda = 1e-4;
};

int run_lwlr(const GlobalOpts& g, const LwlrOpts& o) {
  mvkit::DepthMap depth;
  mvkit::SparseGuidance guidance;
  mvkit::detail::tagged("ingest", [&] {
    depth = mvkit::read_depth_pfm(o.depth_file);
    guidance = mvkit::read_guidance_json(o.guidance_file);
  });
  mvkit::LwlrParams params;
  params.bandwidth = o.bandwidth;
  params.lambda = o.lambda;
  const mvkit::ScaledDepth result = mvkit::detail::tagged("lwlr", [&] {
    return mvkit::lwlr_recover(depth, guidance, params, g.threads);
  });
  mvkit::detail::tagged("write", [&] {
    mvkit::write_depth_pfm(o.out_file, result.depth);
    if (!o.scale_map.empty()) mvkit::write_pfm(o.scale_map, result.scale_map);
    if (!o.shift_map.empty()) mvkit::write_pfm(o.shift_map, result.shift_map);
  });
  return 0;
}

// ------------------------------------------------------------------ warp

struct WarpOpts2 {
  std::string image_file, depth_file, cameras_file, out_file, mask_out,
      depth_out;
  int src = 0, dst = 0;
  bool splat2x2 = false;
};

int run_warp(const GlobalOpts&, const WarpOpts2& o) {
  mvkit::Image image;
  mvkit::DepthMap depth;
  std::vector<mvkit::Camera> cameras;
  mvkit::detail::tagged("ingest", [&] {
    image = mvkit::read_ppm(o.image_file);
    depth = mvkit::read_depth_pfm(o.depth_file);
    cameras = mvkit::read_camera_json(o.cameras_file);
    const int n = static_cast<int>(cameras.size());
    mvkit::require(o.src >= 0 && o.src < n && o.dst >= 0 && o.dst < n,
                   mvkit::ErrorCode::ConfigError,
                   "--src/--dst out of range for " + std::to_string(n) +
                       " cameras");
  });
  mvkit::WarpOptions wo;
  wo.splat2x2 = o.splat2x2;
  const mvkit::WarpResult result = mvkit::detail::tagged("warp", [&] {
    return mvkit::forward_warp(image, depth,
                               cameras[static_cast<std::size_t>(o.src)],
                               cameras[static_cast<std::size_t>(o.dst)], wo);
  });
  mvkit::detail::tagged("write", [&] {
    mvkit::write_ppm(o.out_file, result.image);
    if (!o.mask_out.empty()) mvkit::write_pgm_mask(o.mask_out, result.mask);
    if (!o.depth_out.empty()) mvkit::write_depth_pfm(o.depth_out, result.depth);
  });
  std::printf("coverage %.6f\n", mvkit::mask_fraction(result.mask));
  return 0;
}

// -------------------------------------------------------------- pipeline

struct PipelineOpts {
  std::string config_file;
};

// Pulls a typed field out of the run config, reporting the JSON pointer of
// anything missing or mistyped.
template <class T>
T config_field(const json& j, const std::string& key, const T& fallback,
               bool required) {
  if (!j.contains(key)) {
    mvkit::require(!required, mvkit::ErrorCode::ConfigError,
                   "missing config field /" + key);
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    mvkit::raise(mvkit::ErrorCode::ConfigError,
                 "config field /" + key + " has the wrong type");
  }
}

int run_pipeline_cmd(const GlobalOpts& g, const PipelineOpts& o) {
  json cfg;
  mvkit::detail::tagged("ingest", [&] {
    const std::string text = mvkit::detail::read_file_binary(o.config_file);
    try {
      cfg = json::parse(text);
    } catch (const json::exception& e) {
      mvkit::raise(mvkit::ErrorCode::ConfigError,
                   std::string("config is not valid JSON: ") + e.what());
    }
    mvkit::require(cfg.is_object(), mvkit::ErrorCode::ConfigError,
                   "config root must be an object");
  });

  const int schema = config_field<int>(cfg, "schema_version", 1, false);
  mvkit::require(schema == 1, mvkit::ErrorCode::ConfigError,
                 "unsupported config schema_version");

  const auto trajectory_file =
      config_field<std::string>(cfg, "trajectory", {}, true);
  const auto input_files =
      config_field<std::vector<std::string>>(cfg, "input_views", {}, true);
  const auto depth_dir = config_field<std::string>(cfg, "depth_dir", {}, true);
  const auto matches_dir =
      config_field<std::string>(cfg, "matches_dir", {}, false);
  const bool synth = config_field<bool>(cfg, "synth_matches", false, false);
  const auto gt_depth_dir =
      config_field<std::string>(cfg, "gt_depth_dir", {}, false);
  const auto generator_spec =
      config_field<std::string>(cfg, "generator", {}, true);
  const auto gt_dir = config_field<std::string>(cfg, "gt_dir", {}, false);
  const auto output_dir =
      config_field<std::string>(cfg, "output_dir", {}, true);

  mvkit::Trajectory traj;
  traj.chunk = config_field<int>(cfg, "chunk", 15, false);
  traj.anchors = config_field<int>(cfg, "anchors", 3, false);
  const int synth_count = config_field<int>(cfg, "synth_count", 1024, false);

  mvkit::PipelineOptions opt;
  opt.seed = config_field<std::uint64_t>(cfg, "seed", g.seed, false);
  opt.threads = g.threads;
  opt.output_dir = output_dir;
  if (cfg.contains("lwlr")) {
    const json& sub = cfg.at("lwlr");
    opt.lwlr.bandwidth =
        config_field<double>(sub, "bandwidth", opt.lwlr.bandwidth, false);
    opt.lwlr.lambda = config_field<double>(sub, "lambda", opt.lwlr.lambda, false);
  }
  if (cfg.contains("align")) {
    const json& sub = cfg.at("align");
    opt.align.max_iterations = config_field<int>(
        sub, "max_iterations", opt.align.max_iterations, false);
    opt.align.outlier_residual_px = config_field<double>(
        sub, "outlier_px", opt.align.outlier_residual_px, false);
  }
  mvkit::require(!(synth && !matches_dir.empty()), mvkit::ErrorCode::ConfigError,
                 "config sets both /matches_dir and /synth_matches");
  mvkit::require(!synth || !gt_depth_dir.empty(), mvkit::ErrorCode::ConfigError,
                 "/synth_matches requires /gt_depth_dir");

  std::vector<mvkit::Image> inputs;
  std::vector<mvkit::Image> ground_truth;
  mvkit::detail::tagged("ingest", [&] {
    traj.cameras = mvkit::read_camera_json(trajectory_file);
    for (const std::string& f : input_files)
      inputs.push_back(mvkit::read_ppm(f));
    if (!gt_dir.empty())
      ground_truth = read_sequence(gt_dir, "view", "ppm", mvkit::read_ppm);
  });

  mvkit::DirectoryDepthSource depth(depth_dir);
  std::unique_ptr<mvkit::DirectoryDepthSource> gt_depth;
  std::unique_ptr<mvkit::MatchSource> matches;
  if (!matches_dir.empty()) {
    matches = std::make_unique<mvkit::DirectoryMatchSource>(matches_dir);
  } else if (synth) {
    gt_depth = std::make_unique<mvkit::DirectoryDepthSource>(gt_depth_dir);
    matches = std::make_unique<mvkit::SynthMatchSource>(*gt_depth, synth_count);
  }

  std::unique_ptr<mvkit::Generator> generator;
  if (generator_spec == "oracle") {
    mvkit::require(!ground_truth.empty(), mvkit::ErrorCode::ConfigError,
                   "generator \"oracle\" requires /gt_dir");
    generator = std::make_unique<mvkit::OracleGenerator>(ground_truth);
  } else if (generator_spec == "holefill") {
    generator = std::make_unique<mvkit::HoleFillGenerator>();
  } else if (generator_spec.rfind("exec:", 0) == 0) {
    generator = std::make_unique<mvkit::ExecGenerator>(
        generator_spec.substr(5), (fs::path(output_dir) / "exec").string());
  } else {
    mvkit::raise(mvkit::ErrorCode::ConfigError,
                 "config field /generator must be oracle, holefill or "
                 "exec:<command>");
  }

  const mvkit::RunResult result = mvkit::run_pipeline(
      traj, inputs, depth, matches.get(), *generator,
      ground_truth.empty() ? nullptr : &ground_truth, opt);
  std::cout << result.summary.dump(2) << "\n";
  return 0;
}

// --------------------------------------------------------------- metrics

struct MetricsOpts {
  std::string ref_file, test_file;
  bool want_psnr = false;
  bool want_ssim = false;
};

int run_metrics(const GlobalOpts&, const MetricsOpts& o) {
  mvkit::Image ref, test;
  mvkit::detail::tagged("ingest", [&] {
    ref = mvkit::read_ppm(o.ref_file);
    test = mvkit::read_ppm(o.test_file);
  });
  const bool both = !o.want_psnr && !o.want_ssim;
  mvkit::detail::tagged("metrics", [&] {
    if (o.want_psnr || both) std::printf("%.2f\n", mvkit::psnr(ref, test));
    if (o.want_ssim || both) std::printf("%.2f\n", mvkit::ssim(ref, test));
  });
  return 0;
}

void report_error(const mvkit::Error& e, bool json_errors) {
  if (json_errors) {
    json j;
    j["stage"] = e.stage().empty() ? "run" : e.stage();
    j["code"] = mvkit::error_name(e.code());
    j["message"] = e.message();
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "error: " << e.what() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multi-view warping, depth alignment and curation toolkit"};
  GlobalOpts g;
  app.add_option("--seed", g.seed, "RNG seed for all stochastic steps");
  app.add_option("--threads", g.threads, "worker threads for dense passes")
      ->check(CLI::PositiveNumber);
  app.add_flag("--json-errors", g.json_errors,
               "emit machine-readable errors on stderr");
  app.require_subcommand(1);

  CurateOpts curate;
  auto* c = app.add_subcommand("curate", "filter a clip for 3D-aware training");
  c->add_option("--frames-dir", curate.frames_dir, "directory of frame_NNN.ppm")
      ->required();
  c->add_option("--masks-dir", curate.masks_dir,
                "semantic masks mask_NNN.pgm, one per kept frame");
  c->add_option("--flows-dir", curate.flows_dir,
                "optical flow flow_NNN.flo, one per consecutive pair");
  c->add_option("--tracks", curate.tracks_file, "point tracks CSV");
  c->add_option("--out", curate.out_file, "report path (default: stdout)");
  c->add_option("--temporal-rate", curate.temporal_rate, "keep every k-th frame");
  c->add_option("--short-side", curate.short_side, "target short side");
  c->add_flag("--no-downsample", curate.no_downsample,
              "skip temporal/spatial downsampling");

  VcondOpts vcond;
  auto* v = app.add_subcommand("vcond", "build visual conditions for one timestep");
  v->add_option("--frames-dir", vcond.frames_dir, "directory of frame_NNN.ppm")
      ->required();
  v->add_option("--masks-dir", vcond.masks_dir,
                "hide masks mask_NNN.pgm (default: generated)");
  v->add_option("--refs", vcond.refs, "reference frame indices (default 0)");
  v->add_option("--t", vcond.t, "diffusion timestep")->required();
  v->add_option("--out-dir", vcond.out_dir, "output directory")->required();

  AlignOpts align;
  auto* a = app.add_subcommand("align", "align sparse keypoint depths to matches");
  a->add_option("--depth", align.depth_file, "source depth PFM")->required();
  a->add_option("--matches", align.matches_file, "matches CSV")->required();
  a->add_option("--cameras", align.cameras_file, "camera JSON")->required();
  a->add_option("--src", align.src, "source view index")->required();
  a->add_option("--out", align.out_file, "guidance JSON output")->required();
  a->add_option("--max-iterations", align.max_iterations, "descent iterations");
  a->add_option("--outlier-px", align.outlier_px, "keypoint residual cutoff");
  a->add_option("--max-matches", align.max_matches, "row cap for the CSV");

  LwlrOpts lwlr;
  auto* l = app.add_subcommand("lwlr", "dense depth recovery from guidance");
  l->add_option("--depth", lwlr.depth_file, "relative depth PFM")->required();
  l->add_option("--guidance", lwlr.guidance_file, "guidance JSON")->required();
  l->add_option("--out", lwlr.out_file, "recovered depth PFM")->required();
  l->add_option("--bandwidth", lwlr.bandwidth, "Gaussian kernel bandwidth");
  l->add_option("--lambda", lwlr.lambda, "ridge regularizer");
  l->add_option("--scale-map", lwlr.scale_map, "optional per-pixel scale PFM");
  l->add_option("--shift-map", lwlr.shift_map, "optional per-pixel shift PFM");

  WarpOpts2 warp;
  auto* w = app.add_subcommand("warp", "forward-warp a view to another camera");
  w->add_option("--image", warp.image_file, "source image PPM")->required();
  w->add_option("--depth", warp.depth_file, "source depth PFM")->required();
  w->add_option("--cameras", warp.cameras_file, "camera JSON")->required();
  w->add_option("--src", warp.src, "source view index")->required();
  w->add_option("--dst", warp.dst, "target view index")->required();
  w->add_option("--out", warp.out_file, "warped image PPM")->required();
  w->add_option("--mask-out", warp.mask_out, "coverage mask PGM");
  w->add_option("--depth-out", warp.depth_out, "warped depth PFM");
  w->add_flag("--splat2x2", warp.splat2x2, "splat into a 2x2 footprint");

  PipelineOpts pipeline;
  auto* p = app.add_subcommand("pipeline", "the full warp-and-generate loop");
  p->require_subcommand(1);
  auto* pr = p->add_subcommand("run", "execute a run described by a config");
  pr->add_option("--config", pipeline.config_file, "run config JSON")->required();

  MetricsOpts metrics;
  auto* m = app.add_subcommand("metrics", "compare two images");
  m->add_option("--ref", metrics.ref_file, "reference PPM")->required();
  m->add_option("--test", metrics.test_file, "image under test PPM")->required();
  m->add_flag("--psnr", metrics.want_psnr, "print PSNR in dB");
  m->add_flag("--ssim", metrics.want_ssim, "print mean SSIM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (app.got_subcommand(c)) return run_curate(g, curate);
    if (app.got_subcommand(v)) return run_vcond(g, vcond);
    if (app.got_subcommand(a)) return run_align(g, align);
    if (app.got_subcommand(l)) return run_lwlr(g, lwlr);
    if (app.got_subcommand(w)) return run_warp(g, warp);
    if (app.got_subcommand(p)) return run_pipeline_cmd(g, pipeline);
    if (app.got_subcommand(m)) return run_metrics(g, metrics);
  } catch (const mvkit::Error& e) {
    report_error(e, g.json_errors);
    return 1;
  } catch (const std::exception& e) {
    if (g.json_errors) {
      json j;
      j["stage"] = "run";
      j["code"] = "Internal";
      j["message"] = e.what();
      std::cerr << j.dump() << "\n";
    } else {
      std::cerr << "error: " << e.what() << "\n";
    }
    return 1;
  }
  return 2;  // unreachable with require_subcommand(1)
}
