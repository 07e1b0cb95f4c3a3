// End-to-end coverage of the command-line binary: exit codes, file formats
// on the wire, JSON error envelopes, and determinism across invocations.
// Fixtures are produced with the library itself; the subprocess boundary is
// what is under test.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "mvkit/mvkit.hpp"

using namespace mvkit;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "mvkit_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct CmdResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CmdResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / "mvkit_cli_tests" / "capture";
  fs::create_directories(dir);
  const fs::path out = dir / ("out_" + std::to_string(counter) + ".txt");
  const fs::path err = dir / ("err_" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string cmd = std::string(MVKIT_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CmdResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Frame whose channel values are multiples of 1/255, so PPM IO is exact.
Image quantized_frame(int h, int w, int variant) {
  Image img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(y, x, 0) = float((x * 7 + variant * 13) % 256) / 255.0f;
      img.at(y, x, 1) = float((y * 11 + variant * 5) % 256) / 255.0f;
      img.at(y, x, 2) = float((x + y + variant) % 256) / 255.0f;
    }
  return img;
}

DepthMap ramp_depth(int h, int w) {
  DepthMap d(h, w);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      d.set(y, x, 2.0f + 0.01f * x + 0.005f * y);
  return d;
}

std::vector<Camera> lateral_cameras(int n, int h, int w) {
  std::vector<Camera> cams;
  for (int i = 0; i < n; ++i) {
    Camera c = Camera::from_intrinsics(40, 40, w / 2.0, h / 2.0);
    c.T(0, 3) = -0.08 * i;
    cams.push_back(c);
  }
  return cams;
}

}  // namespace

TEST(Cli, NoArgumentsIsUsageError) {
  const CmdResult r = run_cli("");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, HelpExitsZero) {
  const CmdResult r = run_cli("--help");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_NE(r.out.find("curate"), std::string::npos);
  EXPECT_NE(r.out.find("pipeline"), std::string::npos);
}

TEST(Cli, UnknownCommandAndFlagAreUsageErrors) {
  EXPECT_EQ(run_cli("frobnicate").exit_code, 2);
  EXPECT_EQ(run_cli("metrics --bogus").exit_code, 2);
  EXPECT_EQ(run_cli("--threads 0 metrics --ref a --test b").exit_code, 2);
}

TEST(Cli, MetricsIdenticalImagesHitTheCaps) {
  const fs::path dir = fresh_dir("metrics");
  const Image img = quantized_frame(16, 16, 0);
  write_ppm((dir / "a.ppm").string(), img);

  CmdResult r = run_cli("metrics --ref " + (dir / "a.ppm").string() +
                        " --test " + (dir / "a.ppm").string() + " --psnr");
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "99.00\n");

  r = run_cli("metrics --ref " + (dir / "a.ppm").string() + " --test " +
              (dir / "a.ppm").string());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "99.00\n1.00\n");  // both metrics when no flag given
}

TEST(Cli, MetricsMatchesLibraryFormatting) {
  const fs::path dir = fresh_dir("metrics2");
  const Image a = quantized_frame(16, 16, 1);
  const Image b = quantized_frame(16, 16, 2);
  write_ppm((dir / "a.ppm").string(), a);
  write_ppm((dir / "b.ppm").string(), b);
  char expect[32];
  std::snprintf(expect, sizeof expect, "%.2f\n", psnr(a, b));
  const CmdResult r = run_cli("metrics --psnr --ref " +
                              (dir / "a.ppm").string() + " --test " +
                              (dir / "b.ppm").string());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, expect);
}

TEST(Cli, JsonErrorEnvelopeCarriesStageAndCode) {
  const CmdResult r =
      run_cli("--json-errors curate --frames-dir /nonexistent_mvkit_dir");
  EXPECT_EQ(r.exit_code, 1);
  const json j = json::parse(r.err);
  EXPECT_EQ(j.at("stage"), "ingest");
  EXPECT_EQ(j.at("code"), "IoError");
  EXPECT_NE(std::string(j.at("message")).find("/nonexistent_mvkit_dir"),
            std::string::npos);
}

TEST(Cli, PlainErrorsGoToStderrWithPrefix) {
  const CmdResult r = run_cli("curate --frames-dir /nonexistent_mvkit_dir");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(r.err.rfind("error: ", 0), 0u);
}

TEST(Cli, CurateReportOnStdout) {
  const fs::path dir = fresh_dir("curate");
  fs::create_directories(dir / "frames");
  for (int i = 0; i < 3; ++i)
    write_ppm((dir / "frames" / ("frame_00" + std::to_string(i) + ".ppm")).string(),
              quantized_frame(32, 48, i));
  const CmdResult r = run_cli("curate --frames-dir " +
                              (dir / "frames").string() +
                              " --temporal-rate 1 --short-side 32");
  EXPECT_EQ(r.exit_code, 0);
  const json j = json::parse(r.out);
  EXPECT_TRUE(bool(j.at("accepted")));
  EXPECT_EQ(int(j.at("frames_kept")), 3);
  EXPECT_EQ(int(j.at("width")), 48);
  EXPECT_FALSE(bool(j.at("semantic").at("ran")));
}

TEST(Cli, WarpIdentityRoundTripsTheImage) {
  const fs::path dir = fresh_dir("warp");
  const Image img = quantized_frame(24, 32, 3);
  write_ppm((dir / "image.ppm").string(), img);
  write_depth_pfm((dir / "depth.pfm").string(), ramp_depth(24, 32));
  write_camera_json((dir / "cameras.json").string(), lateral_cameras(2, 24, 32));

  const CmdResult r = run_cli(
      "warp --image " + (dir / "image.ppm").string() + " --depth " +
      (dir / "depth.pfm").string() + " --cameras " +
      (dir / "cameras.json").string() + " --src 0 --dst 0 --out " +
      (dir / "out.ppm").string() + " --mask-out " + (dir / "mask.pgm").string());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.out, "coverage 1.000000\n");
  EXPECT_EQ(slurp(dir / "out.ppm"), slurp(dir / "image.ppm"));
  const Mask mask = read_pgm_mask((dir / "mask.pgm").string());
  EXPECT_DOUBLE_EQ(mask_fraction(mask), 1.0);
}

TEST(Cli, VcondWritesRastersMasksAndSidecar) {
  const fs::path dir = fresh_dir("vcond");
  fs::create_directories(dir / "frames");
  for (int i = 0; i < 3; ++i)
    write_ppm((dir / "frames" / ("frame_00" + std::to_string(i) + ".ppm")).string(),
              quantized_frame(32, 32, i));

  const std::string cmd = "--seed 7 vcond --frames-dir " +
                          (dir / "frames").string() + " --t 650 --out-dir ";
  const CmdResult r = run_cli(cmd + (dir / "out").string());
  EXPECT_EQ(r.exit_code, 0);

  const json sidecar = json::parse(slurp(dir / "out" / "condition.json"));
  EXPECT_EQ(int(sidecar.at("schema_version")), 1);
  EXPECT_EQ(int(sidecar.at("t")), 650);
  EXPECT_EQ(int(sidecar.at("t_prime")), 130);
  EXPECT_NEAR(double(sidecar.at("w_t")), 0.9, 1e-12);
  EXPECT_EQ(int(sidecar.at("frames")), 3);

  // Reference frame passes through clean with an all-false mask.
  const Image frame0 = read_ppm((dir / "frames" / "frame_000.ppm").string());
  const Grid<float> cond0 = read_pfm((dir / "out" / "cond_000.pfm").string());
  ASSERT_TRUE(cond0.same_shape(frame0));
  EXPECT_EQ(cond0, frame0);
  EXPECT_DOUBLE_EQ(
      mask_fraction(read_pgm_mask((dir / "out" / "mask_000.pgm").string())),
      0.0);
  // Targets carry irregular masks inside the required density band.
  const double f1 =
      mask_fraction(read_pgm_mask((dir / "out" / "mask_001.pgm").string()));
  EXPECT_GE(f1, 0.1);
  EXPECT_LE(f1, 0.6);

  // Same seed, same bytes.
  EXPECT_EQ(run_cli(cmd + (dir / "out2").string()).exit_code, 0);
  EXPECT_EQ(slurp(dir / "out" / "cond_001.pfm"),
            slurp(dir / "out2" / "cond_001.pfm"));
  EXPECT_EQ(slurp(dir / "out" / "mask_002.pgm"),
            slurp(dir / "out2" / "mask_002.pgm"));
}

TEST(Cli, AlignThenLwlrRecoversDepthThroughFiles) {
  const fs::path dir = fresh_dir("alignlwlr");
  const int h = 48, w = 48;
  const DepthMap depth = ramp_depth(h, w);
  const std::vector<Camera> cams = lateral_cameras(3, h, w);
  write_depth_pfm((dir / "depth.pfm").string(), depth);
  write_camera_json((dir / "cameras.json").string(), cams);
  const MatchSet matches = synth_matches(depth, cams[0], cams, {1, 2}, 64, 21);
  write_matches_csv((dir / "matches.csv").string(), matches);

  // Sampled pixels whose anchors all fall outside the frame yield no
  // matches, so the keypoint count comes from the match set itself.
  std::vector<Eigen::Vector2d> pixels;
  for (const Match& m : matches) {
    bool known = false;
    for (const Eigen::Vector2d& p : pixels) known = known || p == m.src_px;
    if (!known) pixels.push_back(m.src_px);
  }

  const CmdResult ar = run_cli(
      "align --depth " + (dir / "depth.pfm").string() + " --matches " +
      (dir / "matches.csv").string() + " --cameras " +
      (dir / "cameras.json").string() + " --src 0 --out " +
      (dir / "guidance.json").string());
  EXPECT_EQ(ar.exit_code, 0);
  EXPECT_EQ(ar.out, std::to_string(pixels.size()) + " guidance points\n");

  const CmdResult lr = run_cli(
      "lwlr --depth " + (dir / "depth.pfm").string() + " --guidance " +
      (dir / "guidance.json").string() + " --lambda 1e-8 --out " +
      (dir / "recovered.pfm").string() + " --scale-map " +
      (dir / "scale.pfm").string());
  EXPECT_EQ(lr.exit_code, 0);

  // Guidance comes from already-consistent depth, so recovery is near
  // identity and every scale sits near 1.
  const DepthMap rec = read_depth_pfm((dir / "recovered.pfm").string());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      ASSERT_NEAR(rec.at(y, x), depth.at(y, x), 1e-3);
  const Grid<float> scale = read_pfm((dir / "scale.pfm").string());
  EXPECT_NEAR(scale.at(h / 2, w / 2), 1.0f, 1e-2);
}

namespace {

// Shared fixture for the pipeline configs: cameras, one input frame,
// per-view depth, and full ground truth frames.
fs::path pipeline_fixture(const std::string& name, int views) {
  const fs::path dir = fresh_dir(name);
  const int h = 24, w = 32;
  write_camera_json((dir / "cameras.json").string(),
                    lateral_cameras(views, h, w));
  fs::create_directories(dir / "depth");
  fs::create_directories(dir / "gt");
  for (int i = 0; i < views; ++i) {
    char depth_name[32], view_name[32];
    std::snprintf(depth_name, sizeof depth_name, "depth_%03d.pfm", i);
    std::snprintf(view_name, sizeof view_name, "view_%03d.ppm", i);
    write_depth_pfm((dir / "depth" / depth_name).string(), ramp_depth(h, w));
    write_ppm((dir / "gt" / view_name).string(), quantized_frame(h, w, i));
  }
  return dir;
}

}  // namespace

TEST(Cli, PipelineRunWithHoleFillGenerator) {
  const fs::path dir = pipeline_fixture("pipe_holefill", 5);
  json cfg;
  cfg["schema_version"] = 1;
  cfg["trajectory"] = (dir / "cameras.json").string();
  cfg["input_views"] = {(dir / "gt" / "view_000.ppm").string()};
  cfg["depth_dir"] = (dir / "depth").string();
  cfg["generator"] = "holefill";
  cfg["output_dir"] = (dir / "run").string();
  cfg["chunk"] = 3;
  cfg["anchors"] = 2;
  std::ofstream(dir / "cfg.json") << cfg.dump(2);

  const CmdResult r =
      run_cli("pipeline run --config " + (dir / "cfg.json").string());
  EXPECT_EQ(r.exit_code, 0);
  const json summary = json::parse(r.out);
  EXPECT_EQ(int(summary.at("views")), 5);
  EXPECT_EQ(int(summary.at("iterations")), 2);
  EXPECT_TRUE(fs::exists(dir / "run" / "images" / "view_004.ppm"));
  EXPECT_TRUE(fs::exists(dir / "run" / "summary.json"));
  EXPECT_EQ(json::parse(slurp(dir / "run" / "summary.json")), summary);
}

TEST(Cli, PipelineRunOracleWithSynthMatchesScoresPerfect) {
  const fs::path dir = pipeline_fixture("pipe_oracle", 5);
  json cfg;
  cfg["schema_version"] = 1;
  cfg["trajectory"] = (dir / "cameras.json").string();
  cfg["input_views"] = {(dir / "gt" / "view_000.ppm").string()};
  cfg["depth_dir"] = (dir / "depth").string();
  cfg["synth_matches"] = true;
  cfg["gt_depth_dir"] = (dir / "depth").string();
  cfg["synth_count"] = 16;
  cfg["generator"] = "oracle";
  cfg["gt_dir"] = (dir / "gt").string();
  cfg["output_dir"] = (dir / "run").string();
  cfg["chunk"] = 3;
  cfg["anchors"] = 2;
  cfg["seed"] = 5;
  std::ofstream(dir / "cfg.json") << cfg.dump(2);

  const CmdResult r =
      run_cli("pipeline run --config " + (dir / "cfg.json").string());
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const json summary = json::parse(r.out);
  ASSERT_EQ(summary.at("psnr").size(), 5u);
  for (const auto& p : summary.at("psnr")) EXPECT_EQ(double(p), 99.0);
}

TEST(Cli, PipelineConfigErrorsNameTheField) {
  const fs::path dir = pipeline_fixture("pipe_badcfg", 3);

  json cfg;
  cfg["trajectory"] = (dir / "cameras.json").string();
  cfg["input_views"] = {(dir / "gt" / "view_000.ppm").string()};
  cfg["generator"] = "holefill";
  cfg["output_dir"] = (dir / "run").string();
  // depth_dir missing
  std::ofstream(dir / "missing.json") << cfg.dump(2);
  CmdResult r = run_cli("--json-errors pipeline run --config " +
                        (dir / "missing.json").string());
  EXPECT_EQ(r.exit_code, 1);
  json err = json::parse(r.err);
  EXPECT_EQ(err.at("code"), "ConfigError");
  EXPECT_NE(std::string(err.at("message")).find("/depth_dir"),
            std::string::npos);

  cfg["depth_dir"] = (dir / "depth").string();
  cfg["generator"] = "wishful";
  std::ofstream(dir / "badgen.json") << cfg.dump(2);
  r = run_cli("--json-errors pipeline run --config " +
              (dir / "badgen.json").string());
  EXPECT_EQ(r.exit_code, 1);
  err = json::parse(r.err);
  EXPECT_EQ(err.at("code"), "ConfigError");
  EXPECT_NE(std::string(err.at("message")).find("generator"),
            std::string::npos);

  cfg["generator"] = "holefill";
  cfg["matches_dir"] = (dir / "depth").string();
  cfg["synth_matches"] = true;
  std::ofstream(dir / "both.json") << cfg.dump(2);
  r = run_cli("--json-errors pipeline run --config " +
              (dir / "both.json").string());
  EXPECT_EQ(r.exit_code, 1);
  err = json::parse(r.err);
  EXPECT_EQ(err.at("code"), "ConfigError");

  std::ofstream(dir / "notjson.json") << "{nope";
  r = run_cli("--json-errors pipeline run --config " +
              (dir / "notjson.json").string());
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(json::parse(r.err).at("code"), "ConfigError");
}

TEST(Cli, PipelineRunIsByteDeterministic) {
  const fs::path dir = pipeline_fixture("pipe_det", 5);
  for (const char* run : {"run_a", "run_b"}) {
    json cfg;
    cfg["trajectory"] = (dir / "cameras.json").string();
    cfg["input_views"] = {(dir / "gt" / "view_000.ppm").string()};
    cfg["depth_dir"] = (dir / "depth").string();
    cfg["synth_matches"] = true;
    cfg["gt_depth_dir"] = (dir / "depth").string();
    cfg["synth_count"] = 16;
    cfg["generator"] = "holefill";
    cfg["output_dir"] = (dir / run).string();
    cfg["chunk"] = 2;
    cfg["anchors"] = 2;
    cfg["seed"] = 33;
    const fs::path cfg_path = dir / (std::string(run) + ".json");
    std::ofstream(cfg_path) << cfg.dump(2);
    ASSERT_EQ(run_cli("pipeline run --config " + cfg_path.string()).exit_code, 0);
  }
  EXPECT_EQ(slurp(dir / "run_a" / "summary.json"),
            slurp(dir / "run_b" / "summary.json"));
  EXPECT_EQ(slurp(dir / "run_a" / "images" / "view_003.ppm"),
            slurp(dir / "run_b" / "images" / "view_003.ppm"));
  EXPECT_EQ(slurp(dir / "run_a" / "depth" / "depth_002.pfm"),
            slurp(dir / "run_b" / "depth" / "depth_002.pfm"));
}
