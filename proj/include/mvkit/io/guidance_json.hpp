#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "mvkit/depth_align.hpp"
#include "mvkit/errors.hpp"

namespace mvkit {

// Sparse guidance schema:
//   {"schema_version": 1,
//    "points": [{"u","v","d_star","alpha","beta","residual_px"}, ...]}
inline void write_guidance_json(const std::string& path,
                                const SparseGuidance& guidance) {
  nlohmann::json points = nlohmann::json::array();
  for (const GuidancePoint& g : guidance)
    points.push_back({{"u", g.u},
                      {"v", g.v},
                      {"d_star", g.d_star},
                      {"alpha", g.alpha},
                      {"beta", g.beta},
                      {"residual_px", g.residual_px}});
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  out << nlohmann::json{{"schema_version", 1}, {"points", std::move(points)}}
             .dump(2)
      << "\n";
  require(out.good(), ErrorCode::IoError, "short write to " + path);
}

inline SparseGuidance read_guidance_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::SchemaError, path + ": invalid JSON: " + e.what());
  }
  require(root.is_object() && root.contains("points") &&
              root["points"].is_array(),
          ErrorCode::SchemaError, "/points: expected an array");

  SparseGuidance guidance;
  for (std::size_t i = 0; i < root["points"].size(); ++i) {
    const auto& p = root["points"][i];
    const std::string ptr = "/points/" + std::to_string(i);
    GuidancePoint g;
    auto field = [&](const char* key) {
      require(p.is_object() && p.contains(key) && p[key].is_number(),
              ErrorCode::SchemaError, ptr + "/" + key + ": expected a number");
      return p[key].get<double>();
    };
    g.u = field("u");
    g.v = field("v");
    g.d_star = field("d_star");
    g.alpha = field("alpha");
    g.beta = field("beta");
    g.residual_px = field("residual_px");
    require(g.d_star > 0, ErrorCode::SchemaError,
            ptr + "/d_star: must be positive");
    require(g.residual_px >= 0, ErrorCode::SchemaError,
            ptr + "/residual_px: must be non-negative");
    guidance.push_back(g);
  }
  return guidance;
}

}  // namespace mvkit
