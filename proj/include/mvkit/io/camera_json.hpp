#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mvkit/camera.hpp"
#include "mvkit/errors.hpp"

namespace mvkit {

// Camera list schema:
//   {"views": [{"K": [9 row-major floats], "T": [16 row-major floats]}]}
// T maps world to camera coordinates. Camera invariants are enforced on
// read; schema violations report a JSON pointer.
inline std::vector<Camera> read_camera_json(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::IoError, "cannot open " + path);
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    raise(ErrorCode::SchemaError, path + ": invalid JSON: " + e.what());
  }

  require(root.is_object(), ErrorCode::SchemaError, "/: expected an object");
  require(root.contains("views") && root["views"].is_array(),
          ErrorCode::SchemaError, "/views: expected an array");

  std::vector<Camera> cameras;
  for (std::size_t i = 0; i < root["views"].size(); ++i) {
    const std::string ptr = "/views/" + std::to_string(i);
    const auto& view = root["views"][i];
    require(view.is_object(), ErrorCode::SchemaError, ptr + ": expected an object");

    auto read_matrix = [&](const char* key, std::size_t count, double* out) {
      const std::string field = ptr + "/" + key;
      require(view.contains(key), ErrorCode::SchemaError, field);
      const auto& arr = view[key];
      require(arr.is_array() && arr.size() == count, ErrorCode::SchemaError,
              field + ": expected " + std::to_string(count) + " numbers");
      for (std::size_t k = 0; k < count; ++k) {
        require(arr[k].is_number(), ErrorCode::SchemaError,
                field + "/" + std::to_string(k) + ": expected a number");
        out[k] = arr[k].get<double>();
      }
    };

    double kbuf[9], tbuf[16];
    read_matrix("K", 9, kbuf);
    read_matrix("T", 16, tbuf);

    Camera cam;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) cam.K(r, c) = kbuf[3 * r + c];
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) cam.T(r, c) = tbuf[4 * r + c];

    try {
      cam.validate();
    } catch (const Error& e) {
      throw Error(e.code(), e.message() + " at " + ptr);
    }
    cameras.push_back(cam);
  }
  return cameras;
}

inline void write_camera_json(const std::string& path,
                              const std::vector<Camera>& cameras) {
  nlohmann::json views = nlohmann::json::array();
  for (const Camera& cam : cameras) {
    nlohmann::json k = nlohmann::json::array();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) k.push_back(cam.K(r, c));
    nlohmann::json t = nlohmann::json::array();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) t.push_back(cam.T(r, c));
    views.push_back({{"K", std::move(k)}, {"T", std::move(t)}});
  }
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), ErrorCode::IoError, "cannot open " + path + " for writing");
  out << nlohmann::json{{"views", std::move(views)}}.dump(2) << "\n";
  require(out.good(), ErrorCode::IoError, "short write to " + path);
}

}  // namespace mvkit
