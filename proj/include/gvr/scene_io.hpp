#pragma once

#include "gvr/convert.hpp"
#include "gvr/sampler.hpp"

#include <filesystem>

namespace gvr {

// JSON scene file:
//   {"version":1, "tau":float, "kernels":[{"center":[3], "inv_cov":[9 row-major], "attr":[D]}]}
GaussianScene load_scene_json(const std::filesystem::path& path);
void save_scene_json(const GaussianScene& scene, const std::filesystem::path& path);

// JSON camera file:
//   {"version":1, "R":[9 row-major], "T":[3], "F":f, "Ox":f, "Oy":f, "H":i, "W":i}
Camera load_camera_json(const std::filesystem::path& path);
void save_camera_json(const Camera& camera, const std::filesystem::path& path);

// Sampled attributes:
//   {"version":1, "attrs":[[D]...], "support":[K], "masked":[bool...]}
SampledAttributes load_attrs_json(const std::filesystem::path& path);
void save_attrs_json(const SampledAttributes& attrs, const std::filesystem::path& path);

// Wavefront OBJ: v/f lines, optional per-vertex colors as "v x y z r g b".
TriangleMesh load_obj(const std::filesystem::path& path);

// PLY point cloud, ascii or binary_little_endian, x,y,z and optional
// red,green,blue.
PointCloud load_ply(const std::filesystem::path& path);

// Writes content to a temp file in the target directory, then renames.
void atomic_write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace gvr
