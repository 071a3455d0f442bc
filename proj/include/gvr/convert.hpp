#pragma once

#include "gvr/types.hpp"

#include <array>

namespace gvr {

struct TriangleMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    std::vector<VecX> colors;  // optional, per vertex

    void validate() const;
};

struct PointCloud {
    std::vector<Vec3> points;
    std::vector<VecX> colors;  // optional, per point
};

struct ConvertConfig {
    double zeta = 0.5;         // coverage rate, in (0, 1)
    double flatten_rate = 1.0; // variance scale along the vertex normal, (0, 1]
    int neighbors = 3;         // m nearest points (point clouds)

    void validate() const;
};

// Undirected unique vertex adjacency, used by the shape regularizers.
std::vector<std::pair<int, int>> mesh_edges(const TriangleMesh& mesh);

// Area-weighted vertex normals.
std::vector<Vec3> vertex_normals(const TriangleMesh& mesh);

// One kernel per vertex. Isotropic variance sigma = hl^2 / (4 log(1/zeta))
// from the mean connected-edge length hl, then the axis along the vertex
// normal scaled by flatten_rate.
GaussianScene mesh_to_gaussians(const TriangleMesh& mesh, const ConvertConfig& cfg);

// One isotropic kernel per point with d_k the mean distance to the m nearest
// neighbors and sigma = (d_k/2)^2 / log(1/zeta).
GaussianScene pointcloud_to_gaussians(const PointCloud& cloud, const ConvertConfig& cfg);

}  // namespace gvr
