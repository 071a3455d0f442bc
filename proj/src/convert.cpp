#include "gvr/convert.hpp"

#include "gvr/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace gvr {

void TriangleMesh::validate() const {
    const int n = static_cast<int>(vertices.size());
    for (size_t f = 0; f < faces.size(); ++f) {
        for (int c : faces[f]) {
            if (c < 0 || c >= n) {
                throw ValidationError("mesh face " + std::to_string(f) + " references vertex " +
                                      std::to_string(c) + " out of range");
            }
        }
    }
    if (!colors.empty() && colors.size() != vertices.size()) {
        throw ValidationError("mesh colors must match vertex count");
    }
}

void ConvertConfig::validate() const {
    if (!(zeta > 0.0 && zeta < 1.0)) {
        throw ValidationError("zeta must be strictly inside (0, 1)");
    }
    if (!(flatten_rate > 0.0 && flatten_rate <= 1.0)) {
        throw ValidationError("flatten_rate must be in (0, 1]");
    }
    if (neighbors < 1) {
        throw ValidationError("neighbors must be >= 1");
    }
}

std::vector<std::pair<int, int>> mesh_edges(const TriangleMesh& mesh) {
    std::set<std::pair<int, int>> unique;
    for (const auto& f : mesh.faces) {
        for (int e = 0; e < 3; ++e) {
            int a = f[e];
            int b = f[(e + 1) % 3];
            if (a == b) continue;  // degenerate edge
            if (a > b) std::swap(a, b);
            unique.insert({a, b});
        }
    }
    return {unique.begin(), unique.end()};
}

std::vector<Vec3> vertex_normals(const TriangleMesh& mesh) {
    std::vector<Vec3> normals(mesh.vertices.size(), Vec3::Zero());
    for (const auto& f : mesh.faces) {
        const Vec3 a = mesh.vertices[f[1]] - mesh.vertices[f[0]];
        const Vec3 b = mesh.vertices[f[2]] - mesh.vertices[f[0]];
        const Vec3 weighted = a.cross(b);  // 2x face area times unit normal
        for (int c : f) normals[c] += weighted;
    }
    for (auto& n : normals) {
        const double len = n.norm();
        if (len > 1e-14) n /= len;
    }
    return normals;
}

namespace {

VecX default_attr() {
    VecX gray(3);
    gray << 0.5, 0.5, 0.5;
    return gray;
}

// Orthonormal frame whose third column is n.
Mat3 frame_from_normal(const Vec3& n) {
    Vec3 up = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
    const Vec3 t0 = up.cross(n).normalized();
    const Vec3 t1 = n.cross(t0);
    Mat3 frame;
    frame.col(0) = t0;
    frame.col(1) = t1;
    frame.col(2) = n;
    return frame;
}

}  // namespace

GaussianScene mesh_to_gaussians(const TriangleMesh& mesh, const ConvertConfig& cfg) {
    cfg.validate();
    mesh.validate();

    const int n = static_cast<int>(mesh.vertices.size());
    std::vector<double> edge_sum(n, 0.0);
    std::vector<int> edge_count(n, 0);
    for (const auto& [a, b] : mesh_edges(mesh)) {
        const double len = (mesh.vertices[a] - mesh.vertices[b]).norm();
        edge_sum[a] += len;
        edge_sum[b] += len;
        ++edge_count[a];
        ++edge_count[b];
    }

    const std::vector<Vec3> normals = vertex_normals(mesh);
    const double log_inv_zeta = std::log(1.0 / cfg.zeta);

    GaussianScene scene;
    scene.kernels.reserve(n);
    for (int k = 0; k < n; ++k) {
        if (edge_count[k] == 0) {
            throw ValidationError("vertex " + std::to_string(k) + " has no connected edges");
        }
        const double mean_edge = edge_sum[k] / edge_count[k];
        const double sigma = mean_edge * mean_edge / (4.0 * log_inv_zeta);

        GaussianKernel kernel;
        kernel.center = mesh.vertices[k];
        if (cfg.flatten_rate == 1.0 || normals[k].norm() < 0.5) {
            kernel.inv_cov = Mat3::Identity() / sigma;
        } else {
            const Mat3 frame = frame_from_normal(normals[k]);
            const Vec3 inv_var(1.0 / sigma, 1.0 / sigma, 1.0 / (sigma * cfg.flatten_rate));
            kernel.inv_cov = frame * inv_var.asDiagonal() * frame.transpose();
        }
        kernel.attr = mesh.colors.empty() ? default_attr() : mesh.colors[k];
        scene.kernels.push_back(std::move(kernel));
    }
    return scene;
}

GaussianScene pointcloud_to_gaussians(const PointCloud& cloud, const ConvertConfig& cfg) {
    cfg.validate();
    const int n = static_cast<int>(cloud.points.size());
    if (n <= cfg.neighbors) {
        throw ValidationError("point cloud needs more points than requested neighbors");
    }
    if (!cloud.colors.empty() && cloud.colors.size() != cloud.points.size()) {
        throw ValidationError("point cloud colors must match point count");
    }

    std::vector<double> mean_dist(n, 0.0);
    parallel_for_partitions(n, resolve_threads(0), [&](int, int begin, int end) {
        std::vector<double> d2(n);
        for (int i = begin; i < end; ++i) {
            for (int j = 0; j < n; ++j) {
                d2[j] = (cloud.points[i] - cloud.points[j]).squaredNorm();
            }
            d2[i] = std::numeric_limits<double>::infinity();  // exclude self
            std::partial_sort(d2.begin(), d2.begin() + cfg.neighbors, d2.end());
            double sum = 0.0;
            for (int m = 0; m < cfg.neighbors; ++m) sum += std::sqrt(d2[m]);
            mean_dist[i] = sum / cfg.neighbors;
        }
    });

    std::string offenders;
    for (int i = 0; i < n; ++i) {
        if (mean_dist[i] == 0.0) {
            offenders += (offenders.empty() ? "" : ", ") + std::to_string(i);
        }
    }
    if (!offenders.empty()) {
        throw ValidationError("duplicate points give zero neighbor distance at indices: " + offenders);
    }

    const double log_inv_zeta = std::log(1.0 / cfg.zeta);
    GaussianScene scene;
    scene.kernels.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double half = mean_dist[i] / 2.0;
        const double sigma = half * half / log_inv_zeta;
        GaussianKernel kernel;
        kernel.center = cloud.points[i];
        kernel.inv_cov = Mat3::Identity() / sigma;
        kernel.attr = cloud.colors.empty() ? default_attr() : cloud.colors[i];
        scene.kernels.push_back(std::move(kernel));
    }
    return scene;
}

}  // namespace gvr
