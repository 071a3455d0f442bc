#include "gvr/shapes.hpp"

#include <cmath>
#include <map>

namespace gvr {

TriangleMesh make_icosphere(int level, double radius, const Vec3& center) {
    if (level < 0) {
        throw ValidationError("icosphere level must be >= 0");
    }
    const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
    TriangleMesh mesh;
    mesh.vertices = {
        {-1, phi, 0}, {1, phi, 0}, {-1, -phi, 0}, {1, -phi, 0},
        {0, -1, phi}, {0, 1, phi}, {0, -1, -phi}, {0, 1, -phi},
        {phi, 0, -1}, {phi, 0, 1}, {-phi, 0, -1}, {-phi, 0, 1},
    };
    mesh.faces = {
        {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
        {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
        {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
    };

    for (int l = 0; l < level; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int a, int b) {
            auto key = std::minmax(a, b);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            const int idx = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
            midpoint[key] = idx;
            return idx;
        };
        std::vector<std::array<int, 3>> faces;
        faces.reserve(mesh.faces.size() * 4);
        for (const auto& f : mesh.faces) {
            const int ab = mid(f[0], f[1]);
            const int bc = mid(f[1], f[2]);
            const int ca = mid(f[2], f[0]);
            faces.push_back({f[0], ab, ca});
            faces.push_back({f[1], bc, ab});
            faces.push_back({f[2], ca, bc});
            faces.push_back({ab, bc, ca});
        }
        mesh.faces = std::move(faces);
    }

    for (auto& v : mesh.vertices) {
        v = center + radius * v.normalized();
    }
    return mesh;
}

TriangleMesh make_box_mesh(const Vec3& size, int divisions, const Vec3& center) {
    if (divisions < 1) {
        throw ValidationError("box divisions must be >= 1");
    }
    const int n = divisions;
    TriangleMesh mesh;
    std::map<std::array<int, 3>, int> index;
    auto vertex = [&](int i, int j, int k) {
        const std::array<int, 3> key{i, j, k};
        auto it = index.find(key);
        if (it != index.end()) return it->second;
        const int idx = static_cast<int>(mesh.vertices.size());
        mesh.vertices.push_back(center + Vec3((double(i) / n - 0.5) * size.x(),
                                              (double(j) / n - 0.5) * size.y(),
                                              (double(k) / n - 0.5) * size.z()));
        index[key] = idx;
        return idx;
    };

    // One pair of faces per axis; winding keeps normals outward.
    for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3;
        const int v = (axis + 2) % 3;
        for (int side = 0; side <= 1; ++side) {
            for (int p = 0; p < n; ++p) {
                for (int q = 0; q < n; ++q) {
                    std::array<int, 3> c{};
                    auto corner = [&](int du, int dv) {
                        c[axis] = side * n;
                        c[u] = p + du;
                        c[v] = q + dv;
                        return vertex(c[0], c[1], c[2]);
                    };
                    const int v00 = corner(0, 0);
                    const int v10 = corner(1, 0);
                    const int v11 = corner(1, 1);
                    const int v01 = corner(0, 1);
                    if (side == 1) {
                        mesh.faces.push_back({v00, v10, v11});
                        mesh.faces.push_back({v00, v11, v01});
                    } else {
                        mesh.faces.push_back({v00, v11, v10});
                        mesh.faces.push_back({v00, v01, v11});
                    }
                }
            }
        }
    }
    return mesh;
}

GaussianScene make_cuboid_scene(const Vec3& size, int min_kernels, const ConvertConfig& cfg,
                                const Vec3& color, const Vec3& center) {
    // Welded box grids have 6*div^2 + 2 vertices.
    int div = 1;
    while (6 * div * div + 2 < min_kernels) ++div;
    TriangleMesh mesh = make_box_mesh(size, div, center);
    mesh.colors.assign(mesh.vertices.size(), (VecX(3) << color.x(), color.y(), color.z()).finished());
    return mesh_to_gaussians(mesh, cfg);
}

Camera make_orbit_camera(double azimuth, double elevation, double distance, const Vec3& target,
                         int height, int width, double focal) {
    const Vec3 offset(distance * std::cos(elevation) * std::sin(azimuth),
                      distance * std::sin(elevation),
                      -distance * std::cos(elevation) * std::cos(azimuth));
    const Vec3 eye = target + offset;
    const Vec3 forward = (target - eye).normalized();
    Vec3 up = Vec3::UnitY();
    if (std::abs(forward.dot(up)) > 0.999) up = Vec3::UnitZ();
    const Vec3 right = up.cross(forward).normalized();
    const Vec3 down = right.cross(forward);

    Camera cam;
    cam.rotation.row(0) = down;
    cam.rotation.row(1) = right;
    cam.rotation.row(2) = forward;
    cam.translation = -cam.rotation * eye;
    cam.height = height;
    cam.width = width;
    cam.focal = focal;
    cam.oy = (height - 1) / 2.0;
    cam.ox = (width - 1) / 2.0;
    return cam;
}

}  // namespace gvr
