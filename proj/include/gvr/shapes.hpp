#pragma once

#include "gvr/convert.hpp"

namespace gvr {

// Icosahedron subdivided `level` times and projected to a sphere.
// Vertex counts by level: 12, 42, 162, 642, 2562.
TriangleMesh make_icosphere(int level, double radius = 1.0, const Vec3& center = Vec3::Zero());

// Axis-aligned box surface grid with welded seam vertices; divisions counts
// cells per edge.
TriangleMesh make_box_mesh(const Vec3& size, int divisions, const Vec3& center = Vec3::Zero());

// Box mesh with at least `min_kernels` vertices converted to Gaussians;
// uniform color if given (3 channels).
GaussianScene make_cuboid_scene(const Vec3& size, int min_kernels, const ConvertConfig& cfg,
                                const Vec3& color, const Vec3& center = Vec3::Zero());

// Deterministic camera orbiting the target: azimuth/elevation in radians,
// camera placed at `distance` looking at `target`.
Camera make_orbit_camera(double azimuth, double elevation, double distance, const Vec3& target,
                         int height, int width, double focal);

}  // namespace gvr
