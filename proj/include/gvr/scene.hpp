#pragma once

#include "gvr/types.hpp"

namespace gvr {

// Transforms kernels from object to camera coordinates:
//   M <- R * M + T,  inv_cov <- R^T * inv_cov * R.
// Attributes and kernel order are preserved.
GaussianScene view_transform(const GaussianScene& scene, const Camera& camera);

// Unit direction of the ray through pixel center (row, col).
Ray pixel_ray(const Camera& camera, int row, int col);

// One ray per pixel, row-major.
std::vector<Ray> generate_rays(const Camera& camera);

// Extrinsics of applying (R1, T1) then (R2, T2).
Camera compose_extrinsics(const Camera& first, const Camera& second);

}  // namespace gvr
