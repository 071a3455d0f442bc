#pragma once

#include "gvr/scene.hpp"
#include "gvr/tracer.hpp"

#include <span>
#include <utility>

namespace gvr {

// Per-ray blending result: kernel-to-pixel weights W = T(l_k) * e^{q_k} in
// ascending-l order, and alpha = 1 - T(inf).
struct RayBlend {
    std::vector<std::pair<int, double>> weights;  // (kernel_index, W)
    double alpha = 0.0;
};

struct RenderBuffers {
    Image image;  // H x W x D attribute image
    Image alpha;  // H x W x 1
    Image depth;  // H x W x 1 expected blend distance (0 where nothing hit)
    // Per-pixel sparse (kernel_index, W) lists, ascending by l; shared by the
    // sampler and the backward pass.
    std::vector<std::vector<std::pair<int, double>>> weight_store;
};

// Transmittance T(t) = exp(-tau * sum_m e^{q_m} * Phi((t - l_m) / sigma_m))
// where Phi is the standard normal CDF. Order-independent in `traced`.
double transmittance_at(std::span<const TracedKernel> traced, double tau, double t);

// Closed-form weights W_k = T(l_k) * e^{q_k} with integration bounds at
// +-infinity. Accepts any order; weights come back sorted by l.
RayBlend blend(std::span<const TracedKernel> traced, double tau);

// Normalized weight accessor for samplers: W_k / max(sum W, eps).
std::vector<std::pair<int, double>> normalized_weights(const RayBlend& b, double eps = 1e-8);

// Full pipeline: view transform, rays, selection, trace, blend.
// threads <= 0 selects automatically (GVR_THREADS env var overrides).
RenderBuffers render(const GaussianScene& scene, const Camera& camera,
                     const SelectionConfig& cfg, int threads = 0);

// Diffuse shading of a rendered normal image. Normals and the light position
// live in object coordinates; the per-pixel surface point is reconstructed
// from the depth buffer and mapped back through the camera extrinsics.
Image shade_lambert(const Image& normals, const Image& alpha, const Image& depth,
                    const Camera& camera, const Vec3& light_pos, const Vec3& light_color);

namespace detail {

// Render core shared with the backward pass; optionally retains the selected
// traced kernels per pixel and the camera-space scene.
RenderBuffers render_core(const GaussianScene& scene, const Camera& camera,
                          const SelectionConfig& cfg, int threads,
                          std::vector<std::vector<TracedKernel>>* traced_out,
                          GaussianScene* cam_scene_out);

}  // namespace detail

}  // namespace gvr
