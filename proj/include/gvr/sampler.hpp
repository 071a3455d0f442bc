#pragma once

#include "gvr/blender.hpp"

namespace gvr {

// Per-kernel attributes recovered from an observed image.
struct SampledAttributes {
    std::vector<VecX> attrs;      // K x D
    std::vector<double> support;  // sum of observed weights per kernel
    std::vector<bool> masked;     // true where support fell below the threshold

    int masked_count() const;
};

inline constexpr double kSupportEps = 1e-8;

// Weighted-mean inverse reconstruction: alpha_k = sum_p W_pk phi_p / sum_p W_pk
// with the same kernel-to-pixel weights the renderer produces. Kernels with
// support < eps get zero attributes and a mask bit. With normalized_weights
// the per-pixel normalized variant of the weights is used instead.
SampledAttributes sample_attributes(const Image& observed, const GaussianScene& scene,
                                    const Camera& camera, const SelectionConfig& cfg,
                                    bool normalized = false, int threads = 0);

// Renders the scene with attributes replaced by the sampled ones; masked
// kernels contribute zero.
RenderBuffers resynthesize(const SampledAttributes& attrs, const GaussianScene& scene,
                           const Camera& camera, const SelectionConfig& cfg, int threads = 0);

}  // namespace gvr
