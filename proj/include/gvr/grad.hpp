#pragma once

#include "gvr/blender.hpp"
#include "gvr/so3.hpp"

#include <map>
#include <optional>

namespace gvr {

// Accumulated gradients of a scalar loss w.r.t. scene parameters (object
// space) and the camera extrinsics (raw matrix elements for R).
struct GradientBundle {
    std::vector<Vec3> d_center;
    std::vector<Mat3> d_inv_cov;
    std::vector<VecX> d_attr;
    Mat3 d_rotation = Mat3::Zero();
    Vec3 d_translation = Vec3::Zero();

    void init(int kernel_count, int attr_dim);
    void add(const GradientBundle& other);
};

// Forward intermediates retained for the backward pass: the per-pixel selected
// traced kernels plus the inputs, enough to reproduce the forward bit-exactly.
struct Tape {
    GaussianScene scene;      // object space, as passed to the forward
    GaussianScene cam_scene;  // after view_transform
    Camera camera;
    SelectionConfig cfg;
    int threads = 0;
    std::vector<std::vector<TracedKernel>> traced;  // per pixel, ascending l
};

struct ForwardResult {
    RenderBuffers buffers;
    Tape tape;
};

// Render while recording the tape.
ForwardResult render_with_tape(const GaussianScene& scene, const Camera& camera,
                               const SelectionConfig& cfg, int threads = 0);

// Ablation switches: block the gradient path through the transmittance
// T(l_k) (and alpha) or through the density factor e^{q_k}.
struct GradFlags {
    bool through_transmittance = true;
    bool through_density = true;
};

// Chain rule through blend -> transmittance -> trace -> view transform.
// d_image must be H x W x D and d_alpha H x W x 1 (pass a zero image to skip).
GradientBundle backward(const Tape& tape, const Image& d_image, const Image& d_alpha,
                        const GradFlags& flags = {});

// Scalar test functional for gradient checking:
//   L = 0.5 * w_image * |image - target_image|^2 + 0.5 * w_alpha * |alpha - target_alpha|^2
struct ScalarLoss {
    Image target_image;
    Image target_alpha;
    double w_image = 1.0;
    double w_alpha = 1.0;

    double value(const RenderBuffers& buf, Image* d_image, Image* d_alpha) const;
};

struct GradCheckEntry {
    double max_rel_err = 0.0;
    int checked = 0;
    int skipped_boundary = 0;  // selection set changed within +-h
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
};

struct GradCheckReport {
    std::map<std::string, GradCheckEntry> per_class;
    double max_rel_err = 0.0;
    int total_checked = 0;
    int total_skipped = 0;
    bool passed(double tol) const { return max_rel_err < tol; }
};

// Central-difference verification of backward() over parameter classes
// "center", "inv_cov", "attr", "pose" (camera axis-angle + translation).
// Parameters whose selection sets change within +-h are skipped and counted.
GradCheckReport gradcheck(const GaussianScene& scene, const Camera& camera,
                          const SelectionConfig& cfg, const ScalarLoss& loss,
                          double h = 1e-4, double tol = 1e-3, int threads = 0);

}  // namespace gvr
