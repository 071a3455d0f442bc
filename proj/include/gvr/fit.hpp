#pragma once

#include "gvr/grad.hpp"

#include <span>

namespace gvr {

struct LossSpec {
    double rgb_weight = 1.0;
    double silhouette_weight = 1.0;
    double edge_weight = 0.0;
    double laplacian_weight = 0.0;

    void validate() const;
};

struct AdamConfig {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Canonical ADAM with bias-corrected moments.
struct AdamState {
    int64_t step = 0;
    std::vector<double> m;
    std::vector<double> v;

    void update(std::span<double> params, std::span<const double> grads, const AdamConfig& cfg);
};

struct FitView {
    Image image;
    Image alpha;
    Camera camera;
};

struct FitReport {
    std::vector<double> loss_trace;
    std::map<std::string, double> metrics;
    bool diverged = false;
    int iterations = 0;
};

// Neighbor-graph regularizers with the rest state captured at construction.
struct ShapeRegularizer {
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adjacency;
    std::vector<double> rest_edge_length;
    std::vector<Vec3> rest_laplacian;

    static ShapeRegularizer make(const std::vector<std::pair<int, int>>& edges,
                                 std::span<const Vec3> rest_centers);
};

// Mean squared deviation of edge lengths from their rest lengths.
double edge_reg(std::span<const Vec3> centers, const ShapeRegularizer& reg,
                std::vector<Vec3>* grad = nullptr);

// Mean squared deviation of the uniform-Laplacian displacement from rest.
double laplacian_reg(std::span<const Vec3> centers, const ShapeRegularizer& reg,
                     std::vector<Vec3>* grad = nullptr);

// Mean-over-views rgb/silhouette MSE with gradients via the backward pass.
// Regularizer terms are added by the fit procedures, not here.
double loss_and_grad(const GaussianScene& scene, std::span<const FitView> views,
                     const LossSpec& spec, const SelectionConfig& cfg,
                     GradientBundle* bundle = nullptr, const GradFlags& flags = {},
                     int threads = 0);

// Multi-view fit of kernel centers and attributes; samples batch_views views
// per iteration. Mutates `scene` in place. Deterministic under `seed`.
FitReport fit_shape(GaussianScene& scene, const ShapeRegularizer& reg,
                    std::span<const FitView> targets, const LossSpec& spec, int iters,
                    int batch_views, const AdamConfig& adam, const SelectionConfig& cfg,
                    uint64_t seed, int threads = 0);

struct TranslationFitResult {
    FitReport report;
    std::vector<Vec3> translations;  // per group, final
};

// Single-view fit of per-group rigid translations. Mutates `scene` in place.
TranslationFitResult fit_translation(GaussianScene& scene,
                                     const std::vector<std::vector<int>>& groups,
                                     const FitView& target, const LossSpec& spec, int iters,
                                     const AdamConfig& adam, const SelectionConfig& cfg,
                                     const GradFlags& flags = {}, int threads = 0);

struct PoseStart {
    Vec3 omega = Vec3::Zero();  // axis-angle
    Vec3 translation = Vec3::Zero();
};

struct PoseFitResult {
    FitReport report;     // trace of the best start
    Camera best_camera;
    PoseStart best_pose;
    int best_start = -1;
    std::vector<double> start_losses;
};

// Pixel-MSE pose refinement with multi-start; intrinsics and image size come
// from `camera_model`, whose extrinsics are ignored.
PoseFitResult fit_pose(const GaussianScene& scene, const Image& target_image,
                       const Image& target_alpha, const Camera& camera_model,
                       std::span<const PoseStart> starts, const LossSpec& spec, int iters,
                       const AdamConfig& adam, const SelectionConfig& cfg, int threads = 0);

// Geodesic distance between rotations, |logm(R_pred^T R_gt)|_F / sqrt(2),
// computed through the trace-angle identity.
double rotation_error(const Mat3& r_pred, const Mat3& r_gt);

}  // namespace gvr
