#pragma once

#include "gvr/types.hpp"

#include <span>

namespace gvr {

// 1D Gaussian reduction of one kernel along one ray: peak at distance l with
// log peak density q (<= 0) and standard deviation sigma.
struct TracedKernel {
    int kernel_index = 0;
    double l = 0.0;
    double q = 0.0;
    double sigma = 1.0;
};

struct SelectionConfig {
    double eta = 0.01;          // peak-density threshold e^q > eta
    int k_prime = 20;           // max kernels blended per ray
    bool coarse_enabled = true;
    int coarse_downsample = 8;  // coarse grid cell size in pixels

    void validate() const;
};

// Kernels whose center sits at or behind this camera-space depth are culled.
inline constexpr double kBehindCameraEps = 1e-4;

// Per coarse-cell candidate kernel lists from screen bounding boxes.
struct PixelKernelMap {
    int grid_rows = 0;
    int grid_cols = 0;
    int downsample = 8;
    std::vector<std::vector<int>> cells;
    int dropped_behind_camera = 0;

    const std::vector<int>& candidates(int row, int col) const {
        return cells[static_cast<size_t>(row / downsample) * grid_cols + col / downsample];
    }
};

// Reduces a (ray, kernel) pair to its 1D parameters. Kernel must already be in
// camera coordinates and the ray direction unit length.
TracedKernel trace_kernel(const Ray& ray, const GaussianKernel& kernel, int kernel_index = 0);

// Rasterizes conservative screen bounding boxes of the eta-level sets onto an
// (H/ds) x (W/ds) grid. Scene must be in camera coordinates.
PixelKernelMap coarse_select(const GaussianScene& cam_scene, const Camera& camera,
                             const SelectionConfig& cfg);

// Keeps kernels with e^q > eta, then the k_prime nearest by l, sorted
// ascending by l (ties broken by kernel index).
std::vector<TracedKernel> fine_select(std::vector<TracedKernel> traced, const SelectionConfig& cfg);

}  // namespace gvr
