#pragma once

#include "gvr/blender.hpp"

namespace gvr {

struct BenchConfig {
    std::vector<int> kernel_counts = {1000, 4000, 16000};
    std::vector<int> image_sizes = {128, 256, 512};
    int repeats = 3;
    SelectionConfig selection;
    int threads = 0;
};

struct BenchResult {
    int kernel_count = 0;
    int image_size = 0;
    double kernels_per_pixel_mean = 0.0;
    double kernels_per_pixel_max = 0.0;
    double images_per_second = 0.0;
    double wall_seconds = 0.0;  // total over repeats
    int repeats = 0;
};

// Synthetic cuboid scene framed by an identity-extrinsics camera.
GaussianScene make_bench_scene(int kernel_count);
Camera make_bench_camera(int image_size);

// Times a full render per configuration (one warmup, then `repeats` timed).
std::vector<BenchResult> run_benchmark(const BenchConfig& cfg);

}  // namespace gvr
