#include "gvr/bench.hpp"

#include "gvr/shapes.hpp"

#include <chrono>

namespace gvr {

GaussianScene make_bench_scene(int kernel_count) {
    ConvertConfig cfg;
    cfg.zeta = 0.5;
    return make_cuboid_scene(Vec3(1.0, 1.0, 1.0), kernel_count, cfg, Vec3(0.8, 0.3, 0.2),
                             Vec3(0.0, 0.0, 4.0));
}

Camera make_bench_camera(int image_size) {
    Camera cam;
    cam.height = image_size;
    cam.width = image_size;
    cam.focal = 1.6 * image_size;
    cam.oy = (image_size - 1) / 2.0;
    cam.ox = (image_size - 1) / 2.0;
    return cam;
}

std::vector<BenchResult> run_benchmark(const BenchConfig& cfg) {
    std::vector<BenchResult> results;
    for (int kernels : cfg.kernel_counts) {
        const GaussianScene scene = make_bench_scene(kernels);
        for (int size : cfg.image_sizes) {
            const Camera camera = make_bench_camera(size);

            RenderBuffers warm = render(scene, camera, cfg.selection, cfg.threads);
            BenchResult r;
            r.kernel_count = scene.size();
            r.image_size = size;
            r.repeats = cfg.repeats;
            size_t total = 0;
            size_t peak = 0;
            for (const auto& ws : warm.weight_store) {
                total += ws.size();
                peak = std::max(peak, ws.size());
            }
            r.kernels_per_pixel_mean = static_cast<double>(total) / warm.weight_store.size();
            r.kernels_per_pixel_max = static_cast<double>(peak);

            const auto start = std::chrono::steady_clock::now();
            for (int rep = 0; rep < cfg.repeats; ++rep) {
                RenderBuffers buf = render(scene, camera, cfg.selection, cfg.threads);
                (void)buf;
            }
            const auto stop = std::chrono::steady_clock::now();
            r.wall_seconds = std::chrono::duration<double>(stop - start).count();
            r.images_per_second = cfg.repeats / std::max(r.wall_seconds, 1e-12);
            results.push_back(r);
        }
    }
    return results;
}

}  // namespace gvr
