#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gvr/blender.hpp"
#include "gvr/scene.hpp"
#include "gvr/tracer.hpp"

#include "oracles.hpp"

using namespace gvr;

namespace {

GaussianKernel isotropic_kernel(const Vec3& center, double sigma) {
    GaussianKernel k;
    k.center = center;
    k.inv_cov = Mat3::Identity() / (sigma * sigma);
    k.attr = VecX::Zero(3);
    return k;
}

}  // namespace

TEST_CASE("kernel on the ray axis peaks at its depth") {
    const double s = 0.7;
    const Ray ray{Vec3(0, 0, 1), 0, 0};
    const TracedKernel t = trace_kernel(ray, isotropic_kernel(Vec3(0, 0, 5), s));
    CHECK(t.l == doctest::Approx(5.0));
    CHECK(t.q == doctest::Approx(0.0));
    CHECK(t.sigma == doctest::Approx(s));
}

TEST_CASE("perpendicular offset only lowers the peak") {
    const double s = 0.5;
    const double v = 0.8;
    const Ray ray{Vec3(0, 0, 1), 0, 0};
    const TracedKernel t = trace_kernel(ray, isotropic_kernel(Vec3(v, 0, 5), s));
    CHECK(t.l == doctest::Approx(5.0));
    CHECK(t.q == doctest::Approx(-v * v / (2 * s * s)));
    CHECK(t.sigma == doctest::Approx(s));
}

TEST_CASE("traced peak matches dense grid search on anisotropic kernels") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> xy(-0.5, 0.5);
    for (int trial = 0; trial < 20; ++trial) {
        GaussianKernel k;
        k.center = Vec3(xy(rng), xy(rng), 4.0 + xy(rng));
        k.inv_cov = oracle::random_spd(rng, 0.5, 8.0);
        k.attr = VecX::Zero(1);
        const Ray ray{Vec3(xy(rng) * 0.2, xy(rng) * 0.2, 1.0).normalized(), 0, 0};

        const TracedKernel t = trace_kernel(ray, k);
        const double l_oracle =
            oracle::grid_search_peak(k.center, k.inv_cov, ray.dir, t.l - 2.0, t.l + 2.0, 100000);
        CHECK(std::abs(t.l - l_oracle) < 1e-3);
        CHECK(t.q <= 0.0);
        CHECK(t.sigma > 0.0);
    }
}

TEST_CASE("q equals the log density at the peak") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> xy(-0.5, 0.5);
    for (int trial = 0; trial < 50; ++trial) {
        GaussianKernel k;
        k.center = Vec3(xy(rng), xy(rng), 5.0);
        k.inv_cov = oracle::random_spd(rng, 0.5, 8.0);
        k.attr = VecX::Zero(1);
        const Ray ray{Vec3(xy(rng) * 0.3, xy(rng) * 0.3, 1.0).normalized(), 0, 0};

        const TracedKernel t = trace_kernel(ray, k);
        const Vec3 at_peak = t.l * ray.dir - k.center;
        const double direct = -0.5 * at_peak.dot(k.inv_cov * at_peak);
        CHECK(std::abs(t.q - direct) < 1e-9);
    }
}

TEST_CASE("tracing is invariant to a joint rotation") {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> xy(-0.5, 0.5);
    for (int trial = 0; trial < 50; ++trial) {
        GaussianKernel k;
        k.center = Vec3(xy(rng), xy(rng), 5.0);
        k.inv_cov = oracle::random_spd(rng, 0.5, 8.0);
        k.attr = VecX::Zero(1);
        const Vec3 dir = Vec3(xy(rng) * 0.3, xy(rng) * 0.3, 1.0).normalized();
        const Mat3 rot = oracle::random_rotation(rng);

        GaussianKernel rotated = k;
        rotated.center = rot * k.center;
        rotated.inv_cov = rot * k.inv_cov * rot.transpose();

        const TracedKernel a = trace_kernel(Ray{dir, 0, 0}, k);
        const TracedKernel b = trace_kernel(Ray{(rot * dir).normalized(), 0, 0}, rotated);
        CHECK(std::abs(a.l - b.l) < 1e-9);
        CHECK(std::abs(a.q - b.q) < 1e-9);
        CHECK(std::abs(a.sigma - b.sigma) < 1e-9);
    }
}

TEST_CASE("non-SPD input is rejected") {
    GaussianKernel k = isotropic_kernel(Vec3(0, 0, 5), 1.0);
    k.inv_cov(2, 2) = -1.0;
    CHECK_THROWS_AS(trace_kernel(Ray{Vec3(0, 0, 1), 0, 0}, k), ValidationError);
}

TEST_CASE("fine_select drops vanished kernels") {
    SelectionConfig cfg;
    std::vector<TracedKernel> traced = {{0, 5.0, -800.0, 1.0}, {1, 6.0, -900.0, 1.0}};
    CHECK(fine_select(traced, cfg).empty());
}

TEST_CASE("fine_select keeps everything under the cap, sorted by depth") {
    SelectionConfig cfg;
    cfg.k_prime = 20;
    std::vector<TracedKernel> traced = {{0, 6.0, -0.5, 1.0}, {1, 4.0, -0.1, 1.0}, {2, 5.0, -0.2, 1.0}};
    const auto out = fine_select(traced, cfg);
    REQUIRE(out.size() == 3);
    CHECK(out[0].kernel_index == 1);
    CHECK(out[1].kernel_index == 2);
    CHECK(out[2].kernel_index == 0);
}

TEST_CASE("fine_select output is a sorted subset no longer than k_prime") {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> ldist(1.0, 10.0);
    std::uniform_real_distribution<double> qdist(-8.0, 0.0);
    SelectionConfig cfg;
    cfg.k_prime = 4;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<TracedKernel> traced;
        for (int k = 0; k < 12; ++k) traced.push_back({k, ldist(rng), qdist(rng), 0.5});
        const auto out = fine_select(traced, cfg);
        CHECK(out.size() <= 4);
        for (size_t i = 0; i < out.size(); ++i) {
            if (i > 0) CHECK(out[i - 1].l <= out[i].l);
            CHECK(std::exp(out[i].q) > cfg.eta);
            CHECK(out[i].kernel_index < 12);
        }
        // Kept set is exactly the k_prime nearest of the above-threshold ones.
        std::vector<TracedKernel> eligible;
        for (const auto& t : traced)
            if (std::exp(t.q) > cfg.eta) eligible.push_back(t);
        std::sort(eligible.begin(), eligible.end(),
                  [](const TracedKernel& a, const TracedKernel& b) { return a.l < b.l; });
        const size_t expect = std::min<size_t>(eligible.size(), 4);
        REQUIRE(out.size() == expect);
        for (size_t i = 0; i < expect; ++i) CHECK(out[i].kernel_index == eligible[i].kernel_index);
    }
}

TEST_CASE("fine_select breaks depth ties by kernel index") {
    SelectionConfig cfg;
    cfg.k_prime = 1;
    std::vector<TracedKernel> traced = {{7, 5.0, -0.1, 1.0}, {3, 5.0, -0.1, 1.0}};
    const auto out = fine_select(traced, cfg);
    REQUIRE(out.size() == 1);
    CHECK(out[0].kernel_index == 3);
}

TEST_CASE("coarse_select boxes a centered kernel into the middle cells") {
    GaussianScene scene;
    scene.kernels.push_back(isotropic_kernel(Vec3(0, 0, 5), 0.05));
    Camera cam = oracle::default_camera(64, 64.0);
    SelectionConfig cfg;

    const PixelKernelMap map = coarse_select(scene, cam, cfg);
    CHECK(map.dropped_behind_camera == 0);
    CHECK_FALSE(map.candidates(32, 32).empty());
    CHECK(map.candidates(0, 0).empty());
    CHECK(map.candidates(63, 63).empty());
}

TEST_CASE("raising eta shrinks the boxes") {
    GaussianScene scene;
    scene.kernels.push_back(isotropic_kernel(Vec3(0, 0, 5), 0.4));
    Camera cam = oracle::default_camera(64, 64.0);

    SelectionConfig loose;
    loose.eta = 0.01;
    SelectionConfig tight;
    tight.eta = 0.9;
    size_t cells_loose = 0, cells_tight = 0;
    for (const auto& cell : coarse_select(scene, cam, loose).cells) cells_loose += cell.empty() ? 0 : 1;
    for (const auto& cell : coarse_select(scene, cam, tight).cells) cells_tight += cell.empty() ? 0 : 1;
    CHECK(cells_tight < cells_loose);
    CHECK(cells_tight >= 1);
}

TEST_CASE("kernels behind the camera are dropped with a counter") {
    GaussianScene scene;
    scene.kernels.push_back(isotropic_kernel(Vec3(0, 0, -3), 0.2));
    scene.kernels.push_back(isotropic_kernel(Vec3(0, 0, 5), 0.2));
    Camera cam = oracle::default_camera();
    const PixelKernelMap map = coarse_select(scene, cam, SelectionConfig{});
    CHECK(map.dropped_behind_camera == 1);
    for (const auto& cell : map.cells) {
        for (int k : cell) CHECK(k == 1);
    }
}

TEST_CASE("coarse candidates never miss a kernel above threshold at any pixel") {
    std::mt19937_64 rng(45);
    SelectionConfig cfg;
    for (int trial = 0; trial < 8; ++trial) {
        const GaussianScene scene = oracle::random_scene(rng, 40, 1, 2.0, 60.0);
        const Camera cam = oracle::default_camera(48, 24.0);
        const PixelKernelMap map = coarse_select(scene, cam, cfg);
        const double log_eta = std::log(cfg.eta);

        for (int i = 0; i < cam.height; ++i) {
            for (int j = 0; j < cam.width; ++j) {
                const Ray ray = pixel_ray(cam, i, j);
                const auto& candidates = map.candidates(i, j);
                for (int k = 0; k < scene.size(); ++k) {
                    if (scene.kernels[k].center.z() <= kBehindCameraEps) continue;
                    const TracedKernel t = trace_kernel(ray, scene.kernels[k], k);
                    if (t.q > log_eta) {
                        const bool present =
                            std::find(candidates.begin(), candidates.end(), k) != candidates.end();
                        CHECK_MESSAGE(present, "trial ", trial, " kernel ", k, " missing at pixel (",
                                      i, ",", j, ") with q ", t.q);
                    }
                }
            }
        }
    }
}

TEST_CASE("culled render matches the exhaustive render closely") {
    std::mt19937_64 rng(46);
    const GaussianScene scene = oracle::random_scene(rng, 500, 3, 8.0, 120.0);
    const Camera cam = oracle::default_camera(64, 48.0);

    SelectionConfig coarse;
    coarse.eta = 0.01;
    coarse.k_prime = 20;
    coarse.coarse_enabled = true;
    SelectionConfig off = coarse;
    off.coarse_enabled = false;

    const RenderBuffers with = render(scene, cam, coarse, 1);
    const RenderBuffers without = render(scene, cam, off, 1);
    double max_diff = 0.0;
    for (size_t i = 0; i < with.image.data.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(with.image.data[i] - without.image.data[i]));
    }
    CHECK(max_diff < 1e-2);
}

TEST_CASE("selection config validation") {
    SelectionConfig cfg;
    cfg.eta = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.eta = 0.01;
    cfg.k_prime = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
