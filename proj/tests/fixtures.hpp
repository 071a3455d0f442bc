// Deterministic scenes shared by the CLI test data generator and the
// acceptance suite.
#pragma once

#include "gvr/sampler.hpp"
#include "gvr/shapes.hpp"

#include <cmath>
#include <random>

namespace fixtures {

// Fibonacci-sphere surface scene with a smooth texture constant along the
// view axis, absorption calibrated so per-ray weight sums sit near one inside
// the silhouette.
inline gvr::GaussianScene textured_sphere(int points = 1000, double zeta = 0.35,
                                          double tau = 0.91, double freq = 1.5) {
    gvr::PointCloud cloud;
    for (int i = 0; i < points; ++i) {
        const double golden = M_PI * (3.0 - std::sqrt(5.0));
        const double y = 1.0 - 2.0 * (i + 0.5) / points;
        const double r = std::sqrt(1.0 - y * y);
        const double th = golden * i;
        const gvr::Vec3 p(std::cos(th) * r, y, std::sin(th) * r);
        cloud.points.push_back(p + gvr::Vec3(0, 0, 4));
        cloud.colors.push_back((gvr::VecX(3) << 0.5 + 0.45 * std::sin(freq * p.x()),
                                0.5 + 0.45 * std::cos(freq * 0.8 * p.y()),
                                0.5 + 0.45 * std::sin(freq * (p.x() + p.y())))
                                   .finished());
    }
    gvr::ConvertConfig cfg;
    cfg.zeta = zeta;
    gvr::GaussianScene scene = pointcloud_to_gaussians(cloud, cfg);
    scene.tau = tau;
    return scene;
}

inline gvr::Camera face_on_camera(int size, double focal) {
    gvr::Camera cam;
    cam.height = cam.width = size;
    cam.focal = focal;
    cam.oy = cam.ox = (size - 1) / 2.0;
    return cam;
}

// Occlusion pair: a red cuboid in front, a blue one `separation` units behind
// it, offset laterally so it stays partially visible. The occluder is 0.6
// units thick with unit faces; "scales" in the fit tasks refer to these units.
struct CuboidPair {
    gvr::GaussianScene combined;
    std::vector<std::vector<int>> groups;
    int red_kernels = 0;
};

inline CuboidPair two_cuboids(double separation, int kernels_per_part = 150) {
    gvr::ConvertConfig conv;
    const gvr::GaussianScene red = gvr::make_cuboid_scene(
        gvr::Vec3(1.0, 1.0, 0.6), kernels_per_part, conv, gvr::Vec3(0.85, 0.15, 0.1),
        gvr::Vec3(0, 0, 4.0));
    const gvr::GaussianScene blue = gvr::make_cuboid_scene(
        gvr::Vec3(1.0, 1.0, 0.6), kernels_per_part, conv, gvr::Vec3(0.1, 0.2, 0.85),
        gvr::Vec3(0.35, 0.25, 4.0 + separation));

    CuboidPair pair;
    pair.combined.tau = 1.0;
    pair.groups.resize(2);
    for (const auto& k : red.kernels) {
        pair.groups[0].push_back(pair.combined.size());
        pair.combined.kernels.push_back(k);
    }
    pair.red_kernels = pair.combined.size();
    for (const auto& k : blue.kernels) {
        pair.groups[1].push_back(pair.combined.size());
        pair.combined.kernels.push_back(k);
    }
    return pair;
}

// Randomized scene in the default camera frustum (used by gradcheck and the
// culling suites).
inline gvr::GaussianScene random_frustum_scene(std::mt19937_64& rng, int count, int attr_dim = 3,
                                               double inv_cov_lo = 2.0, double inv_cov_hi = 30.0) {
    std::uniform_real_distribution<double> xy(-1.0, 1.0);
    std::uniform_real_distribution<double> zdist(3.0, 6.0);
    std::uniform_real_distribution<double> channel(0.0, 1.0);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> ev(inv_cov_lo, inv_cov_hi);

    gvr::GaussianScene scene;
    for (int k = 0; k < count; ++k) {
        gvr::GaussianKernel kernel;
        kernel.center = gvr::Vec3(xy(rng), xy(rng), zdist(rng));
        gvr::Mat3 a;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) a(i, j) = normal(rng);
        const Eigen::HouseholderQR<gvr::Mat3> qr(a);
        gvr::Mat3 q = qr.householderQ();
        if (q.determinant() < 0) q.col(0) = -q.col(0);
        const gvr::Vec3 eigenvalues(ev(rng), ev(rng), ev(rng));
        kernel.inv_cov = q * eigenvalues.asDiagonal() * q.transpose();
        kernel.attr =
            gvr::VecX::NullaryExpr(attr_dim, [&](Eigen::Index) { return channel(rng); });
        scene.kernels.push_back(std::move(kernel));
    }
    return scene;
}

}  // namespace fixtures
