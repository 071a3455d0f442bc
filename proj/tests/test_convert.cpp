#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gvr/convert.hpp"
#include "gvr/shapes.hpp"

#include "oracles.hpp"

#include <numeric>

using namespace gvr;

namespace {

// Two vertices joined to a third so every vertex has edges of length 2.
TriangleMesh triangle_with_edge_length(double len) {
    TriangleMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(len, 0, 0), Vec3(len / 2, len * std::sqrt(3.0) / 2, 0)};
    mesh.faces = {{0, 1, 2}};
    return mesh;
}

}  // namespace

TEST_CASE("mean edge length 2 at zeta 0.5 gives sigma 1/ln2") {
    const TriangleMesh mesh = triangle_with_edge_length(2.0);
    ConvertConfig cfg;
    cfg.zeta = 0.5;
    const GaussianScene scene = mesh_to_gaussians(mesh, cfg);
    REQUIRE(scene.size() == 3);
    const double sigma = 1.0 / std::log(2.0);
    for (const auto& k : scene.kernels) {
        CHECK((k.inv_cov - Mat3::Identity() / sigma).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("flatten rate one is isotropic") {
    const TriangleMesh mesh = make_icosphere(1);
    ConvertConfig cfg;
    cfg.flatten_rate = 1.0;
    const GaussianScene scene = mesh_to_gaussians(mesh, cfg);
    for (const auto& k : scene.kernels) {
        CHECK(std::abs(k.inv_cov(0, 0) - k.inv_cov(1, 1)) < 1e-12);
        CHECK(std::abs(k.inv_cov(0, 1)) < 1e-12);
    }
}

TEST_CASE("small flatten rate aligns the thin axis with the vertex normal") {
    const TriangleMesh mesh = make_icosphere(2);  // sphere: normal == position direction
    ConvertConfig cfg;
    cfg.flatten_rate = 0.05;
    const GaussianScene scene = mesh_to_gaussians(mesh, cfg);
    const auto normals = vertex_normals(mesh);
    for (int k = 0; k < scene.size(); ++k) {
        // Smallest-variance direction of Sigma = largest eigenvalue of inv_cov.
        Eigen::SelfAdjointEigenSolver<Mat3> es(scene.kernels[k].inv_cov);
        const Vec3 thin = es.eigenvectors().col(2);  // eigenvalues ascending
        CHECK(std::abs(thin.dot(normals[k])) > 0.999);
        CHECK(es.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("isolated vertices are reported by index") {
    TriangleMesh mesh = triangle_with_edge_length(1.0);
    mesh.vertices.push_back(Vec3(9, 9, 9));  // vertex 3, no faces
    try {
        mesh_to_gaussians(mesh, ConvertConfig{});
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find('3') != std::string::npos);
    }
}

TEST_CASE("converter rejects bad configs") {
    ConvertConfig cfg;
    cfg.zeta = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.zeta = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.zeta = 0.5;
    cfg.flatten_rate = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("point cloud conversion on a unit grid") {
    PointCloud cloud;
    for (int x = 0; x < 5; ++x)
        for (int y = 0; y < 5; ++y) cloud.points.emplace_back(x, y, 0.0);
    ConvertConfig cfg;
    cfg.zeta = 0.5;
    cfg.neighbors = 1;
    const GaussianScene scene = pointcloud_to_gaussians(cloud, cfg);
    REQUIRE(scene.size() == 25);
    // Interior points have nearest distance 1 -> sigma = 0.25/ln 2.
    const double sigma = 0.25 / std::log(2.0);
    const int interior = 2 * 5 + 2;  // index of point (2,2)
    CHECK((scene.kernels[interior].inv_cov - Mat3::Identity() / sigma).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("denser clouds make smaller kernels") {
    std::mt19937_64 rng(81);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    ConvertConfig cfg;
    cfg.neighbors = 3;
    double prev_median = std::numeric_limits<double>::infinity();
    for (int n : {100, 1000, 10000}) {
        PointCloud cloud;
        for (int i = 0; i < n; ++i) cloud.points.emplace_back(uni(rng), uni(rng), uni(rng));
        const GaussianScene scene = pointcloud_to_gaussians(cloud, cfg);
        std::vector<double> sigmas;
        sigmas.reserve(scene.size());
        for (const auto& k : scene.kernels) sigmas.push_back(1.0 / k.inv_cov(0, 0));
        std::nth_element(sigmas.begin(), sigmas.begin() + sigmas.size() / 2, sigmas.end());
        const double median = sigmas[sigmas.size() / 2];
        CHECK(median < prev_median);
        prev_median = median;
    }
}

TEST_CASE("duplicate points are rejected with their indices") {
    PointCloud cloud;
    cloud.points = {Vec3(0, 0, 0), Vec3(0, 0, 0), Vec3(1, 1, 1)};
    ConvertConfig cfg;
    cfg.neighbors = 1;
    try {
        pointcloud_to_gaussians(cloud, cfg);
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find('0') != std::string::npos);
        CHECK(msg.find('1') != std::string::npos);
    }
}

TEST_CASE("too few points for the neighbor count") {
    PointCloud cloud;
    cloud.points = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
    ConvertConfig cfg;
    cfg.neighbors = 3;
    CHECK_THROWS_AS(pointcloud_to_gaussians(cloud, cfg), ValidationError);
}

TEST_CASE("kernel count and attributes carry over index-exact") {
    TriangleMesh mesh = make_icosphere(1);
    mesh.colors.resize(mesh.vertices.size());
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        mesh.colors[v] = (VecX(3) << v * 0.01, 0.5, 1.0 - v * 0.01).finished();
    }
    const GaussianScene scene = mesh_to_gaussians(mesh, ConvertConfig{});
    REQUIRE(scene.size() == static_cast<int>(mesh.vertices.size()));
    for (int k = 0; k < scene.size(); ++k) {
        CHECK(scene.kernels[k].center == mesh.vertices[k]);
        CHECK(scene.kernels[k].attr == mesh.colors[k]);
    }
    scene.validate();  // SPD + symmetry for every kernel
}

TEST_CASE("scaling the mesh scales every sigma quadratically") {
    std::mt19937_64 rng(82);
    std::uniform_real_distribution<double> sdist(0.3, 3.0);
    for (int trial = 0; trial < 100; ++trial) {
        const double s = sdist(rng);
        TriangleMesh mesh = make_icosphere(1);
        TriangleMesh scaled = mesh;
        for (auto& v : scaled.vertices) v *= s;

        ConvertConfig cfg;
        cfg.zeta = 0.3;
        const GaussianScene a = mesh_to_gaussians(mesh, cfg);
        const GaussianScene b = mesh_to_gaussians(scaled, cfg);
        for (int k = 0; k < a.size(); ++k) {
            // inv_cov scales by 1/s^2.
            CHECK((b.kernels[k].inv_cov * s * s - a.kernels[k].inv_cov).cwiseAbs().maxCoeff() <
                  1e-9 * a.kernels[k].inv_cov.cwiseAbs().maxCoeff());
        }
    }
}

TEST_CASE("point cloud converter is scale homogeneous too") {
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    PointCloud cloud;
    for (int i = 0; i < 50; ++i) cloud.points.emplace_back(uni(rng), uni(rng), uni(rng));
    PointCloud scaled = cloud;
    for (auto& p : scaled.points) p *= 2.5;
    ConvertConfig cfg;
    const GaussianScene a = pointcloud_to_gaussians(cloud, cfg);
    const GaussianScene b = pointcloud_to_gaussians(scaled, cfg);
    for (int k = 0; k < a.size(); ++k) {
        CHECK(b.kernels[k].inv_cov(0, 0) * 2.5 * 2.5 ==
              doctest::Approx(a.kernels[k].inv_cov(0, 0)).epsilon(1e-9));
    }
}

TEST_CASE("icosphere subdivision hits the documented vertex counts") {
    CHECK(make_icosphere(0).vertices.size() == 12);
    CHECK(make_icosphere(1).vertices.size() == 42);
    CHECK(make_icosphere(2).vertices.size() == 162);
    CHECK(make_icosphere(3).vertices.size() == 642);
}

TEST_CASE("box meshes weld seam vertices") {
    for (int div : {1, 2, 4, 7}) {
        const TriangleMesh mesh = make_box_mesh(Vec3(1, 1, 1), div);
        CHECK(mesh.vertices.size() == static_cast<size_t>(6 * div * div + 2));
        CHECK(mesh.faces.size() == static_cast<size_t>(12 * div * div));
    }
    // Outward normals: every vertex normal points away from the center.
    const TriangleMesh mesh = make_box_mesh(Vec3(1, 1, 1), 3);
    const auto normals = vertex_normals(mesh);
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        CHECK(normals[v].dot(mesh.vertices[v]) > 0.0);
    }
}
