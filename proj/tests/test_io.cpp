#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gvr/image_io.hpp"
#include "gvr/scene_io.hpp"
#include "gvr/so3.hpp"

#include "oracles.hpp"

#include <filesystem>
#include <fstream>

using namespace gvr;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("gvr_io_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("scene JSON round trip is exact") {
    std::mt19937_64 rng(101);
    const GaussianScene scene = oracle::random_scene(rng, 7);
    TempDir dir;
    const fs::path path = dir.path / "scene.json";
    save_scene_json(scene, path);
    const GaussianScene loaded = load_scene_json(path);

    REQUIRE(loaded.size() == scene.size());
    CHECK(loaded.tau == scene.tau);
    for (int k = 0; k < scene.size(); ++k) {
        CHECK(loaded.kernels[k].center == scene.kernels[k].center);
        CHECK(loaded.kernels[k].inv_cov == scene.kernels[k].inv_cov);
        CHECK(loaded.kernels[k].attr == scene.kernels[k].attr);
    }
    // No temp file left behind.
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST_CASE("camera JSON round trip is exact") {
    Camera cam;
    cam.rotation = so3_exp(Vec3(0.3, -0.2, 0.9));
    cam.translation = Vec3(0.5, -1.0, 2.0);
    cam.focal = 123.5;
    cam.ox = 31.25;
    cam.oy = 63.5;
    cam.height = 128;
    cam.width = 64;

    TempDir dir;
    const fs::path path = dir.path / "camera.json";
    save_camera_json(cam, path);
    const Camera loaded = load_camera_json(path);
    CHECK(loaded.rotation == cam.rotation);
    CHECK(loaded.translation == cam.translation);
    CHECK(loaded.focal == cam.focal);
    CHECK(loaded.ox == cam.ox);
    CHECK(loaded.oy == cam.oy);
    CHECK(loaded.height == cam.height);
    CHECK(loaded.width == cam.width);
}

TEST_CASE("loading rejects missing and malformed files") {
    TempDir dir;
    CHECK_THROWS_AS(load_scene_json(dir.path / "nope.json"), ValidationError);

    const fs::path bad = dir.path / "bad.json";
    std::ofstream(bad) << "{ not json";
    CHECK_THROWS_AS(load_scene_json(bad), ValidationError);

    const fs::path version = dir.path / "v2.json";
    std::ofstream(version) << R"({"version":2,"tau":1.0,"kernels":[]})";
    CHECK_THROWS_AS(load_scene_json(version), ValidationError);
}

TEST_CASE("attrs JSON round trip") {
    SampledAttributes attrs;
    attrs.attrs = {(VecX(3) << 0.1, 0.2, 0.3).finished(), (VecX(3) << 0.0, 0.0, 0.0).finished()};
    attrs.support = {1.5, 0.0};
    attrs.masked = {false, true};

    TempDir dir;
    const fs::path path = dir.path / "attrs.json";
    save_attrs_json(attrs, path);
    const SampledAttributes loaded = load_attrs_json(path);
    REQUIRE(loaded.attrs.size() == 2);
    CHECK(loaded.attrs[0] == attrs.attrs[0]);
    CHECK(loaded.support == attrs.support);
    CHECK(loaded.masked == attrs.masked);
    CHECK(loaded.masked_count() == 1);
}

TEST_CASE("OBJ parsing handles colors, slashes and polygons") {
    TempDir dir;
    const fs::path path = dir.path / "mesh.obj";
    std::ofstream(path) << "# comment\n"
                           "v 0 0 0 1.0 0.5 0.25\n"
                           "v 1 0 0 0.0 1.0 0.0\n"
                           "v 1 1 0 0.0 0.0 1.0\n"
                           "v 0 1 0 1.0 1.0 1.0\n"
                           "vn 0 0 1\n"
                           "f 1/1/1 2/2/1 3/3/1 4/4/1\n";
    const TriangleMesh mesh = load_obj(path);
    REQUIRE(mesh.vertices.size() == 4);
    REQUIRE(mesh.faces.size() == 2);  // quad fan-triangulated
    CHECK(mesh.faces[0] == std::array<int, 3>{0, 1, 2});
    CHECK(mesh.faces[1] == std::array<int, 3>{0, 2, 3});
    REQUIRE(mesh.colors.size() == 4);
    CHECK(mesh.colors[0][0] == 1.0);
    CHECK(mesh.colors[0][2] == 0.25);
}

TEST_CASE("OBJ without colors leaves the color list empty") {
    TempDir dir;
    const fs::path path = dir.path / "plain.obj";
    std::ofstream(path) << "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
    const TriangleMesh mesh = load_obj(path);
    CHECK(mesh.colors.empty());
    CHECK(mesh.faces.size() == 1);
}

TEST_CASE("ascii PLY point clouds load points and colors") {
    TempDir dir;
    const fs::path path = dir.path / "cloud.ply";
    std::ofstream(path) << "ply\n"
                           "format ascii 1.0\n"
                           "comment test\n"
                           "element vertex 3\n"
                           "property float x\n"
                           "property float y\n"
                           "property float z\n"
                           "property uchar red\n"
                           "property uchar green\n"
                           "property uchar blue\n"
                           "end_header\n"
                           "0 0 0 255 0 0\n"
                           "1 0 0 0 255 0\n"
                           "0 1 0 0 0 255\n";
    const PointCloud cloud = load_ply(path);
    REQUIRE(cloud.points.size() == 3);
    CHECK(cloud.points[1] == Vec3(1, 0, 0));
    REQUIRE(cloud.colors.size() == 3);
    CHECK(cloud.colors[0][0] == doctest::Approx(1.0));
    CHECK(cloud.colors[2][2] == doctest::Approx(1.0));
}

TEST_CASE("binary little-endian PLY round trips") {
    TempDir dir;
    const fs::path path = dir.path / "cloud_bin.ply";
    {
        std::ofstream out(path, std::ios::binary);
        out << "ply\nformat binary_little_endian 1.0\n"
               "element vertex 2\n"
               "property float x\nproperty float y\nproperty float z\n"
               "property uchar red\nproperty uchar green\nproperty uchar blue\n"
               "end_header\n";
        const float a[3] = {0.5f, 1.5f, -2.0f};
        const unsigned char ca[3] = {255, 128, 0};
        const float b[3] = {3.0f, -1.0f, 4.0f};
        const unsigned char cb[3] = {0, 64, 255};
        out.write(reinterpret_cast<const char*>(a), 12);
        out.write(reinterpret_cast<const char*>(ca), 3);
        out.write(reinterpret_cast<const char*>(b), 12);
        out.write(reinterpret_cast<const char*>(cb), 3);
    }
    const PointCloud cloud = load_ply(path);
    REQUIRE(cloud.points.size() == 2);
    CHECK(cloud.points[0] == Vec3(0.5, 1.5, -2.0));
    CHECK(cloud.points[1] == Vec3(3.0, -1.0, 4.0));
    CHECK(cloud.colors[0][1] == doctest::Approx(128.0 / 255.0));
}

TEST_CASE("PNG write/read round trips within quantization") {
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    Image img(13, 17, 3);
    for (auto& v : img.data) v = uni(rng);

    TempDir dir;
    const fs::path path = dir.path / "img.png";
    write_png(img, path);
    const Image loaded = read_png(path);
    REQUIRE(loaded.height == 13);
    REQUIRE(loaded.width == 17);
    REQUIRE(loaded.channels == 3);
    for (size_t i = 0; i < img.data.size(); ++i) {
        CHECK(std::abs(loaded.data[i] - img.data[i]) <= 0.5 / 255.0 + 1e-12);
    }
    CHECK_FALSE(fs::exists(path.string() + ".tmp"));
}

TEST_CASE("PNG clamps out-of-range values") {
    Image img(1, 2, 1);
    img.at(0, 0, 0) = -0.5;
    img.at(0, 1, 0) = 1.5;
    TempDir dir;
    const fs::path path = dir.path / "clamp.png";
    write_png(img, path);
    const Image loaded = read_png(path);
    CHECK(loaded.at(0, 0, 0) == 0.0);
    CHECK(loaded.at(0, 1, 0) == 1.0);
}

TEST_CASE("PFM round trips at float precision") {
    std::mt19937_64 rng(103);
    std::uniform_real_distribution<double> uni(-5.0, 5.0);
    for (int channels : {1, 3}) {
        Image img(9, 11, channels, channels == 1 ? ChannelSemantics::Alpha : ChannelSemantics::Color);
        for (auto& v : img.data) v = uni(rng);

        TempDir dir;
        const fs::path path = dir.path / "img.pfm";
        write_pfm(img, path);
        const Image loaded = read_pfm(path);
        REQUIRE(loaded.height == 9);
        REQUIRE(loaded.width == 11);
        REQUIRE(loaded.channels == channels);
        for (size_t i = 0; i < img.data.size(); ++i) {
            CHECK(loaded.data[i] == doctest::Approx(img.data[i]).epsilon(1e-7));
        }
    }
}

TEST_CASE("deterministic serialization: same scene, identical bytes") {
    std::mt19937_64 rng(104);
    const GaussianScene scene = oracle::random_scene(rng, 5);
    TempDir dir;
    save_scene_json(scene, dir.path / "a.json");
    save_scene_json(scene, dir.path / "b.json");
    std::ifstream a(dir.path / "a.json"), b(dir.path / "b.json");
    const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
    CHECK(!sa.empty());
}
