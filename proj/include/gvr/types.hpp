#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace gvr {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using VecX = Eigen::VectorXd;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Thrown when an input violates a documented precondition.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// One ellipsoidal Gaussian density kernel. The covariance is stored inverted
// because every downstream formula consumes inv_cov directly.
struct GaussianKernel {
    Vec3 center = Vec3::Zero();
    Mat3 inv_cov = Mat3::Identity();
    VecX attr;  // per-kernel attribute (RGB, features, ...); dimension uniform per scene

    // Checks symmetry (1e-6 relative) and positive-definiteness.
    void validate(int index = -1) const;
};

struct GaussianScene {
    std::vector<GaussianKernel> kernels;
    double tau = 1.0;  // absorption coefficient

    int attr_dim() const { return kernels.empty() ? 0 : static_cast<int>(kernels.front().attr.size()); }
    int size() const { return static_cast<int>(kernels.size()); }
    void validate() const;
};

// Pinhole camera. Pixel convention: (i, j) = (row, column) with pixel centers
// at integer coordinates; i pairs with Oy and j with Ox.
struct Camera {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    double focal = 1.0;       // pixels
    double ox = 0.0;          // principal point, column
    double oy = 0.0;          // principal point, row
    int height = 1;
    int width = 1;

    void validate() const;
};

// Viewing ray in camera coordinates, one per pixel. Direction is unit length
// so that distances along the ray are metric.
struct Ray {
    Vec3 dir = Vec3::UnitZ();
    int row = 0;
    int col = 0;
};

enum class ChannelSemantics : std::uint8_t { Color, Alpha, Normal, Feature };

const char* to_string(ChannelSemantics s);

// Dense H x W x C image of doubles, row-major with channels interleaved.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;
    ChannelSemantics semantics = ChannelSemantics::Color;
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c, ChannelSemantics sem = ChannelSemantics::Color)
        : height(h), width(w), channels(c), semantics(sem),
          data(static_cast<size_t>(h) * w * c, 0.0) {}

    double& at(int r, int c, int ch) {
        return data[(static_cast<size_t>(r) * width + c) * channels + ch];
    }
    double at(int r, int c, int ch) const {
        return data[(static_cast<size_t>(r) * width + c) * channels + ch];
    }
    size_t pixel_count() const { return static_cast<size_t>(height) * width; }

    // No NaN/Inf may leave the module boundary.
    void validate_finite() const;
};

}  // namespace gvr
