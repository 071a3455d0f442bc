#include "gvr/types.hpp"

#include <cmath>

namespace gvr {

namespace {

bool symmetric_within(const Mat3& m, double rel_tol) {
    double scale = m.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace

void GaussianKernel::validate(int index) const {
    const std::string tag = index >= 0 ? " (kernel " + std::to_string(index) + ")" : "";
    if (!center.allFinite() || !inv_cov.allFinite() || !attr.allFinite()) {
        throw ValidationError("kernel has non-finite values" + tag);
    }
    if (!symmetric_within(inv_cov, 1e-6)) {
        throw ValidationError("inv_cov is not symmetric" + tag);
    }
    Eigen::SelfAdjointEigenSolver<Mat3> es(inv_cov, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) {
        throw ValidationError("inv_cov is not positive-definite" + tag);
    }
}

void GaussianScene::validate() const {
    if (tau < 0.0 || !std::isfinite(tau)) {
        throw ValidationError("tau must be finite and >= 0");
    }
    const int dim = attr_dim();
    for (int k = 0; k < size(); ++k) {
        kernels[k].validate(k);
        if (kernels[k].attr.size() != dim) {
            throw ValidationError("attribute dimension is not uniform (kernel " + std::to_string(k) + ")");
        }
    }
}

void Camera::validate() const {
    if (!rotation.allFinite() || !translation.allFinite()) {
        throw ValidationError("camera extrinsics have non-finite values");
    }
    if ((rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
        throw ValidationError("camera rotation is not orthonormal");
    }
    if (std::abs(rotation.determinant() - 1.0) > 1e-6) {
        throw ValidationError("camera rotation determinant is not +1");
    }
    if (!(focal > 0.0) || !std::isfinite(focal)) {
        throw ValidationError("camera focal length must be > 0");
    }
    if (height < 1 || width < 1) {
        throw ValidationError("camera image size must be at least 1x1");
    }
    if (!std::isfinite(ox) || !std::isfinite(oy)) {
        throw ValidationError("camera principal point has non-finite values");
    }
}

const char* to_string(ChannelSemantics s) {
    switch (s) {
        case ChannelSemantics::Color: return "color";
        case ChannelSemantics::Alpha: return "alpha";
        case ChannelSemantics::Normal: return "normal";
        case ChannelSemantics::Feature: return "feature";
    }
    return "unknown";
}

void Image::validate_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) {
            throw ValidationError("image contains non-finite values");
        }
    }
}

}  // namespace gvr
