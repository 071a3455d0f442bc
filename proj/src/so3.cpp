#include "gvr/so3.hpp"

#include <cmath>

namespace gvr {

Mat3 so3_hat(const Vec3& w) {
    Mat3 m;
    m << 0.0, -w.z(), w.y(),
         w.z(), 0.0, -w.x(),
         -w.y(), w.x(), 0.0;
    return m;
}

Mat3 so3_exp(const Vec3& w) {
    const double theta = w.norm();
    const Mat3 k = so3_hat(w);
    if (theta < 1e-12) {
        return Mat3::Identity() + k + 0.5 * k * k;
    }
    const double s = std::sin(theta) / theta;
    const double c = (1.0 - std::cos(theta)) / (theta * theta);
    return Mat3::Identity() + s * k + c * k * k;
}

Vec3 so3_log(const Mat3& r) {
    const double cos_theta = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
    const double theta = std::acos(cos_theta);
    if (theta < 1e-9) {
        return Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)) * 0.5;
    }
    if (theta > M_PI - 1e-6) {
        // Near pi: axis from the symmetric part.
        const Mat3 a = 0.5 * (r + Mat3::Identity());
        Vec3 axis(std::sqrt(std::max(0.0, a(0, 0))), std::sqrt(std::max(0.0, a(1, 1))),
                  std::sqrt(std::max(0.0, a(2, 2))));
        int major;
        a.diagonal().maxCoeff(&major);
        for (int i = 0; i < 3; ++i) {
            if (i != major && a(major, i) < 0.0) axis[i] = -axis[i];
        }
        if (axis.norm() < 1e-12) return Vec3::Zero();
        return theta * axis.normalized();
    }
    Vec3 axis(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    return axis * (theta / (2.0 * std::sin(theta)));
}

Vec3 so3_exp_gradient(const Vec3& w, const Mat3& d_rotation) {
    const double theta2 = w.squaredNorm();
    const Mat3 r = so3_exp(w);
    Vec3 grad;
    for (int i = 0; i < 3; ++i) {
        Mat3 dr_dwi;
        if (theta2 < 1e-16) {
            dr_dwi = so3_hat(Vec3::Unit(i));
        } else {
            const Vec3 e = Vec3::Unit(i);
            const Vec3 v = w.cross((Mat3::Identity() - r) * e);
            dr_dwi = ((w[i] * so3_hat(w) + so3_hat(v)) / theta2) * r;
        }
        grad[i] = (d_rotation.array() * dr_dwi.array()).sum();
    }
    return grad;
}

Vec3 so3_tangent_gradient(const Mat3& d_rotation, const Mat3& r) {
    Vec3 grad;
    for (int i = 0; i < 3; ++i) {
        grad[i] = (d_rotation.array() * (so3_hat(Vec3::Unit(i)) * r).array()).sum();
    }
    return grad;
}

}  // namespace gvr
