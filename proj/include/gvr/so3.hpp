#pragma once

#include "gvr/types.hpp"

namespace gvr {

// Skew-symmetric matrix with so3_hat(w) * v == w x v.
Mat3 so3_hat(const Vec3& w);

// Rodrigues exponential map.
Mat3 so3_exp(const Vec3& w);

// Rotation vector of R (angle in [0, pi]).
Vec3 so3_log(const Mat3& r);

// Chains a raw matrix-element gradient dL/dR into dL/dw for R = exp(hat(w)).
Vec3 so3_exp_gradient(const Vec3& w, const Mat3& d_rotation);

// Projects a raw matrix-element gradient onto the tangent of SO(3) at R:
// dL/de for R(e) = exp(hat(e)) * R evaluated at e = 0.
Vec3 so3_tangent_gradient(const Mat3& d_rotation, const Mat3& r);

}  // namespace gvr
