#include "gvr/tracer.hpp"

#include <algorithm>
#include <cmath>

namespace gvr {

void SelectionConfig::validate() const {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw ValidationError("selection eta must be in (0, 1)");
    }
    if (k_prime < 1) {
        throw ValidationError("selection k_prime must be >= 1");
    }
    if (coarse_downsample < 1) {
        throw ValidationError("coarse downsample must be >= 1");
    }
}

TracedKernel trace_kernel(const Ray& ray, const GaussianKernel& kernel, int kernel_index) {
    const Mat3& s = kernel.inv_cov;
    const Vec3& m = kernel.center;
    const Vec3& d = ray.dir;

    const Vec3 sd = s * d;
    const double a = d.dot(sd);
    if (!(a > 0.0)) {
        throw ValidationError("trace_kernel: D^T inv_cov D <= 0 (inv_cov not positive-definite)");
    }
    const double b = 0.5 * (m.dot(sd) + d.dot(s * m));
    const double l = b / a;
    const Vec3 v = m - l * d;
    const double q = std::min(0.0, -0.5 * v.dot(s * v));
    return TracedKernel{kernel_index, l, q, 1.0 / std::sqrt(a)};
}

PixelKernelMap coarse_select(const GaussianScene& cam_scene, const Camera& camera,
                             const SelectionConfig& cfg) {
    cfg.validate();
    const int ds = cfg.coarse_downsample;
    PixelKernelMap map;
    map.downsample = ds;
    map.grid_rows = (camera.height + ds - 1) / ds;
    map.grid_cols = (camera.width + ds - 1) / ds;
    map.cells.assign(static_cast<size_t>(map.grid_rows) * map.grid_cols, {});

    const double chi = 2.0 * std::log(1.0 / cfg.eta);
    const double f = camera.focal;

    for (int k = 0; k < cam_scene.size(); ++k) {
        const auto& kernel = cam_scene.kernels[k];
        const double z = kernel.center.z();
        if (z <= kBehindCameraEps) {
            ++map.dropped_behind_camera;
            continue;
        }
        const Mat3 cov = kernel.inv_cov.inverse();

        // Screen position and perspective Jacobian at the kernel center.
        // Axis 0 of camera space maps to rows, axis 1 to columns.
        const double ci = camera.oy + f * kernel.center.x() / z;
        const double cj = camera.ox + f * kernel.center.y() / z;
        Eigen::Matrix<double, 2, 3> jac;
        jac << f / z, 0.0, -f * kernel.center.x() / (z * z),
               0.0, f / z, -f * kernel.center.y() / (z * z);
        const Mat2 cov2 = jac * cov * jac.transpose();

        // Half extents of the box bounding the eta-level set under the
        // linearized projection.
        const double rh = std::sqrt(std::max(0.0, chi * cov2(0, 0)));
        const double rw = std::sqrt(std::max(0.0, chi * cov2(1, 1)));
        double top = ci - rh, bottom = ci + rh, left = cj - rw, right = cj + rw;

        // The linearization can clip the true footprint near strong
        // perspective, so widen with the projection of the level set's
        // camera-space bounding box, which is conservative whenever the box
        // lies fully in front of the camera.
        const Vec3 ext(std::sqrt(std::max(0.0, chi * cov(0, 0))),
                       std::sqrt(std::max(0.0, chi * cov(1, 1))),
                       std::sqrt(std::max(0.0, chi * cov(2, 2))));
        if (kernel.center.z() - ext.z() <= kBehindCameraEps) {
            top = 0;
            bottom = camera.height - 1;
            left = 0;
            right = camera.width - 1;
        } else {
            for (int corner = 0; corner < 8; ++corner) {
                const Vec3 p = kernel.center + Vec3((corner & 1) ? ext.x() : -ext.x(),
                                                    (corner & 2) ? ext.y() : -ext.y(),
                                                    (corner & 4) ? ext.z() : -ext.z());
                const double pi = camera.oy + f * p.x() / p.z();
                const double pj = camera.ox + f * p.y() / p.z();
                top = std::min(top, pi);
                bottom = std::max(bottom, pi);
                left = std::min(left, pj);
                right = std::max(right, pj);
            }
        }

        const int row_lo = std::max(0, static_cast<int>(std::floor(top - 1.0)));
        const int row_hi = std::min(camera.height - 1, static_cast<int>(std::ceil(bottom + 1.0)));
        const int col_lo = std::max(0, static_cast<int>(std::floor(left - 1.0)));
        const int col_hi = std::min(camera.width - 1, static_cast<int>(std::ceil(right + 1.0)));
        if (row_lo > row_hi || col_lo > col_hi) continue;

        for (int cr = row_lo / ds; cr <= row_hi / ds; ++cr) {
            for (int cc = col_lo / ds; cc <= col_hi / ds; ++cc) {
                map.cells[static_cast<size_t>(cr) * map.grid_cols + cc].push_back(k);
            }
        }
    }
    return map;
}

std::vector<TracedKernel> fine_select(std::vector<TracedKernel> traced, const SelectionConfig& cfg) {
    cfg.validate();
    const double log_eta = std::log(cfg.eta);
    std::erase_if(traced, [&](const TracedKernel& t) { return !(t.q > log_eta); });
    std::sort(traced.begin(), traced.end(), [](const TracedKernel& a, const TracedKernel& b) {
        if (a.l != b.l) return a.l < b.l;
        return a.kernel_index < b.kernel_index;
    });
    if (static_cast<int>(traced.size()) > cfg.k_prime) {
        traced.resize(cfg.k_prime);
    }
    return traced;
}

}  // namespace gvr
