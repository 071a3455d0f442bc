#include "gvr/scene.hpp"

namespace gvr {

GaussianScene view_transform(const GaussianScene& scene, const Camera& camera) {
    camera.validate();
    const Mat3& r = camera.rotation;
    GaussianScene out = scene;
    for (auto& k : out.kernels) {
        k.center = r * k.center + camera.translation;
        // Conjugate by R so the density field rotates with the centers; this is
        // the unique choice under which composing two transforms equals applying
        // the composed extrinsics.
        k.inv_cov = r * k.inv_cov * r.transpose();
    }
    return out;
}

Ray pixel_ray(const Camera& camera, int row, int col) {
    Vec3 d((row - camera.oy) / camera.focal, (col - camera.ox) / camera.focal, 1.0);
    return Ray{d.normalized(), row, col};
}

std::vector<Ray> generate_rays(const Camera& camera) {
    camera.validate();
    std::vector<Ray> rays;
    rays.reserve(static_cast<size_t>(camera.height) * camera.width);
    for (int i = 0; i < camera.height; ++i) {
        for (int j = 0; j < camera.width; ++j) {
            rays.push_back(pixel_ray(camera, i, j));
        }
    }
    return rays;
}

Camera compose_extrinsics(const Camera& first, const Camera& second) {
    Camera out = second;
    out.rotation = second.rotation * first.rotation;
    out.translation = second.rotation * first.translation + second.translation;
    return out;
}

}  // namespace gvr
