#include "gvr/blender.hpp"

#include "gvr/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace gvr {

namespace {

// Standard normal CDF via erfc, stable in both tails.
inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865476);
}

}  // namespace

double transmittance_at(std::span<const TracedKernel> traced, double tau, double t) {
    double acc = 0.0;
    for (const auto& k : traced) {
        acc += std::exp(k.q) * normal_cdf((t - k.l) / k.sigma);
    }
    return std::exp(-tau * acc);
}

RayBlend blend(std::span<const TracedKernel> traced, double tau) {
    std::vector<TracedKernel> sorted(traced.begin(), traced.end());
    std::sort(sorted.begin(), sorted.end(), [](const TracedKernel& a, const TracedKernel& b) {
        if (a.l != b.l) return a.l < b.l;
        return a.kernel_index < b.kernel_index;
    });

    const size_t n = sorted.size();
    std::vector<double> peak(n);
    double total_peak = 0.0;
    for (size_t k = 0; k < n; ++k) {
        peak[k] = std::exp(sorted[k].q);
        total_peak += peak[k];
    }

    RayBlend out;
    out.weights.reserve(n);
    for (size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (size_t m = 0; m < n; ++m) {
            acc += peak[m] * normal_cdf((sorted[k].l - sorted[m].l) / sorted[m].sigma);
        }
        out.weights.emplace_back(sorted[k].kernel_index, std::exp(-tau * acc) * peak[k]);
    }
    out.alpha = 1.0 - std::exp(-tau * total_peak);
    return out;
}

std::vector<std::pair<int, double>> normalized_weights(const RayBlend& b, double eps) {
    double total = 0.0;
    for (const auto& [idx, w] : b.weights) total += w;
    const double denom = std::max(total, eps);
    auto out = b.weights;
    for (auto& [idx, w] : out) w /= denom;
    return out;
}

namespace detail {

RenderBuffers render_core(const GaussianScene& scene, const Camera& camera,
                          const SelectionConfig& cfg, int threads,
                          std::vector<std::vector<TracedKernel>>* traced_out,
                          GaussianScene* cam_scene_out) {
    scene.validate();
    camera.validate();
    cfg.validate();

    const int h = camera.height;
    const int w = camera.width;
    const int dim = scene.attr_dim();

    GaussianScene cam = view_transform(scene, camera);

    PixelKernelMap coarse_map;
    std::vector<int> all_candidates;
    if (cfg.coarse_enabled) {
        coarse_map = coarse_select(cam, camera, cfg);
    } else {
        for (int k = 0; k < cam.size(); ++k) {
            if (cam.kernels[k].center.z() > kBehindCameraEps) all_candidates.push_back(k);
        }
    }

    RenderBuffers buf;
    buf.image = Image(h, w, std::max(dim, 1), ChannelSemantics::Color);
    buf.alpha = Image(h, w, 1, ChannelSemantics::Alpha);
    buf.depth = Image(h, w, 1, ChannelSemantics::Feature);
    buf.weight_store.resize(static_cast<size_t>(h) * w);
    if (traced_out) traced_out->resize(static_cast<size_t>(h) * w);

    const int workers = resolve_threads(threads);
    parallel_for_partitions(h, workers, [&](int, int row_begin, int row_end) {
        std::vector<TracedKernel> traced;
        for (int i = row_begin; i < row_end; ++i) {
            for (int j = 0; j < w; ++j) {
                const Ray ray = pixel_ray(camera, i, j);
                const auto& candidates =
                    cfg.coarse_enabled ? coarse_map.candidates(i, j) : all_candidates;

                traced.clear();
                for (int k : candidates) {
                    if (cfg.coarse_enabled && cam.kernels[k].center.z() <= kBehindCameraEps) continue;
                    traced.push_back(trace_kernel(ray, cam.kernels[k], k));
                }
                auto selected = fine_select(std::move(traced), cfg);
                RayBlend rb = blend(selected, scene.tau);

                const size_t p = static_cast<size_t>(i) * w + j;
                double wsum = 0.0;
                double wl = 0.0;
                for (size_t n = 0; n < rb.weights.size(); ++n) {
                    const double weight = rb.weights[n].second;
                    const VecX& attr = scene.kernels[rb.weights[n].first].attr;
                    for (int c = 0; c < dim; ++c) buf.image.at(i, j, c) += weight * attr[c];
                    wsum += weight;
                    wl += weight * selected[n].l;
                }
                buf.alpha.at(i, j, 0) = rb.alpha;
                buf.depth.at(i, j, 0) = wsum > 1e-12 ? wl / wsum : 0.0;
                buf.weight_store[p] = std::move(rb.weights);
                if (traced_out) (*traced_out)[p] = std::move(selected);
            }
        }
    });

    buf.image.validate_finite();
    buf.alpha.validate_finite();
    buf.depth.validate_finite();
    if (cam_scene_out) *cam_scene_out = std::move(cam);
    return buf;
}

}  // namespace detail

RenderBuffers render(const GaussianScene& scene, const Camera& camera,
                     const SelectionConfig& cfg, int threads) {
    return detail::render_core(scene, camera, cfg, threads, nullptr, nullptr);
}

Image shade_lambert(const Image& normals, const Image& alpha, const Image& depth,
                    const Camera& camera, const Vec3& light_pos, const Vec3& light_color) {
    if (normals.channels != 3) {
        throw ValidationError("shade_lambert expects a 3-channel normal image");
    }
    if (normals.height != alpha.height || normals.width != alpha.width ||
        normals.height != depth.height || normals.width != depth.width) {
        throw ValidationError("shade_lambert: buffer sizes do not match");
    }
    Image out(normals.height, normals.width, 3, ChannelSemantics::Color);
    const Mat3 r_inv = camera.rotation.transpose();
    for (int i = 0; i < normals.height; ++i) {
        for (int j = 0; j < normals.width; ++j) {
            if (alpha.at(i, j, 0) <= 0.0) continue;
            Vec3 n(normals.at(i, j, 0), normals.at(i, j, 1), normals.at(i, j, 2));
            const double len = n.norm();
            if (len < 1e-12) continue;
            n /= len;
            const Vec3 point_cam = depth.at(i, j, 0) * pixel_ray(camera, i, j).dir;
            const Vec3 point_obj = r_inv * (point_cam - camera.translation);
            const Vec3 to_light = (light_pos - point_obj).normalized();
            const double intensity = std::max(0.0, n.dot(to_light));
            for (int c = 0; c < 3; ++c) out.at(i, j, c) = intensity * light_color[c];
        }
    }
    return out;
}

}  // namespace gvr
