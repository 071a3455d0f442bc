#include "gvr/sampler.hpp"

namespace gvr {

int SampledAttributes::masked_count() const {
    int n = 0;
    for (bool m : masked) n += m ? 1 : 0;
    return n;
}

SampledAttributes sample_attributes(const Image& observed, const GaussianScene& scene,
                                    const Camera& camera, const SelectionConfig& cfg,
                                    bool normalized, int threads) {
    if (observed.height != camera.height || observed.width != camera.width) {
        throw ValidationError("observed image size does not match the camera");
    }
    const int dim = observed.channels;
    const int kcount = scene.size();

    // The sampling weights are exactly the rendering weights.
    RenderBuffers buf = render(scene, camera, cfg, threads);

    SampledAttributes out;
    out.attrs.assign(kcount, VecX::Zero(dim));
    out.support.assign(kcount, 0.0);
    out.masked.assign(kcount, false);

    for (int i = 0; i < camera.height; ++i) {
        for (int j = 0; j < camera.width; ++j) {
            const auto& weights = buf.weight_store[static_cast<size_t>(i) * camera.width + j];
            double denom = 0.0;
            if (normalized) {
                for (const auto& [k, w] : weights) denom += w;
                denom = std::max(denom, kSupportEps);
            }
            for (const auto& [k, w] : weights) {
                const double ww = normalized ? w / denom : w;
                out.support[k] += ww;
                for (int c = 0; c < dim; ++c) out.attrs[k][c] += ww * observed.at(i, j, c);
            }
        }
    }

    for (int k = 0; k < kcount; ++k) {
        if (out.support[k] < kSupportEps) {
            out.attrs[k].setZero();
            out.masked[k] = true;
        } else {
            out.attrs[k] /= out.support[k];
        }
    }
    return out;
}

RenderBuffers resynthesize(const SampledAttributes& attrs, const GaussianScene& scene,
                           const Camera& camera, const SelectionConfig& cfg, int threads) {
    if (attrs.attrs.size() != static_cast<size_t>(scene.size())) {
        throw ValidationError("sampled attribute count does not match the scene");
    }
    GaussianScene recolored = scene;
    for (int k = 0; k < scene.size(); ++k) {
        recolored.kernels[k].attr = attrs.masked[k] ? VecX::Zero(attrs.attrs[k].size()).eval()
                                                    : attrs.attrs[k];
    }
    return render(recolored, camera, cfg, threads);
}

}  // namespace gvr
