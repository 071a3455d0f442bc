#include "gvr/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gvr {

void LossSpec::validate() const {
    if (rgb_weight < 0.0 || silhouette_weight < 0.0 || edge_weight < 0.0 || laplacian_weight < 0.0) {
        throw ValidationError("loss weights must be non-negative");
    }
    if (rgb_weight == 0.0 && silhouette_weight == 0.0 && edge_weight == 0.0 &&
        laplacian_weight == 0.0) {
        throw ValidationError("at least one loss weight must be positive");
    }
}

void AdamState::update(std::span<double> params, std::span<const double> grads,
                       const AdamConfig& cfg) {
    if (params.size() != grads.size()) {
        throw ValidationError("adam: parameter and gradient sizes differ");
    }
    if (m.empty()) {
        m.assign(params.size(), 0.0);
        v.assign(params.size(), 0.0);
    }
    if (m.size() != params.size()) {
        throw ValidationError("adam: state does not match parameter count");
    }
    ++step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    for (size_t i = 0; i < params.size(); ++i) {
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grads[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        params[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
}

ShapeRegularizer ShapeRegularizer::make(const std::vector<std::pair<int, int>>& edges,
                                        std::span<const Vec3> rest_centers) {
    if (edges.empty()) {
        throw ValidationError("regularizer needs a non-empty neighbor graph");
    }
    ShapeRegularizer reg;
    reg.edges = edges;
    reg.adjacency.assign(rest_centers.size(), {});
    reg.rest_edge_length.reserve(edges.size());
    for (const auto& [a, b] : edges) {
        reg.adjacency[a].push_back(b);
        reg.adjacency[b].push_back(a);
        reg.rest_edge_length.push_back((rest_centers[a] - rest_centers[b]).norm());
    }
    reg.rest_laplacian.assign(rest_centers.size(), Vec3::Zero());
    for (size_t i = 0; i < rest_centers.size(); ++i) {
        if (reg.adjacency[i].empty()) continue;
        Vec3 mean = Vec3::Zero();
        for (int j : reg.adjacency[i]) mean += rest_centers[j];
        reg.rest_laplacian[i] = rest_centers[i] - mean / reg.adjacency[i].size();
    }
    return reg;
}

double edge_reg(std::span<const Vec3> centers, const ShapeRegularizer& reg,
                std::vector<Vec3>* grad) {
    if (reg.edges.empty()) {
        throw ValidationError("edge_reg: empty neighbor graph");
    }
    if (grad) grad->assign(centers.size(), Vec3::Zero());
    double value = 0.0;
    const double inv_n = 1.0 / reg.edges.size();
    for (size_t e = 0; e < reg.edges.size(); ++e) {
        const auto& [a, b] = reg.edges[e];
        const Vec3 diff = centers[a] - centers[b];
        const double len = std::max(diff.norm(), 1e-12);
        const double dev = len - reg.rest_edge_length[e];
        value += dev * dev * inv_n;
        if (grad) {
            const Vec3 g = (2.0 * dev * inv_n / len) * diff;
            (*grad)[a] += g;
            (*grad)[b] -= g;
        }
    }
    return value;
}

double laplacian_reg(std::span<const Vec3> centers, const ShapeRegularizer& reg,
                     std::vector<Vec3>* grad) {
    if (reg.edges.empty()) {
        throw ValidationError("laplacian_reg: empty neighbor graph");
    }
    if (grad) grad->assign(centers.size(), Vec3::Zero());
    double value = 0.0;
    const double inv_n = 1.0 / centers.size();
    for (size_t i = 0; i < centers.size(); ++i) {
        const auto& nbrs = reg.adjacency[i];
        if (nbrs.empty()) continue;
        Vec3 mean = Vec3::Zero();
        for (int j : nbrs) mean += centers[j];
        mean /= nbrs.size();
        const Vec3 delta = (centers[i] - mean) - reg.rest_laplacian[i];
        value += delta.squaredNorm() * inv_n;
        if (grad) {
            const Vec3 g = 2.0 * inv_n * delta;
            (*grad)[i] += g;
            const Vec3 gn = g / nbrs.size();
            for (int j : nbrs) (*grad)[j] -= gn;
        }
    }
    return value;
}

double loss_and_grad(const GaussianScene& scene, std::span<const FitView> views,
                     const LossSpec& spec, const SelectionConfig& cfg, GradientBundle* bundle,
                     const GradFlags& flags, int threads) {
    spec.validate();
    if (views.empty()) {
        throw ValidationError("loss_and_grad: no target views");
    }
    if (bundle) bundle->init(scene.size(), scene.attr_dim());

    double total = 0.0;
    const double inv_views = 1.0 / static_cast<double>(views.size());
    for (const auto& view : views) {
        ForwardResult fr = render_with_tape(scene, view.camera, cfg, threads);
        const auto& buf = fr.buffers;
        const double inv_px = 1.0 / static_cast<double>(buf.image.data.size());
        const double inv_pa = 1.0 / static_cast<double>(buf.alpha.data.size());

        Image d_image(buf.image.height, buf.image.width, buf.image.channels);
        Image d_alpha(buf.alpha.height, buf.alpha.width, 1, ChannelSemantics::Alpha);
        double loss = 0.0;
        if (spec.rgb_weight > 0.0) {
            for (size_t idx = 0; idx < buf.image.data.size(); ++idx) {
                const double diff = buf.image.data[idx] - view.image.data[idx];
                loss += spec.rgb_weight * diff * diff * inv_px;
                d_image.data[idx] = spec.rgb_weight * 2.0 * diff * inv_px * inv_views;
            }
        }
        if (spec.silhouette_weight > 0.0) {
            for (size_t idx = 0; idx < buf.alpha.data.size(); ++idx) {
                const double diff = buf.alpha.data[idx] - view.alpha.data[idx];
                loss += spec.silhouette_weight * diff * diff * inv_pa;
                d_alpha.data[idx] = spec.silhouette_weight * 2.0 * diff * inv_pa * inv_views;
            }
        }
        total += loss * inv_views;
        if (bundle) {
            GradientBundle partial = backward(fr.tape, d_image, d_alpha, flags);
            bundle->add(partial);
        }
    }
    return total;
}

namespace {

double silhouette_iou(const Image& alpha, const Image& target_alpha, double thr = 0.5) {
    int inter = 0;
    int uni = 0;
    for (size_t idx = 0; idx < alpha.data.size(); ++idx) {
        const bool a = alpha.data[idx] > thr;
        const bool b = target_alpha.data[idx] > thr;
        inter += (a && b) ? 1 : 0;
        uni += (a || b) ? 1 : 0;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / uni;
}

}  // namespace

FitReport fit_shape(GaussianScene& scene, const ShapeRegularizer& reg,
                    std::span<const FitView> targets, const LossSpec& spec, int iters,
                    int batch_views, const AdamConfig& adam, const SelectionConfig& cfg,
                    uint64_t seed, int threads) {
    spec.validate();
    if (targets.empty()) {
        throw ValidationError("fit_shape: no target views");
    }
    const int kcount = scene.size();
    const int dim = scene.attr_dim();
    batch_views = std::min<int>(batch_views, static_cast<int>(targets.size()));

    FitReport report;
    std::mt19937_64 rng(seed);
    AdamState state;
    std::vector<double> params(static_cast<size_t>(kcount) * (3 + dim));
    std::vector<double> grads(params.size());

    auto pack = [&] {
        for (int k = 0; k < kcount; ++k) {
            for (int d = 0; d < 3; ++d) params[k * 3 + d] = scene.kernels[k].center[d];
            for (int d = 0; d < dim; ++d)
                params[kcount * 3 + k * dim + d] = scene.kernels[k].attr[d];
        }
    };
    auto unpack = [&] {
        for (int k = 0; k < kcount; ++k) {
            for (int d = 0; d < 3; ++d) scene.kernels[k].center[d] = params[k * 3 + d];
            for (int d = 0; d < dim; ++d)
                scene.kernels[k].attr[d] = params[kcount * 3 + k * dim + d];
        }
    };
    pack();

    std::vector<int> order(targets.size());
    std::vector<Vec3> centers(kcount), reg_grad;
    std::vector<FitView> batch;
    GradientBundle bundle;

    for (int it = 0; it < iters; ++it) {
        // Sample a batch of views without replacement.
        for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        for (int b = 0; b < batch_views; ++b) {
            std::uniform_int_distribution<int> pick(b, static_cast<int>(order.size()) - 1);
            std::swap(order[b], order[pick(rng)]);
        }
        batch.clear();
        for (int b = 0; b < batch_views; ++b) batch.push_back(targets[order[b]]);

        double loss = loss_and_grad(scene, batch, spec, cfg, &bundle, {}, threads);

        for (int k = 0; k < kcount; ++k) centers[k] = scene.kernels[k].center;
        std::fill(grads.begin(), grads.end(), 0.0);
        for (int k = 0; k < kcount; ++k) {
            for (int d = 0; d < 3; ++d) grads[k * 3 + d] = bundle.d_center[k][d];
            for (int d = 0; d < dim; ++d)
                grads[kcount * 3 + k * dim + d] = bundle.d_attr[k][d];
        }
        if (spec.edge_weight > 0.0) {
            loss += spec.edge_weight * edge_reg(centers, reg, &reg_grad);
            for (int k = 0; k < kcount; ++k)
                for (int d = 0; d < 3; ++d) grads[k * 3 + d] += spec.edge_weight * reg_grad[k][d];
        }
        if (spec.laplacian_weight > 0.0) {
            loss += spec.laplacian_weight * laplacian_reg(centers, reg, &reg_grad);
            for (int k = 0; k < kcount; ++k)
                for (int d = 0; d < 3; ++d)
                    grads[k * 3 + d] += spec.laplacian_weight * reg_grad[k][d];
        }

        report.loss_trace.push_back(loss);
        report.iterations = it + 1;
        if (!std::isfinite(loss)) {
            report.diverged = true;
            break;
        }
        state.update(params, grads, adam);
        unpack();
    }

    // Final metrics over all target views.
    double iou = 0.0;
    for (const auto& view : targets) {
        RenderBuffers buf = render(scene, view.camera, cfg, threads);
        iou += silhouette_iou(buf.alpha, view.alpha);
    }
    report.metrics["mean_silhouette_iou"] = iou / static_cast<double>(targets.size());
    report.metrics["final_loss"] = loss_and_grad(scene, targets, spec, cfg, nullptr, {}, threads);
    return report;
}

TranslationFitResult fit_translation(GaussianScene& scene,
                                     const std::vector<std::vector<int>>& groups,
                                     const FitView& target, const LossSpec& spec, int iters,
                                     const AdamConfig& adam, const SelectionConfig& cfg,
                                     const GradFlags& flags, int threads) {
    spec.validate();
    if (groups.empty()) {
        throw ValidationError("fit_translation: no groups given");
    }
    for (const auto& g : groups) {
        for (int k : g) {
            if (k < 0 || k >= scene.size()) {
                throw ValidationError("fit_translation: group index out of range");
            }
        }
    }

    const std::vector<Vec3> base = [&] {
        std::vector<Vec3> c(scene.size());
        for (int k = 0; k < scene.size(); ++k) c[k] = scene.kernels[k].center;
        return c;
    }();

    TranslationFitResult result;
    result.translations.assign(groups.size(), Vec3::Zero());
    AdamState state;
    std::vector<double> params(groups.size() * 3, 0.0);
    std::vector<double> grads(params.size());
    const FitView* views = &target;
    GradientBundle bundle;

    for (int it = 0; it < iters; ++it) {
        for (size_t g = 0; g < groups.size(); ++g) {
            const Vec3 delta(params[g * 3], params[g * 3 + 1], params[g * 3 + 2]);
            for (int k : groups[g]) scene.kernels[k].center = base[k] + delta;
        }
        const double loss =
            loss_and_grad(scene, std::span<const FitView>(views, 1), spec, cfg, &bundle, flags,
                          threads);
        result.report.loss_trace.push_back(loss);
        result.report.iterations = it + 1;
        if (!std::isfinite(loss)) {
            result.report.diverged = true;
            break;
        }
        std::fill(grads.begin(), grads.end(), 0.0);
        for (size_t g = 0; g < groups.size(); ++g) {
            for (int k : groups[g]) {
                for (int d = 0; d < 3; ++d) grads[g * 3 + d] += bundle.d_center[k][d];
            }
        }
        state.update(params, grads, adam);
    }

    for (size_t g = 0; g < groups.size(); ++g) {
        result.translations[g] = Vec3(params[g * 3], params[g * 3 + 1], params[g * 3 + 2]);
        for (int k : groups[g]) scene.kernels[k].center = base[k] + result.translations[g];
    }
    return result;
}

PoseFitResult fit_pose(const GaussianScene& scene, const Image& target_image,
                       const Image& target_alpha, const Camera& camera_model,
                       std::span<const PoseStart> starts, const LossSpec& spec, int iters,
                       const AdamConfig& adam, const SelectionConfig& cfg, int threads) {
    spec.validate();
    if (starts.empty()) {
        throw ValidationError("fit_pose: no starting poses");
    }

    PoseFitResult result;
    result.start_losses.assign(starts.size(), std::numeric_limits<double>::infinity());
    double best = std::numeric_limits<double>::infinity();

    FitView view;
    view.image = target_image;
    view.alpha = target_alpha.data.empty()
                     ? Image(camera_model.height, camera_model.width, 1, ChannelSemantics::Alpha)
                     : target_alpha;
    const LossSpec pose_spec = [&] {
        LossSpec s = spec;
        if (target_alpha.data.empty()) s.silhouette_weight = 0.0;
        return s;
    }();

    for (size_t sidx = 0; sidx < starts.size(); ++sidx) {
        std::vector<double> params = {starts[sidx].omega.x(),       starts[sidx].omega.y(),
                                      starts[sidx].omega.z(),       starts[sidx].translation.x(),
                                      starts[sidx].translation.y(), starts[sidx].translation.z()};
        AdamState state;
        FitReport trace;
        GradientBundle bundle;
        // Best-loss iterate within this start, not the last one.
        double start_best = std::numeric_limits<double>::infinity();
        PoseStart start_pose = starts[sidx];

        for (int it = 0; it < iters; ++it) {
            const Vec3 omega(params[0], params[1], params[2]);
            view.camera = camera_model;
            view.camera.rotation = so3_exp(omega);
            view.camera.translation = Vec3(params[3], params[4], params[5]);

            const double loss = loss_and_grad(scene, std::span<const FitView>(&view, 1),
                                              pose_spec, cfg, &bundle, {}, threads);
            trace.loss_trace.push_back(loss);
            trace.iterations = it + 1;
            if (!std::isfinite(loss)) {
                trace.diverged = true;
                break;
            }
            if (loss < start_best) {
                start_best = loss;
                start_pose.omega = omega;
                start_pose.translation = view.camera.translation;
            }
            const Vec3 d_omega = so3_exp_gradient(omega, bundle.d_rotation);
            const double grads[6] = {d_omega.x(),
                                     d_omega.y(),
                                     d_omega.z(),
                                     bundle.d_translation.x(),
                                     bundle.d_translation.y(),
                                     bundle.d_translation.z()};
            state.update(params, std::span<const double>(grads, 6), adam);
        }

        result.start_losses[sidx] = start_best;
        if (start_best < best) {
            best = start_best;
            result.best_start = static_cast<int>(sidx);
            result.best_pose = start_pose;
            result.report = std::move(trace);
        }
    }

    result.best_camera = camera_model;
    result.best_camera.rotation = so3_exp(result.best_pose.omega);
    result.best_camera.translation = result.best_pose.translation;
    result.report.metrics["best_loss"] = best;
    result.report.metrics["best_start"] = static_cast<double>(result.best_start);
    return result;
}

double rotation_error(const Mat3& r_pred, const Mat3& r_gt) {
    auto check = [](const Mat3& r, const char* name) {
        if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
            std::abs(r.determinant() - 1.0) > 1e-6) {
            throw ValidationError(std::string("rotation_error: ") + name + " is not a rotation");
        }
    };
    check(r_pred, "r_pred");
    check(r_gt, "r_gt");
    const double cos_theta = std::clamp(((r_pred.transpose() * r_gt).trace() - 1.0) * 0.5, -1.0, 1.0);
    return std::acos(cos_theta);
}

}  // namespace gvr
