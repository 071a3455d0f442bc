#include "gvr/grad.hpp"

#include "gvr/parallel.hpp"

#include <cmath>
#include <functional>

namespace gvr {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

// Standard normal CDF and PDF.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865476); }
inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

void GradientBundle::init(int kernel_count, int attr_dim) {
    d_center.assign(kernel_count, Vec3::Zero());
    d_inv_cov.assign(kernel_count, Mat3::Zero());
    d_attr.assign(kernel_count, VecX::Zero(attr_dim));
    d_rotation.setZero();
    d_translation.setZero();
}

void GradientBundle::add(const GradientBundle& other) {
    for (size_t k = 0; k < d_center.size(); ++k) {
        d_center[k] += other.d_center[k];
        d_inv_cov[k] += other.d_inv_cov[k];
        d_attr[k] += other.d_attr[k];
    }
    d_rotation += other.d_rotation;
    d_translation += other.d_translation;
}

ForwardResult render_with_tape(const GaussianScene& scene, const Camera& camera,
                               const SelectionConfig& cfg, int threads) {
    ForwardResult fr;
    fr.tape.scene = scene;
    fr.tape.camera = camera;
    fr.tape.cfg = cfg;
    fr.tape.threads = threads;
    fr.buffers = detail::render_core(scene, camera, cfg, threads, &fr.tape.traced, &fr.tape.cam_scene);
    return fr;
}

GradientBundle backward(const Tape& tape, const Image& d_image, const Image& d_alpha,
                        const GradFlags& flags) {
    const Camera& camera = tape.camera;
    const int h = camera.height;
    const int w = camera.width;
    const int dim = tape.scene.attr_dim();
    const int kcount = tape.scene.size();
    const double tau = tape.scene.tau;

    if (d_image.height != h || d_image.width != w || d_image.channels != dim) {
        throw ValidationError("backward: d_image shape does not match the forward render");
    }
    if (d_alpha.height != h || d_alpha.width != w || d_alpha.channels != 1) {
        throw ValidationError("backward: d_alpha shape does not match the forward render");
    }

    const int workers = resolve_threads(tape.threads);
    std::vector<GradientBundle> partial(std::max(1, std::min(workers, h)));

    parallel_for_partitions(h, workers, [&](int worker, int row_begin, int row_end) {
        GradientBundle& acc = partial[worker];
        acc.init(kcount, dim);

        // Scratch per selected kernel.
        std::vector<double> peak, trans, cdf_a, d_peak, d_l, d_q, d_sigma;

        for (int i = row_begin; i < row_end; ++i) {
            for (int j = 0; j < w; ++j) {
                const auto& sel = tape.traced[static_cast<size_t>(i) * w + j];
                const size_t n = sel.size();
                if (n == 0) continue;

                peak.assign(n, 0.0);
                double total_peak = 0.0;
                for (size_t k = 0; k < n; ++k) {
                    peak[k] = std::exp(sel[k].q);
                    total_peak += peak[k];
                }
                trans.assign(n, 0.0);
                for (size_t k = 0; k < n; ++k) {
                    double a = 0.0;
                    for (size_t m = 0; m < n; ++m) {
                        a += peak[m] * normal_cdf((sel[k].l - sel[m].l) / sel[m].sigma);
                    }
                    trans[k] = std::exp(-tau * a);
                }

                const double galpha = d_alpha.at(i, j, 0);

                d_peak.assign(n, 0.0);
                d_l.assign(n, 0.0);
                d_q.assign(n, 0.0);
                d_sigma.assign(n, 0.0);

                if (flags.through_transmittance && galpha != 0.0) {
                    const double d_total = galpha * tau * std::exp(-tau * total_peak);
                    for (size_t m = 0; m < n; ++m) d_peak[m] += d_total;
                }

                for (size_t k = 0; k < n; ++k) {
                    const VecX& attr = tape.scene.kernels[sel[k].kernel_index].attr;
                    double d_weight = 0.0;
                    for (int c = 0; c < dim; ++c) d_weight += d_image.at(i, j, c) * attr[c];

                    const double weight = trans[k] * peak[k];
                    if (weight != 0.0 || d_weight != 0.0) {
                        VecX& da = acc.d_attr[sel[k].kernel_index];
                        for (int c = 0; c < dim; ++c) da[c] += weight * d_image.at(i, j, c);
                    }
                    if (d_weight == 0.0) continue;

                    if (flags.through_density) d_peak[k] += d_weight * trans[k];
                    if (flags.through_transmittance) {
                        const double d_acc = -tau * trans[k] * (d_weight * peak[k]);
                        if (d_acc != 0.0) {
                            for (size_t m = 0; m < n; ++m) {
                                const double u = sel[k].l - sel[m].l;
                                const double z = u / sel[m].sigma;
                                d_peak[m] += d_acc * normal_cdf(z);
                                const double d_cdf = d_acc * peak[m];
                                const double pdf = normal_pdf(z) / sel[m].sigma;
                                d_l[k] += d_cdf * pdf;
                                d_l[m] -= d_cdf * pdf;
                                d_sigma[m] -= d_cdf * pdf * z;
                            }
                        }
                    }
                }

                for (size_t k = 0; k < n; ++k) d_q[k] += d_peak[k] * peak[k];

                // Chain (l, q, sigma) back to camera-space center and inv_cov.
                const Ray ray = pixel_ray(camera, i, j);
                for (size_t k = 0; k < n; ++k) {
                    if (d_l[k] == 0.0 && d_q[k] == 0.0 && d_sigma[k] == 0.0) continue;
                    const int idx = sel[k].kernel_index;
                    const auto& kern = tape.cam_scene.kernels[idx];
                    const Vec3& m = kern.center;
                    const Mat3& s = kern.inv_cov;
                    const Vec3& d = ray.dir;

                    const Vec3 sd = s * d;
                    const double a = d.dot(sd);
                    const Vec3 v = m - sel[k].l * d;
                    const Vec3 sv = s * v;

                    Vec3 dm = Vec3::Zero();
                    Mat3 ds = Mat3::Zero();
                    if (d_l[k] != 0.0) {
                        const double scale = d_l[k] / a;
                        dm += scale * sd;
                        ds += scale * (0.5 * (m * d.transpose() + d * m.transpose()) -
                                       sel[k].l * (d * d.transpose()));
                    }
                    if (d_q[k] != 0.0) {
                        dm -= d_q[k] * sv;
                        ds -= 0.5 * d_q[k] * (v * v.transpose());
                    }
                    if (d_sigma[k] != 0.0) {
                        const double d_a = -0.5 * std::pow(sel[k].sigma, 3) * d_sigma[k];
                        ds += d_a * (d * d.transpose());
                    }
                    acc.d_center[idx] += dm;
                    acc.d_inv_cov[idx] += ds;
                }
            }
        }
    });

    GradientBundle total;
    total.init(kcount, dim);
    for (const auto& p : partial) {
        if (!p.d_center.empty()) total.add(p);
    }

    // Camera-space -> object-space chain, once per kernel.
    GradientBundle out;
    out.init(kcount, dim);
    const Mat3& r = camera.rotation;
    for (int k = 0; k < kcount; ++k) {
        const Vec3& dm_cam = total.d_center[k];
        const Mat3& ds_cam = total.d_inv_cov[k];
        out.d_center[k] = r.transpose() * dm_cam;
        out.d_inv_cov[k] = r.transpose() * ds_cam * r;
        out.d_attr[k] = total.d_attr[k];
        out.d_translation += dm_cam;
        out.d_rotation += dm_cam * tape.scene.kernels[k].center.transpose();
        out.d_rotation += 2.0 * ds_cam * r * tape.scene.kernels[k].inv_cov;
    }
    return out;
}

double ScalarLoss::value(const RenderBuffers& buf, Image* d_image, Image* d_alpha) const {
    double loss = 0.0;
    if (d_image) *d_image = Image(buf.image.height, buf.image.width, buf.image.channels);
    if (d_alpha) *d_alpha = Image(buf.alpha.height, buf.alpha.width, 1, ChannelSemantics::Alpha);
    for (size_t idx = 0; idx < buf.image.data.size(); ++idx) {
        const double diff = buf.image.data[idx] - target_image.data[idx];
        loss += 0.5 * w_image * diff * diff;
        if (d_image) d_image->data[idx] = w_image * diff;
    }
    for (size_t idx = 0; idx < buf.alpha.data.size(); ++idx) {
        const double diff = buf.alpha.data[idx] - target_alpha.data[idx];
        loss += 0.5 * w_alpha * diff * diff;
        if (d_alpha) d_alpha->data[idx] = w_alpha * diff;
    }
    return loss;
}

namespace {

std::vector<std::vector<int>> selection_sets(const Tape& tape) {
    std::vector<std::vector<int>> sets(tape.traced.size());
    for (size_t p = 0; p < tape.traced.size(); ++p) {
        sets[p].reserve(tape.traced[p].size());
        for (const auto& t : tape.traced[p]) sets[p].push_back(t.kernel_index);
    }
    return sets;
}

struct FdEval {
    double loss = 0.0;
    std::vector<std::vector<int>> sets;
    bool valid = false;
};

double relative_error(double analytic, double numeric) {
    if (std::abs(analytic) < 1e-7 && std::abs(numeric) < 1e-7) return 0.0;
    return std::abs(analytic - numeric) / std::max(std::abs(analytic) + std::abs(numeric), 1e-6);
}

}  // namespace

GradCheckReport gradcheck(const GaussianScene& scene, const Camera& camera,
                          const SelectionConfig& cfg, const ScalarLoss& loss,
                          double h, double tol, int threads) {
    // Canonicalize the rotation through the axis-angle chart used for the
    // pose parameters.
    Camera cam = camera;
    const Vec3 omega0 = so3_log(camera.rotation);
    cam.rotation = so3_exp(omega0);

    ForwardResult base = render_with_tape(scene, cam, cfg, threads);
    Image d_image, d_alpha;
    loss.value(base.buffers, &d_image, &d_alpha);
    const GradientBundle bundle = backward(base.tape, d_image, d_alpha);
    const auto base_sets = selection_sets(base.tape);

    auto evaluate = [&](const GaussianScene& s, const Camera& c) -> FdEval {
        FdEval e;
        try {
            ForwardResult fr = render_with_tape(s, c, cfg, threads);
            e.loss = loss.value(fr.buffers, nullptr, nullptr);
            e.sets = selection_sets(fr.tape);
            e.valid = true;
        } catch (const ValidationError&) {
            e.valid = false;
        }
        return e;
    };

    GradCheckReport report;

    auto check_direction = [&](const std::string& cls, double analytic,
                               const std::function<void(GaussianScene&, Camera&, double)>& apply,
                               double step) {
        auto& entry = report.per_class[cls];
        GaussianScene sp = scene;
        Camera cp = cam;
        apply(sp, cp, step);
        const FdEval plus = evaluate(sp, cp);
        GaussianScene sm = scene;
        Camera cm = cam;
        apply(sm, cm, -step);
        const FdEval minus = evaluate(sm, cm);

        if (!plus.valid || !minus.valid || plus.sets != base_sets || minus.sets != base_sets) {
            ++entry.skipped_boundary;
            ++report.total_skipped;
            return;
        }
        const double numeric = (plus.loss - minus.loss) / (2.0 * step);
        const double rel = relative_error(analytic, numeric);
        ++entry.checked;
        ++report.total_checked;
        if (rel > entry.max_rel_err) {
            entry.max_rel_err = rel;
            entry.worst_analytic = analytic;
            entry.worst_numeric = numeric;
        }
        report.max_rel_err = std::max(report.max_rel_err, rel);
    };

    for (int k = 0; k < scene.size(); ++k) {
        for (int d = 0; d < 3; ++d) {
            const double step = h * std::max(1.0, std::abs(scene.kernels[k].center[d]));
            check_direction(
                "center", bundle.d_center[k][d],
                [k, d](GaussianScene& s, Camera&, double eps) { s.kernels[k].center[d] += eps; },
                step);
        }
        for (int i = 0; i < 3; ++i) {
            for (int j = i; j < 3; ++j) {
                const double analytic =
                    i == j ? bundle.d_inv_cov[k](i, i) : 2.0 * bundle.d_inv_cov[k](i, j);
                const double step = h * std::max(1.0, std::abs(scene.kernels[k].inv_cov(i, j)));
                check_direction(
                    "inv_cov", analytic,
                    [k, i, j](GaussianScene& s, Camera&, double eps) {
                        s.kernels[k].inv_cov(i, j) += eps;
                        if (i != j) s.kernels[k].inv_cov(j, i) += eps;
                    },
                    step);
            }
        }
        for (int d = 0; d < scene.attr_dim(); ++d) {
            check_direction(
                "attr", bundle.d_attr[k][d],
                [k, d](GaussianScene& s, Camera&, double eps) { s.kernels[k].attr[d] += eps; }, h);
        }
    }

    const Vec3 d_omega = so3_exp_gradient(omega0, bundle.d_rotation);
    for (int d = 0; d < 3; ++d) {
        check_direction(
            "pose", d_omega[d],
            [&omega0, d](GaussianScene&, Camera& c, double eps) {
                Vec3 w = omega0;
                w[d] += eps;
                c.rotation = so3_exp(w);
            },
            h);
    }
    for (int d = 0; d < 3; ++d) {
        const double step = h * std::max(1.0, std::abs(cam.translation[d]));
        check_direction(
            "pose", bundle.d_translation[d],
            [d](GaussianScene&, Camera& c, double eps) { c.translation[d] += eps; }, step);
    }

    return report;
}

}  // namespace gvr
