#include "gvr/bench.hpp"
#include "gvr/fit.hpp"
#include "gvr/image_io.hpp"
#include "gvr/scene_io.hpp"
#include "gvr/shapes.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Thrown for configuration problems discovered after flag parsing.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_file(const fs::path& path, const std::string& what) {
    if (!fs::exists(path)) {
        throw ConfigError(what + " file does not exist: " + path.string());
    }
}

json load_config(const fs::path& path) {
    require_file(path, "config");
    std::ifstream in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

gvr::SelectionConfig selection_from_json(const json& j) {
    gvr::SelectionConfig sel;
    if (j.contains("selection")) {
        const auto& s = j.at("selection");
        sel.eta = s.value("eta", sel.eta);
        sel.k_prime = s.value("k_prime", sel.k_prime);
        sel.coarse_enabled = s.value("coarse", sel.coarse_enabled);
    }
    return sel;
}

gvr::LossSpec loss_from_json(const json& j) {
    gvr::LossSpec spec;
    if (j.contains("loss")) {
        const auto& l = j.at("loss");
        spec.rgb_weight = l.value("rgb", spec.rgb_weight);
        spec.silhouette_weight = l.value("silhouette", spec.silhouette_weight);
        spec.edge_weight = l.value("edge", spec.edge_weight);
        spec.laplacian_weight = l.value("laplacian", spec.laplacian_weight);
    }
    return spec;
}

gvr::Image load_image_any(const fs::path& path) {
    require_file(path, "image");
    if (path.extension() == ".pfm") return gvr::read_pfm(path);
    return gvr::read_png(path);
}

void write_report_json(const gvr::FitReport& report, const json& extra, const fs::path& path) {
    json j = extra;
    j["iterations"] = report.iterations;
    j["diverged"] = report.diverged;
    j["loss_trace"] = report.loss_trace;
    for (const auto& [key, value] : report.metrics) j["metrics"][key] = value;
    gvr::atomic_write_text(path, j.dump(2) + "\n");
}

void write_loss_csv(const gvr::FitReport& report, const fs::path& path) {
    std::string csv = "iteration,loss\n";
    for (size_t i = 0; i < report.loss_trace.size(); ++i) {
        csv += std::to_string(i) + "," + std::to_string(report.loss_trace[i]) + "\n";
    }
    gvr::atomic_write_text(path, csv);
}

std::vector<gvr::FitView> render_orbit_targets(const gvr::GaussianScene& scene, int views,
                                               int image_size, double distance, double elevation,
                                               double focal, const gvr::Vec3& center,
                                               const gvr::SelectionConfig& sel, int threads) {
    std::vector<gvr::FitView> targets;
    targets.reserve(views);
    for (int v = 0; v < views; ++v) {
        const double az = 2.0 * M_PI * v / views;
        gvr::FitView view;
        view.camera = gvr::make_orbit_camera(az, elevation, distance, center, image_size,
                                             image_size, focal);
        gvr::RenderBuffers buf = gvr::render(scene, view.camera, sel, threads);
        view.image = std::move(buf.image);
        view.alpha = std::move(buf.alpha);
        targets.push_back(std::move(view));
    }
    return targets;
}

int cmd_render(const fs::path& scene_path, const fs::path& camera_path, const fs::path& out_png,
               const fs::path& out_pfm, const fs::path& alpha_pfm, const fs::path& weights_pfm,
               const gvr::SelectionConfig& sel, double tau_override, int threads) {
    require_file(scene_path, "scene");
    require_file(camera_path, "camera");
    gvr::GaussianScene scene = gvr::load_scene_json(scene_path);
    const gvr::Camera camera = gvr::load_camera_json(camera_path);
    if (tau_override >= 0.0) scene.tau = tau_override;

    const gvr::RenderBuffers buf = gvr::render(scene, camera, sel, threads);
    if (!out_png.empty()) gvr::write_png(buf.image, out_png);
    if (!out_pfm.empty()) gvr::write_pfm(buf.image, out_pfm);
    if (!alpha_pfm.empty()) gvr::write_pfm(buf.alpha, alpha_pfm);
    if (!weights_pfm.empty()) {
        gvr::Image wsum(camera.height, camera.width, 1, gvr::ChannelSemantics::Feature);
        for (size_t p = 0; p < buf.weight_store.size(); ++p) {
            double total = 0.0;
            for (const auto& [k, w] : buf.weight_store[p]) total += w;
            wsum.data[p] = total;
        }
        gvr::write_pfm(wsum, weights_pfm);
    }
    return kExitOk;
}

int cmd_convert(const fs::path& input, const fs::path& output, const gvr::ConvertConfig& cfg,
                double tau) {
    require_file(input, "input");
    gvr::GaussianScene scene;
    const auto ext = input.extension();
    if (ext == ".obj") {
        scene = gvr::mesh_to_gaussians(gvr::load_obj(input), cfg);
    } else if (ext == ".ply") {
        scene = gvr::pointcloud_to_gaussians(gvr::load_ply(input), cfg);
    } else {
        throw ConfigError("unsupported input format (want .obj or .ply): " + input.string());
    }
    scene.tau = tau;
    gvr::save_scene_json(scene, output);
    std::cout << "wrote " << scene.size() << " kernels to " << output.string() << "\n";
    return kExitOk;
}

int cmd_bench(const std::vector<int>& kernels, const std::vector<int>& sizes, int repeats,
              bool no_coarse, const fs::path& out, int threads) {
    gvr::BenchConfig cfg;
    if (!kernels.empty()) cfg.kernel_counts = kernels;
    if (!sizes.empty()) cfg.image_sizes = sizes;
    cfg.repeats = repeats;
    cfg.selection.coarse_enabled = !no_coarse;
    cfg.threads = threads;

    const auto results = gvr::run_benchmark(cfg);
    json j;
    j["version"] = 1;
    j["coarse"] = !no_coarse;
    j["results"] = json::array();
    for (const auto& r : results) {
        json jr;
        jr["kernel_count"] = r.kernel_count;
        jr["image_size"] = r.image_size;
        jr["kernels_per_pixel_mean"] = r.kernels_per_pixel_mean;
        jr["kernels_per_pixel_max"] = r.kernels_per_pixel_max;
        jr["images_per_second"] = r.images_per_second;
        jr["wall_seconds"] = r.wall_seconds;
        jr["repeats"] = r.repeats;
        j["results"].push_back(jr);
        std::cout << r.kernel_count << " kernels @ " << r.image_size << "x" << r.image_size
                  << ": " << r.images_per_second << " images/s (mean " << r.kernels_per_pixel_mean
                  << " kernels/px)\n";
    }
    if (!out.empty()) gvr::atomic_write_text(out, j.dump(2) + "\n");
    return kExitOk;
}

int cmd_gradcheck(const fs::path& scene_path, const fs::path& camera_path, double h, double tol,
                  uint64_t seed, const fs::path& out, const gvr::SelectionConfig& sel, int threads) {
    require_file(scene_path, "scene");
    require_file(camera_path, "camera");
    const gvr::GaussianScene scene = gvr::load_scene_json(scene_path);
    const gvr::Camera camera = gvr::load_camera_json(camera_path);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    gvr::ScalarLoss loss;
    loss.target_image = gvr::Image(camera.height, camera.width, scene.attr_dim());
    loss.target_alpha = gvr::Image(camera.height, camera.width, 1, gvr::ChannelSemantics::Alpha);
    for (auto& v : loss.target_image.data) v = uni(rng);
    for (auto& v : loss.target_alpha.data) v = uni(rng);

    const gvr::GradCheckReport report = gvr::gradcheck(scene, camera, sel, loss, h, tol, threads);

    json j;
    j["version"] = 1;
    j["h"] = h;
    j["tol"] = tol;
    j["max_rel_err"] = report.max_rel_err;
    j["total_checked"] = report.total_checked;
    j["total_skipped"] = report.total_skipped;
    for (const auto& [name, entry] : report.per_class) {
        j["classes"][name] = {{"max_rel_err", entry.max_rel_err},
                              {"checked", entry.checked},
                              {"skipped_boundary", entry.skipped_boundary}};
        std::cout << name << ": max rel err " << entry.max_rel_err << " over " << entry.checked
                  << " params (" << entry.skipped_boundary << " skipped)\n";
    }
    if (!out.empty()) gvr::atomic_write_text(out, j.dump(2) + "\n");

    const bool pass = report.passed(tol);
    std::cout << (pass ? "PASS" : "FAIL") << " max rel err " << report.max_rel_err << " (tol "
              << tol << ")\n";
    return pass ? kExitOk : kExitRuntime;
}

int cmd_fit_shape(const fs::path& config_path, uint64_t seed_override, bool seed_given,
                  const fs::path& out, const fs::path& out_scene, int threads) {
    const json cfg = load_config(config_path);
    const auto sel = selection_from_json(cfg);
    const auto spec = loss_from_json(cfg);
    const uint64_t seed = seed_given ? seed_override : cfg.value("seed", 0);

    const auto& jt = cfg.at("targets");
    const fs::path target_scene_path = jt.at("scene").get<std::string>();
    require_file(target_scene_path, "target scene");
    const gvr::GaussianScene target_scene = gvr::load_scene_json(target_scene_path);
    const auto targets = render_orbit_targets(
        target_scene, jt.value("views", 20), jt.value("image_size", 48), jt.value("distance", 4.0),
        jt.value("elevation", 0.3), jt.value("focal", 60.0),
        gvr::Vec3(0, 0, 0), sel, threads);

    const auto& ji = cfg.at("init");
    gvr::TriangleMesh sphere = gvr::make_icosphere(ji.value("icosphere_level", 3),
                                                   ji.value("radius", 1.0));
    gvr::ConvertConfig conv;
    conv.zeta = ji.value("zeta", 0.5);
    gvr::GaussianScene scene = gvr::mesh_to_gaussians(sphere, conv);
    scene.tau = target_scene.tau;

    std::vector<gvr::Vec3> rest(scene.size());
    for (int k = 0; k < scene.size(); ++k) rest[k] = scene.kernels[k].center;
    const auto reg = gvr::ShapeRegularizer::make(gvr::mesh_edges(sphere), rest);

    gvr::AdamConfig adam;
    adam.lr = cfg.value("lr", 0.01);
    const gvr::FitReport report =
        gvr::fit_shape(scene, reg, targets, spec, cfg.value("iters", 2000),
                       cfg.value("batch_views", 5), adam, sel, seed, threads);

    json extra;
    extra["task"] = "fit-shape";
    extra["seed"] = seed;
    write_report_json(report, extra, out);
    if (!out.empty()) write_loss_csv(report, fs::path(out).replace_extension(".csv"));
    if (!out_scene.empty()) gvr::save_scene_json(scene, out_scene);
    std::cout << "fit-shape finished: iters=" << report.iterations
              << " final_loss=" << report.metrics.at("final_loss")
              << " mean_iou=" << report.metrics.at("mean_silhouette_iou") << "\n";
    return report.diverged ? kExitRuntime : kExitOk;
}

int cmd_fit_translation(const fs::path& config_path, uint64_t seed_override, bool seed_given,
                        const fs::path& out, int threads) {
    const json cfg = load_config(config_path);
    const auto sel = selection_from_json(cfg);
    const auto spec = loss_from_json(cfg);
    (void)seed_override;
    (void)seed_given;

    std::vector<gvr::GaussianScene> parts;
    for (const auto& jp : cfg.at("parts")) {
        const fs::path p = jp.get<std::string>();
        require_file(p, "part scene");
        parts.push_back(gvr::load_scene_json(p));
    }
    if (parts.empty()) throw ConfigError("fit-translation needs at least one part");

    gvr::GaussianScene scene;
    scene.tau = parts.front().tau;
    std::vector<std::vector<int>> groups;
    for (const auto& part : parts) {
        std::vector<int> group;
        for (const auto& k : part.kernels) {
            group.push_back(scene.size());
            scene.kernels.push_back(k);
        }
        groups.push_back(std::move(group));
    }

    const fs::path camera_path = cfg.at("camera").get<std::string>();
    require_file(camera_path, "camera");
    gvr::FitView target;
    target.camera = gvr::load_camera_json(camera_path);

    std::vector<gvr::Vec3> gt_offsets(groups.size(), gvr::Vec3::Zero());
    if (cfg.contains("gt_offsets")) {
        const auto& jg = cfg.at("gt_offsets");
        for (size_t g = 0; g < groups.size() && g < jg.size(); ++g) {
            const auto v = jg[g].get<std::vector<double>>();
            gt_offsets[g] = gvr::Vec3(v[0], v[1], v[2]);
        }
    }

    if (cfg.contains("target_image")) {
        target.image = load_image_any(cfg.at("target_image").get<std::string>());
        target.alpha = gvr::Image(target.camera.height, target.camera.width, 1,
                                  gvr::ChannelSemantics::Alpha);
    } else {
        // Synthesize the target from the ground-truth offsets.
        gvr::GaussianScene gt = scene;
        for (size_t g = 0; g < groups.size(); ++g) {
            for (int k : groups[g]) gt.kernels[k].center += gt_offsets[g];
        }
        gvr::RenderBuffers buf = gvr::render(gt, target.camera, sel, threads);
        target.image = std::move(buf.image);
        target.alpha = std::move(buf.alpha);
    }

    if (cfg.contains("init_offsets")) {
        const auto& jo = cfg.at("init_offsets");
        for (size_t g = 0; g < groups.size() && g < jo.size(); ++g) {
            const auto v = jo[g].get<std::vector<double>>();
            for (int k : groups[g]) scene.kernels[k].center += gvr::Vec3(v[0], v[1], v[2]);
        }
    }

    gvr::AdamConfig adam;
    adam.lr = cfg.value("lr", 0.05);
    const auto result = gvr::fit_translation(scene, groups, target, spec, cfg.value("iters", 300),
                                             adam, sel, {}, threads);

    json extra;
    extra["task"] = "fit-translation";
    extra["translations"] = json::array();
    for (size_t g = 0; g < result.translations.size(); ++g) {
        const gvr::Vec3& t = result.translations[g];
        extra["translations"].push_back({t.x(), t.y(), t.z()});
        if (cfg.contains("init_offsets")) {
            const auto jo = cfg.at("init_offsets")[g].get<std::vector<double>>();
            const gvr::Vec3 total = gvr::Vec3(jo[0], jo[1], jo[2]) + t;
            extra["residual_error"].push_back((total - gt_offsets[g]).norm());
        }
    }
    write_report_json(result.report, extra, out);
    write_loss_csv(result.report, fs::path(out).replace_extension(".csv"));
    std::cout << "fit-translation finished: iters=" << result.report.iterations << " final loss="
              << (result.report.loss_trace.empty() ? 0.0 : result.report.loss_trace.back())
              << "\n";
    return result.report.diverged ? kExitRuntime : kExitOk;
}

int cmd_fit_pose(const fs::path& config_path, uint64_t seed_override, bool seed_given,
                 const fs::path& out, int threads) {
    const json cfg = load_config(config_path);
    const auto sel = selection_from_json(cfg);
    gvr::LossSpec spec = loss_from_json(cfg);
    (void)seed_override;
    (void)seed_given;

    const fs::path scene_path = cfg.at("scene").get<std::string>();
    require_file(scene_path, "scene");
    const gvr::GaussianScene scene = gvr::load_scene_json(scene_path);
    const fs::path camera_path = cfg.at("camera").get<std::string>();
    require_file(camera_path, "camera");
    const gvr::Camera camera_model = gvr::load_camera_json(camera_path);

    gvr::Image target_image;
    gvr::Image target_alpha;
    if (cfg.contains("target_image")) {
        target_image = load_image_any(cfg.at("target_image").get<std::string>());
        spec.silhouette_weight = 0.0;
    } else {
        // The camera file carries the ground-truth extrinsics; synthesize.
        gvr::RenderBuffers buf = gvr::render(scene, camera_model, sel, threads);
        target_image = std::move(buf.image);
        target_alpha = std::move(buf.alpha);
    }

    std::vector<gvr::PoseStart> starts;
    if (cfg.contains("starts")) {
        for (const auto& js : cfg.at("starts")) {
            gvr::PoseStart s;
            const auto w = js.at("omega").get<std::vector<double>>();
            const auto t = js.at("translation").get<std::vector<double>>();
            s.omega = gvr::Vec3(w[0], w[1], w[2]);
            s.translation = gvr::Vec3(t[0], t[1], t[2]);
            starts.push_back(s);
        }
    } else {
        // Ring of azimuth starts around the ground-truth pose.
        const int n = cfg.value("azimuth_starts", 8);
        const gvr::Vec3 omega_gt = gvr::so3_log(camera_model.rotation);
        for (int i = 0; i < n; ++i) {
            gvr::PoseStart s;
            const double az = 2.0 * M_PI * i / n;
            s.omega = gvr::so3_log(gvr::so3_exp(gvr::Vec3(0, az, 0)) * gvr::so3_exp(omega_gt));
            s.translation = camera_model.translation;
            starts.push_back(s);
        }
    }

    gvr::AdamConfig adam;
    adam.lr = cfg.value("lr", 0.05);
    const auto result = gvr::fit_pose(scene, target_image, target_alpha, camera_model, starts,
                                      spec, cfg.value("iters", 300), adam, sel, threads);

    json extra;
    extra["task"] = "fit-pose";
    extra["best_start"] = result.best_start;
    extra["best_omega"] = {result.best_pose.omega.x(), result.best_pose.omega.y(),
                           result.best_pose.omega.z()};
    extra["best_translation"] = {result.best_pose.translation.x(),
                                 result.best_pose.translation.y(),
                                 result.best_pose.translation.z()};
    if (!cfg.contains("target_image")) {
        extra["rotation_error_rad"] =
            gvr::rotation_error(result.best_camera.rotation, camera_model.rotation);
    }
    write_report_json(result.report, extra, out);
    write_loss_csv(result.report, fs::path(out).replace_extension(".csv"));
    std::cout << "fit-pose finished: best start " << result.best_start << " loss "
              << result.report.metrics.at("best_loss") << "\n";
    return result.report.diverged ? kExitRuntime : kExitOk;
}

int cmd_extract_texture(const fs::path& image_path, const fs::path& scene_path,
                        const fs::path& camera_path, const fs::path& out, bool normalized,
                        const gvr::SelectionConfig& sel, int threads) {
    require_file(scene_path, "scene");
    require_file(camera_path, "camera");
    const gvr::Image observed = load_image_any(image_path);
    const gvr::GaussianScene scene = gvr::load_scene_json(scene_path);
    const gvr::Camera camera = gvr::load_camera_json(camera_path);

    const auto attrs = gvr::sample_attributes(observed, scene, camera, sel, normalized, threads);
    gvr::save_attrs_json(attrs, out);
    std::cout << "sampled " << attrs.attrs.size() << " kernels, " << attrs.masked_count()
              << " masked (support < " << gvr::kSupportEps << ")\n";
    return kExitOk;
}

int cmd_rerender(const fs::path& attrs_path, const fs::path& scene_path,
                 const fs::path& camera_path, const fs::path& out_png, const fs::path& out_pfm,
                 const gvr::SelectionConfig& sel, int threads) {
    require_file(attrs_path, "attrs");
    require_file(scene_path, "scene");
    require_file(camera_path, "camera");
    const auto attrs = gvr::load_attrs_json(attrs_path);
    const gvr::GaussianScene scene = gvr::load_scene_json(scene_path);
    const gvr::Camera camera = gvr::load_camera_json(camera_path);

    const gvr::RenderBuffers buf = gvr::resynthesize(attrs, scene, camera, sel, threads);
    if (!out_png.empty()) gvr::write_png(buf.image, out_png);
    if (!out_pfm.empty()) gvr::write_pfm(buf.image, out_pfm);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentiable volume renderer for Gaussian ellipsoid scenes"};
    app.require_subcommand(1);
    app.fallthrough();

    int threads = 0;
    uint64_t seed = 0;
    bool seed_given = false;
    app.add_option("--threads", threads, "Worker thread cap (GVR_THREADS env overrides)");
    auto* seed_opt = app.add_option("--seed", seed, "Random seed");

    gvr::SelectionConfig sel;
    bool no_coarse = false;
    auto add_selection_flags = [&](CLI::App* cmd) {
        cmd->add_option("--eta", sel.eta, "Peak-density threshold");
        cmd->add_option("--k-prime", sel.k_prime, "Max kernels blended per ray");
        cmd->add_flag("--no-coarse", no_coarse, "Disable the coarse selection stage");
    };

    // render
    std::string scene_path, camera_path, out_png, out_pfm, alpha_pfm, weights_pfm;
    double tau_override = -1.0;
    auto* render_cmd = app.add_subcommand("render", "Render a scene to image files");
    render_cmd->add_option("--scene", scene_path, "Scene JSON")->required();
    render_cmd->add_option("--camera", camera_path, "Camera JSON")->required();
    render_cmd->add_option("--out", out_png, "Output PNG");
    render_cmd->add_option("--out-pfm", out_pfm, "Output float color PFM");
    render_cmd->add_option("--alpha-pfm", alpha_pfm, "Output float alpha PFM");
    render_cmd->add_option("--weights-pfm", weights_pfm, "Output per-pixel weight-sum PFM");
    render_cmd->add_option("--tau", tau_override, "Override scene absorption coefficient");
    add_selection_flags(render_cmd);

    // convert
    std::string conv_in, conv_out;
    gvr::ConvertConfig conv_cfg;
    double conv_tau = 1.0;
    auto* convert_cmd = app.add_subcommand("convert", "Convert OBJ/PLY to a Gaussian scene");
    convert_cmd->add_option("--in", conv_in, "Input .obj or .ply")->required();
    convert_cmd->add_option("--out", conv_out, "Output scene JSON")->required();
    convert_cmd->add_option("--zeta", conv_cfg.zeta, "Coverage rate in (0,1)");
    convert_cmd->add_option("--flatten", conv_cfg.flatten_rate, "Flatten rate in (0,1]");
    convert_cmd->add_option("--neighbors", conv_cfg.neighbors, "Nearest neighbors (point clouds)");
    convert_cmd->add_option("--tau", conv_tau, "Scene absorption coefficient");

    // bench
    std::vector<int> bench_kernels, bench_sizes;
    int bench_repeats = 3;
    std::string bench_out;
    auto* bench_cmd = app.add_subcommand("bench", "Rendering throughput benchmark");
    bench_cmd->add_option("--kernels", bench_kernels, "Kernel counts");
    bench_cmd->add_option("--sizes", bench_sizes, "Image sizes");
    bench_cmd->add_option("--repeats", bench_repeats, "Timed repeats per configuration");
    bench_cmd->add_option("--out", bench_out, "Output JSON");
    bench_cmd->add_flag("--no-coarse", no_coarse, "Disable the coarse selection stage");

    // gradcheck
    std::string gc_scene, gc_camera, gc_out;
    double gc_h = 1e-4, gc_tol = 1e-3;
    auto* gc_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient verification");
    gc_cmd->add_option("--scene", gc_scene, "Scene JSON")->required();
    gc_cmd->add_option("--camera", gc_camera, "Camera JSON")->required();
    gc_cmd->add_option("--fd-step", gc_h, "Finite-difference step");
    gc_cmd->add_option("--tol", gc_tol, "Max relative error tolerance");
    gc_cmd->add_option("--out", gc_out, "Report JSON");
    add_selection_flags(gc_cmd);

    // fit commands
    std::string fit_config, fit_out = "fit_report.json", fit_out_scene;
    auto* fs_cmd = app.add_subcommand("fit-shape", "Multi-view shape and color fit");
    fs_cmd->add_option("--config", fit_config, "Fit config JSON")->required();
    fs_cmd->add_option("--out", fit_out, "Report JSON (CSV written alongside)");
    fs_cmd->add_option("--out-scene", fit_out_scene, "Fitted scene JSON");

    auto* ft_cmd = app.add_subcommand("fit-translation", "Per-group translation fit");
    ft_cmd->add_option("--config", fit_config, "Fit config JSON")->required();
    ft_cmd->add_option("--out", fit_out, "Report JSON (CSV written alongside)");

    auto* fp_cmd = app.add_subcommand("fit-pose", "Camera pose fit with multi-start");
    fp_cmd->add_option("--config", fit_config, "Fit config JSON")->required();
    fp_cmd->add_option("--out", fit_out, "Report JSON (CSV written alongside)");

    // extract-texture / rerender
    std::string tex_image, tex_out = "attrs.json";
    bool tex_normalized = false;
    auto* tex_cmd = app.add_subcommand("extract-texture", "Sample per-kernel attributes from an image");
    tex_cmd->add_option("--image", tex_image, "Observed image (PNG or PFM)")->required();
    tex_cmd->add_option("--scene", scene_path, "Scene JSON")->required();
    tex_cmd->add_option("--camera", camera_path, "Camera JSON")->required();
    tex_cmd->add_option("--out", tex_out, "Output attrs JSON");
    tex_cmd->add_flag("--normalized", tex_normalized, "Use per-pixel normalized weights");
    add_selection_flags(tex_cmd);

    std::string rr_attrs;
    auto* rr_cmd = app.add_subcommand("rerender", "Render a scene with sampled attributes");
    rr_cmd->add_option("--attrs", rr_attrs, "Attrs JSON")->required();
    rr_cmd->add_option("--scene", scene_path, "Scene JSON")->required();
    rr_cmd->add_option("--camera", camera_path, "Camera JSON")->required();
    rr_cmd->add_option("--out", out_png, "Output PNG");
    rr_cmd->add_option("--out-pfm", out_pfm, "Output float color PFM");
    add_selection_flags(rr_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    seed_given = seed_opt->count() > 0;
    sel.coarse_enabled = !no_coarse;

    try {
        if (render_cmd->parsed()) {
            return cmd_render(scene_path, camera_path, out_png, out_pfm, alpha_pfm, weights_pfm,
                              sel, tau_override, threads);
        }
        if (convert_cmd->parsed()) {
            return cmd_convert(conv_in, conv_out, conv_cfg, conv_tau);
        }
        if (bench_cmd->parsed()) {
            return cmd_bench(bench_kernels, bench_sizes, bench_repeats, no_coarse, bench_out,
                             threads);
        }
        if (gc_cmd->parsed()) {
            return cmd_gradcheck(gc_scene, gc_camera, gc_h, gc_tol, seed, gc_out, sel, threads);
        }
        if (fs_cmd->parsed()) {
            return cmd_fit_shape(fit_config, seed, seed_given, fit_out, fit_out_scene, threads);
        }
        if (ft_cmd->parsed()) {
            return cmd_fit_translation(fit_config, seed, seed_given, fit_out, threads);
        }
        if (fp_cmd->parsed()) {
            return cmd_fit_pose(fit_config, seed, seed_given, fit_out, threads);
        }
        if (tex_cmd->parsed()) {
            return cmd_extract_texture(tex_image, scene_path, camera_path, tex_out, tex_normalized,
                                       sel, threads);
        }
        if (rr_cmd->parsed()) {
            return cmd_rerender(rr_attrs, scene_path, camera_path, out_png, out_pfm, sel, threads);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const gvr::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
