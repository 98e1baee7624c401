// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stereohdr/stereohdr.hpp"

using namespace stereohdr;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInfeasible = 2;
constexpr int kExitPipeline = 3;
constexpr int kExitBadInput = 4;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

fs::path config_dir_default(const std::string& leaf) {
    if (const char* env = std::getenv("STEREOHDR_CONFIG_DIR")) return fs::path(env) / leaf;
    return leaf;
}

std::vector<CameraModel> load_cameras(const fs::path& primary, const fs::path& secondary,
                                      bool single) {
    std::vector<CameraModel> cams;
    cams.push_back(camera_from_json(load_json(primary)));
    if (!single) cams.push_back(camera_from_json(load_json(secondary)));
    return cams;
}

PlannerConfig planner_config(const std::string& mode, std::optional<double> gamma_err,
                             std::optional<double> eta_db, int max_shots) {
    PlannerConfig cfg;
    cfg.gamma_err = mode == "hdr-only" ? 0.30 : 0.05;
    if (gamma_err) cfg.gamma_err = *gamma_err;
    cfg.eta = snr_from_db(eta_db.value_or(3.2));
    cfg.max_shots_per_camera = max_shots;
    return cfg;
}

SceneSpec scene_spec_from_file(const fs::path& path) {
    json j = load_json(path);
    SceneSpec spec;
    spec.width = j.value("width", 320);
    spec.height = j.value("height", 240);
    spec.seed = j.value("seed", uint64_t(1));
    spec.texture_amp = j.value("texture_amp", 0.45);
    if (j.contains("preset")) {
        SceneSpec preset = make_preset_scene_spec(j.at("preset").get<std::string>(), spec.seed,
                                                  spec.width, spec.height);
        preset.seed = spec.seed;
        if (j.contains("layer_disparities"))
            preset.layer_disparities = j.at("layer_disparities").get<std::vector<double>>();
        return preset;
    }
    spec.layer_disparities = j.at("layer_disparities").get<std::vector<double>>();
    spec.target_hist = load_histogram(path.parent_path() / j.at("target_hist").get<std::string>());
    return spec;
}

SyntheticScene load_or_make_scene(const fs::path& path) {
    if (fs::is_directory(path)) return load_scene(path);
    return make_scene(scene_spec_from_file(path));
}

// --- subcommand bodies ------------------------------------------------------

int cmd_plan(const fs::path& hist_path, const fs::path& cam1, const fs::path& cam2,
             const std::string& mode, std::optional<double> gamma_err,
             std::optional<double> eta_db, bool single_camera, int max_shots,
             const fs::path& out) {
    Timer timer;
    auto cams = load_cameras(cam1, cam2, single_camera);
    auto hist = load_histogram(hist_path);
    PlannerConfig cfg = planner_config(mode, gamma_err, eta_db, max_shots);
    CapturePlan p = plan(hist, cams, cfg);
    save_json(out, plan_to_json(p, cfg));

    RunManifest m;
    m.command = "plan";
    m.config = plan_to_json(p, cfg)["config"];
    m.config["mode"] = mode;
    m.inputs = {hist_path, cam1};
    if (!single_camera) m.inputs.push_back(cam2);
    m.outputs = {out};
    m.wall_ms = timer.ms();
    m.save(out.string() + ".manifest.json");

    std::cout << "plan: " << p.shots.size() << " shots, t_cap " << p.t_cap << " s, disparity err "
              << p.predicted_disp_err << ", worst SNR " << snr_to_db(p.worst_snr) << " dB\n";
    return kExitOk;
}

int cmd_make_scene(const fs::path& spec_path, std::optional<uint64_t> seed, const fs::path& out) {
    Timer timer;
    SceneSpec spec = scene_spec_from_file(spec_path);
    if (seed) spec.seed = *seed;
    SyntheticScene scene = make_scene(spec);
    save_scene(out, scene);

    RunManifest m;
    m.command = "make-scene";
    m.config = {{"width", spec.width}, {"height", spec.height}};
    m.seed = spec.seed;
    m.inputs = {spec_path};
    for (const char* f : {"log_radiance.pfm", "gt_disparity.pfm", "occlusion.pgm", "preview.png"})
        m.outputs.push_back(out / f);
    m.wall_ms = timer.ms();
    m.save(out / "manifest.json");
    std::cout << "scene: " << spec.width << "x" << spec.height << " -> " << out << "\n";
    return kExitOk;
}

int cmd_simulate(const fs::path& scene_path, const fs::path& plan_path, const fs::path& cam1,
                 const fs::path& cam2, uint64_t seed, bool dense_2stop, double eta_db,
                 const fs::path& out) {
    Timer timer;
    auto cams = load_cameras(cam1, cam2, false);
    SyntheticScene scene = load_or_make_scene(scene_path);
    double eta = snr_from_db(eta_db);

    std::vector<Shot> shots;
    if (dense_2stop) {
        PlannerConfig cfg;
        cfg.eta = eta;
        shots = make_dense_plan(scene.spec.target_hist, cams, 2, cfg).shots;
    } else {
        json pj = load_json(plan_path);
        double plan_eta = pj.contains("config") && pj["config"].contains("eta")
                              ? pj["config"]["eta"].get<double>()
                              : eta;
        shots = shots_from_json(pj, cams, plan_eta);
    }
    for (const auto& s : shots) {
        const CameraModel& cam = cams[size_t(s.camera) < cams.size() ? size_t(s.camera) : 0];
        bool iso_ok = false;
        for (double iso : cam.iso_set) iso_ok |= std::abs(iso - s.iso) < 1e-9;
        if (!iso_ok)
            throw BadInput("shot on " + std::string(to_string(s.camera)) + " uses unsupported ISO " +
                           std::to_string(s.iso));
        if (s.t < cam.t_min * (1 - 1e-9) || s.t > cam.t_max * (1 + 1e-9))
            throw Infeasible("shot exposure outside hardware range");
    }
    CaptureStacks stacks = capture_stack(scene, shots, cams, seed);
    save_stacks(out, stacks);

    RunManifest m;
    m.command = "simulate";
    m.config = {{"dense_2stop", dense_2stop}, {"eta_db", eta_db}};
    m.seed = seed;
    m.inputs = {cam1, cam2};
    if (!dense_2stop) m.inputs.push_back(plan_path);
    m.outputs = {out / "stack.json"};
    m.wall_ms = timer.ms();
    m.save(out / "manifest.json");
    std::cout << "simulated " << stacks.primary.size() << "+" << stacks.secondary.size()
              << " shots -> " << out << "\n";
    return kExitOk;
}

int cmd_estimate_hist(const fs::path& stack_dir, const fs::path& cam1, const fs::path& cam2,
                      double eta_db, const fs::path& out) {
    Timer timer;
    auto cams = load_cameras(cam1, cam2, false);
    CaptureStacks stacks = load_stacks(stack_dir);
    StackEstimateOptions opts;
    opts.eta = snr_from_db(eta_db);
    auto hist = estimate_from_stack(stacks, cams, opts);
    save_histogram(out, hist);

    RunManifest m;
    m.command = "estimate-hist";
    m.config = {{"eta_db", eta_db}};
    m.inputs = {stack_dir / "stack.json", cam1, cam2};
    m.outputs = {out};
    m.wall_ms = timer.ms();
    m.save(out.string() + ".manifest.json");
    std::cout << "histogram over [" << hist.support().lo << ", " << hist.support().hi << "] -> "
              << out << "\n";
    return kExitOk;
}

int cmd_reconstruct(const fs::path& stack_dir, const fs::path& cam1, const fs::path& cam2,
                    const fs::path& icrf1, const fs::path& icrf2, int iters, double eta_db,
                    uint64_t seed, const fs::path& gt_scene, const fs::path& out) {
    Timer timer;
    auto cams = load_cameras(cam1, cam2, false);
    CaptureStacks stacks = load_stacks(stack_dir);

    Icrf e1 = cams[0].icrf, e2 = cams[1].icrf;
    if (!icrf1.empty()) e1 = camera_from_json(load_json(icrf1)).icrf;
    if (!icrf2.empty()) e2 = camera_from_json(load_json(icrf2)).icrf;

    PipelineConfig cfg;
    cfg.n_iters = iters;
    cfg.eta = snr_from_db(eta_db);
    cfg.seed = seed;

    std::optional<SyntheticScene> gt;
    Mask gt_mask;
    if (!gt_scene.empty()) {
        gt = load_or_make_scene(gt_scene);
        gt_mask = Mask(gt->gt_disparity.width(), gt->gt_disparity.height(), 1);
        for (size_t i = 0; i < gt_mask.size(); ++i)
            if (gt->occlusion[i]) gt_mask[i] = 0;
        cfg.gt_disparity = &gt->gt_disparity;
        cfg.gt_disparity_mask = &gt_mask;
    }

    PipelineResult r = run_pipeline(stacks, cams, e1, e2, cfg);

    fs::create_directories(out);
    // fused HDR in linear radiance, plus preview and validity/source masks
    ImageF linear(r.hdr.values.width(), r.hdr.values.height(), 0.0);
    for (size_t i = 0; i < linear.size(); ++i)
        linear[i] = r.hdr.valid[i] ? std::exp(r.hdr.values[i]) : 0.0;
    write_pfm(out / "hdr.pfm", linear);
    double lo = 1e300, hi = -1e300;
    for (size_t i = 0; i < r.hdr.values.size(); ++i) {
        if (!r.hdr.valid[i]) continue;
        lo = std::min(lo, r.hdr.values[i]);
        hi = std::max(hi, r.hdr.values[i]);
    }
    write_png_gray(out / "hdr_preview.png", tone_map(r.hdr.values, lo, hi));
    write_pfm(out / "disparity.pfm", r.disparity.values);
    ImageU8 disp_preview(r.disparity.values.width(), r.disparity.values.height(), 0);
    for (size_t i = 0; i < disp_preview.size(); ++i)
        disp_preview[i] = uint8_t(std::clamp(int(r.disparity.values[i] * 4.0), 0, 255));
    write_png_gray(out / "disparity_preview.png", disp_preview);
    ImageU8 source(r.hdr.source.width(), r.hdr.source.height(), 0);
    for (size_t i = 0; i < source.size(); ++i)
        source[i] = uint8_t(std::clamp(int(r.hdr.source[i]) + 1, 0, 255));
    write_pgm(out / "source_mask.pgm", source);

    {
        std::ofstream csv(out / "diagnostics.csv");
        csv << "iteration,cross_camera_radiance_error,disparity_error_if_gt\n";
        for (const auto& d : r.diagnostics) {
            csv << d.iteration << "," << d.cross_camera_error << ",";
            if (d.mean_abs_disparity_error >= 0) csv << d.mean_abs_disparity_error;
            csv << "\n";
        }
    }
    save_json(out / "icrf_estimate.json",
              json{{"icrf", r.icrfs.e1.table()},
                   {"offset_c", r.icrfs.offset_c},
                   {"residual", r.icrfs.residual},
                   {"lambda_sm", r.icrfs.lambda_sm},
                   {"monotone_ok", r.icrfs.monotone_ok}});
    if (gt) {
        Mask score(gt_mask);
        int border = 2 * (cfg.matcher.block / 2);
        for (int y = 0; y < score.height(); ++y)
            for (int x = 0; x < score.width(); ++x)
                if (x < cfg.matcher.max_disparity + border || x >= score.width() - border ||
                    y < border || y >= score.height() - border)
                    score.at(x, y) = 0;
        double err4 = disparity_error(r.disparity, gt->gt_disparity, score, 4.0);
        double sse = 0.0;
        size_t n = 0;
        for (size_t i = 0; i < r.hdr.values.size(); ++i) {
            if (!r.hdr.valid[i]) continue;
            double e = r.hdr.values[i] - gt->log_radiance[i];
            sse += e * e;
            ++n;
        }
        save_json(out / "metrics.json",
                  json{{"disparity_error_4px", err4},
                       {"hdr_log_rmse", n ? std::sqrt(sse / double(n)) : -1.0},
                       {"hdr_valid_fraction", double(count_set(r.hdr.valid)) /
                                                  double(r.hdr.valid.size())}});
    }

    RunManifest m;
    m.command = "reconstruct";
    m.config = {{"iters", iters}, {"eta_db", eta_db}};
    m.seed = seed;
    m.inputs = {stack_dir / "stack.json", cam1, cam2};
    m.outputs = {out / "hdr.pfm", out / "disparity.pfm", out / "diagnostics.csv"};
    m.wall_ms = timer.ms();
    m.save(out / "manifest.json");
    std::cout << "reconstruction -> " << out << " (" << r.diagnostics.size() << " iterations)\n";
    return kExitOk;
}

struct SchemeRow {
    std::string name;
    bool ok = false;
    double t_cap = 0.0;
    double predicted_err = 1.0;
    double measured_err = 1.0;
    double hdr_rmse = 0.0;
    double valid_fraction = 0.0;
    std::string note;
};

int cmd_compare(const fs::path& scene_path, const fs::path& cam1, const fs::path& cam2,
                const std::string& schemes_csv, double gamma_err, double eta_db, uint64_t seed,
                const fs::path& out_csv) {
    Timer timer;
    auto cams = load_cameras(cam1, cam2, false);
    SyntheticScene scene = load_or_make_scene(scene_path);
    const int W = scene.log_radiance.width(), H = scene.log_radiance.height();

    PlannerConfig pcfg;
    pcfg.gamma_err = gamma_err;
    pcfg.eta = snr_from_db(eta_db);

    // the planner's input distribution comes from a dense stack, as it would
    // on a device (ground truth is used only for scoring)
    CapturePlan dense = make_dense_plan(scene.spec.target_hist, cams, 2, pcfg);
    CaptureStacks dense_stacks = capture_stack(scene, dense.shots, cams, hash_seed(seed, 1));
    StackEstimateOptions opts;
    opts.eta = pcfg.eta;
    LogRadianceHistogram hist = estimate_from_stack(dense_stacks, cams, opts);

    CapturePlan optimal = plan(hist, cams, pcfg);
    int n_shots = std::max(optimal.shots_on(CameraId::primary),
                           optimal.shots_on(CameraId::secondary));

    PipelineConfig rcfg;
    rcfg.eta = pcfg.eta;
    rcfg.seed = hash_seed(seed, 2);
    Mask score_mask(W, H, 0);
    int border = 2 * (rcfg.matcher.block / 2);
    for (int y = border; y < H - border; ++y)
        for (int x = rcfg.matcher.max_disparity + border; x < W - border; ++x)
            if (!scene.occlusion.at(x, y)) score_mask.at(x, y) = 1;

    auto run_scheme = [&](const std::string& name, const CapturePlan& p) {
        SchemeRow row;
        row.name = name;
        row.t_cap = p.t_cap;
        row.predicted_err = p.predicted_disp_err;
        try {
            CaptureStacks stacks = capture_stack(scene, p.shots, cams, hash_seed(seed, 3));
            PipelineResult r = run_pipeline(stacks, cams, cams[0].icrf, cams[1].icrf, rcfg);
            row.measured_err = disparity_error(r.disparity, scene.gt_disparity, score_mask, 4.0);
            double sse = 0.0;
            size_t n = 0, valid = 0;
            for (size_t i = 0; i < r.hdr.values.size(); ++i) {
                if (!r.hdr.valid[i]) continue;
                ++valid;
                double e = r.hdr.values[i] - scene.log_radiance[i];
                sse += e * e;
                ++n;
            }
            row.hdr_rmse = n ? std::sqrt(sse / double(n)) : 1e9;
            row.valid_fraction = double(valid) / double(r.hdr.values.size());
            row.ok = true;
        } catch (const Error& e) {
            row.note = e.what();
        }
        return row;
    };

    std::vector<SchemeRow> rows;
    std::istringstream ss(schemes_csv);
    std::string scheme;
    while (std::getline(ss, scheme, ',')) {
        if (scheme.empty()) continue;
        try {
            if (scheme == "optimal") {
                rows.push_back(run_scheme(scheme, optimal));
            } else if (scheme == "dense-gt") {
                rows.push_back(run_scheme(scheme, dense));
            } else if (scheme.rfind("exp-comp", 0) == 0) {
                int stops = std::stoi(scheme.substr(8));
                rows.push_back(run_scheme(
                    scheme, make_baseline(hist, cams, BaselineScheme::exp_comp, stops, n_shots, pcfg)));
            } else if (scheme.rfind("exp-intrl", 0) == 0) {
                int stops = std::stoi(scheme.substr(9));
                rows.push_back(run_scheme(
                    scheme, make_baseline(hist, cams, BaselineScheme::exp_intrl, stops, n_shots, pcfg)));
            } else {
                throw BadInput("unknown scheme: " + scheme);
            }
        } catch (const BadInput&) {
            throw;
        } catch (const Error& e) {
            SchemeRow row;
            row.name = scheme;
            row.note = e.what();
            rows.push_back(row);  // per-scheme failure recorded, run continues
        }
    }

    {
        std::ofstream csv(out_csv);
        csv << "scheme,ok,t_cap,predicted_disp_err,disparity_error,hdr_rmse,valid_fraction,note\n";
        for (const auto& r : rows)
            csv << r.name << "," << (r.ok ? 1 : 0) << "," << r.t_cap << "," << r.predicted_err
                << "," << r.measured_err << "," << r.hdr_rmse << "," << r.valid_fraction << ",\""
                << r.note << "\"\n";
    }

    RunManifest m;
    m.command = "compare";
    m.config = {{"schemes", schemes_csv}, {"gamma_err", gamma_err}, {"eta_db", eta_db}};
    m.seed = seed;
    m.inputs = {cam1, cam2};
    m.outputs = {out_csv};
    m.wall_ms = timer.ms();
    m.save(out_csv.string() + ".manifest.json");
    std::cout << "compared " << rows.size() << " schemes -> " << out_csv << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stereohdr: capture planning and reconstruction for dual-camera HDR + depth"};
    app.require_subcommand(1);

    // plan
    auto* plan_cmd = app.add_subcommand("plan", "Compute an optimal exposure/ISO capture plan");
    fs::path hist_path, cam1 = config_dir_default("camera_primary.json"),
                        cam2 = config_dir_default("camera_secondary.json"), out_path = "plan.json";
    std::string mode = "joint";
    double gamma_opt = -1.0, eta_db_opt = -1.0;
    bool single_camera = false;
    int max_shots = 6;
    plan_cmd->add_option("--hist", hist_path, "histogram CSV")->required();
    plan_cmd->add_option("--camera1", cam1, "primary camera JSON")->required();
    plan_cmd->add_option("--camera2", cam2, "secondary camera JSON");
    plan_cmd->add_option("--mode", mode, "hdr-only or joint")
        ->check(CLI::IsMember({"hdr-only", "joint"}));
    plan_cmd->add_option("--gamma-err", gamma_opt, "max disparity-error fraction (overrides mode)");
    plan_cmd->add_option("--eta-db", eta_db_opt, "per-shot SNR floor in dB");
    plan_cmd->add_flag("--single-camera", single_camera, "plan for the primary camera only");
    plan_cmd->add_option("--max-shots", max_shots, "shot cap per camera");
    plan_cmd->add_option("-o,--out", out_path, "output plan JSON");

    // make-scene
    auto* scene_cmd = app.add_subcommand("make-scene", "Generate a synthetic stereo scene");
    fs::path scene_spec, scene_out = "scene";
    uint64_t seed_opt = 0;
    bool seed_given = false;
    scene_cmd->add_option("--spec", scene_spec, "scene spec JSON")->required();
    scene_cmd->add_option("--seed", seed_opt, "override the spec's seed")
        ->each([&](const std::string&) { seed_given = true; });
    scene_cmd->add_option("-o,--out", scene_out, "output scene directory");

    // simulate
    auto* sim_cmd = app.add_subcommand("simulate", "Capture a plan against a scene");
    fs::path sim_scene, sim_plan, sim_out = "stack";
    uint64_t sim_seed = 1;
    bool dense_2stop = false;
    double sim_eta_db = 3.2;
    sim_cmd->add_option("--scene", sim_scene, "scene directory or spec JSON")->required();
    sim_cmd->add_option("--plan", sim_plan, "plan JSON");
    sim_cmd->add_option("--camera1", cam1, "primary camera JSON")->required();
    sim_cmd->add_option("--camera2", cam2, "secondary camera JSON")->required();
    sim_cmd->add_option("--seed", sim_seed, "capture noise seed");
    sim_cmd->add_flag("--dense-2stop", dense_2stop, "capture the dense reference ladder instead");
    sim_cmd->add_option("--eta-db", sim_eta_db, "SNR floor used for interval metadata");
    sim_cmd->add_option("-o,--out", sim_out, "output stack directory");

    // estimate-hist
    auto* hist_cmd = app.add_subcommand("estimate-hist", "Estimate a radiance histogram from a stack");
    fs::path eh_stack, eh_out = "hist.csv";
    double eh_eta_db = 3.2;
    hist_cmd->add_option("--stack", eh_stack, "stack directory")->required();
    hist_cmd->add_option("--camera1", cam1, "primary camera JSON")->required();
    hist_cmd->add_option("--camera2", cam2, "secondary camera JSON")->required();
    hist_cmd->add_option("--eta-db", eh_eta_db, "SNR floor for usable pixels");
    hist_cmd->add_option("-o,--out", eh_out, "output histogram CSV");

    // reconstruct
    auto* rec_cmd = app.add_subcommand("reconstruct", "Iterative disparity/ICRF estimation + fusion");
    fs::path rec_stack, rec_icrf1, rec_icrf2, rec_gt, rec_out = "recon";
    int iters = 3;
    double rec_eta_db = 3.2;
    uint64_t rec_seed = 7;
    rec_cmd->add_option("--stack", rec_stack, "stack directory")->required();
    rec_cmd->add_option("--camera1", cam1, "primary camera JSON")->required();
    rec_cmd->add_option("--camera2", cam2, "secondary camera JSON")->required();
    rec_cmd->add_option("--icrf1", rec_icrf1, "initial primary response (camera JSON)");
    rec_cmd->add_option("--icrf2", rec_icrf2, "initial secondary response (camera JSON)");
    rec_cmd->add_option("--iters", iters, "alternating iterations (>= 1)");
    rec_cmd->add_option("--eta-db", rec_eta_db, "SNR floor for usable pixels");
    rec_cmd->add_option("--seed", rec_seed, "sampling seed");
    rec_cmd->add_option("--gt-scene", rec_gt, "scene directory for diagnostics");
    rec_cmd->add_option("-o,--out", rec_out, "output directory");

    // compare
    auto* cmp_cmd = app.add_subcommand("compare", "Score capture schemes end to end on one scene");
    fs::path cmp_scene, cmp_out = "compare.csv";
    std::string schemes = "exp-comp1,exp-comp2,exp-comp3,exp-intrl2,exp-intrl3,optimal,dense-gt";
    double cmp_gamma = 0.05, cmp_eta_db = 3.2;
    uint64_t cmp_seed = 5;
    cmp_cmd->add_option("--scene", cmp_scene, "scene directory or spec JSON")->required();
    cmp_cmd->add_option("--camera1", cam1, "primary camera JSON")->required();
    cmp_cmd->add_option("--camera2", cam2, "secondary camera JSON")->required();
    cmp_cmd->add_option("--schemes", schemes, "comma-separated scheme list");
    cmp_cmd->add_option("--gamma-err", cmp_gamma, "disparity-error bound for the optimal plan");
    cmp_cmd->add_option("--eta-db", cmp_eta_db, "SNR floor in dB");
    cmp_cmd->add_option("--seed", cmp_seed, "simulation seed");
    cmp_cmd->add_option("-o,--out", cmp_out, "output CSV");

    // export-camera (writes the built-in synthetic model so users have a start)
    auto* exp_cmd = app.add_subcommand("export-camera", "Write a default synthetic camera JSON");
    fs::path exp_out = "camera.json";
    std::string variant = "default";
    exp_cmd->add_option("-o,--out", exp_out, "output JSON");
    exp_cmd->add_option("--variant", variant, "default, wide or noisy")
        ->check(CLI::IsMember({"default", "wide", "noisy"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (plan_cmd->parsed()) {
            std::optional<double> g = gamma_opt >= 0 ? std::optional<double>(gamma_opt) : std::nullopt;
            std::optional<double> e = eta_db_opt >= 0 ? std::optional<double>(eta_db_opt) : std::nullopt;
            return cmd_plan(hist_path, cam1, cam2, mode, g, e, single_camera, max_shots, out_path);
        }
        if (scene_cmd->parsed())
            return cmd_make_scene(scene_spec,
                                  seed_given ? std::optional<uint64_t>(seed_opt) : std::nullopt,
                                  scene_out);
        if (sim_cmd->parsed()) {
            if (!dense_2stop && sim_plan.empty())
                throw BadInput("simulate needs --plan or --dense-2stop");
            return cmd_simulate(sim_scene, sim_plan, cam1, cam2, sim_seed, dense_2stop, sim_eta_db,
                                sim_out);
        }
        if (hist_cmd->parsed()) return cmd_estimate_hist(eh_stack, cam1, cam2, eh_eta_db, eh_out);
        if (rec_cmd->parsed()) {
            if (iters < 1) throw BadInput("--iters must be >= 1");
            return cmd_reconstruct(rec_stack, cam1, cam2, rec_icrf1, rec_icrf2, iters, rec_eta_db,
                                   rec_seed, rec_gt, rec_out);
        }
        if (cmp_cmd->parsed())
            return cmd_compare(cmp_scene, cam1, cam2, schemes, cmp_gamma, cmp_eta_db, cmp_seed,
                               cmp_out);
        if (exp_cmd->parsed()) {
            CameraModel cam = variant == "wide"    ? make_wide_range_camera()
                              : variant == "noisy" ? make_noisy_camera()
                                                   : make_default_camera();
            save_json(exp_out, camera_to_json(cam));
            std::cout << "camera -> " << exp_out << "\n";
            return kExitOk;
        }
    } catch (const Infeasible& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const ShotBudgetExceeded& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const InsufficientData& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const NoCommonRange& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const RankDeficient& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const EmptyEstimate& e) {
        std::cerr << "pipeline error: " << e.what() << "\n";
        return kExitPipeline;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return kExitOk;
}
