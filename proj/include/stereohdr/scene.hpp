// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "stereohdr/camera.hpp"
#include "stereohdr/errors.hpp"
#include "stereohdr/histogram.hpp"
#include "stereohdr/image.hpp"
#include "stereohdr/planner.hpp"
#include "stereohdr/rng.hpp"

namespace stereohdr {

/// Layout and appearance request for a synthetic stereo scene.
struct SceneSpec {
    int width = 320;
    int height = 240;
    LogRadianceHistogram target_hist;        // radiance distribution the scene must match
    std::vector<double> layer_disparities;   // one fronto-parallel layer per entry, pixels
    double texture_amp = 0.45;               // pre-matching texture amplitude, fraction of a layer step
    uint64_t seed = 1;
};

/// Primary-view log radiance plus exact ground truth for the secondary view.
struct SyntheticScene {
    ImageF log_radiance;    // primary view
    ImageF gt_disparity;    // primary -> secondary, pixels
    Mask occlusion;         // nonzero where the point is invisible in the secondary view
    SceneSpec spec;
};

/// A captured low-dynamic-range frame with its shot metadata.
struct LdrImage {
    ImageU8 pixels;
    Shot shot;
};

struct CaptureStacks {
    std::vector<LdrImage> primary;
    std::vector<LdrImage> secondary;
};

namespace scene_detail {

/// Band-limited texture field in [-1, 1]: random cosines in two octaves, so
/// matching windows see both coarse structure and fine discriminative detail.
inline ImageF texture_field(int w, int h, double scale_px, Rng& rng) {
    ImageF f(w, h, 0.0);
    const int waves = 14;
    std::vector<double> kx(waves), ky(waves), ph(waves), am(waves);
    for (int i = 0; i < waves; ++i) {
        double octave = i < 6 ? 1.0 : 2.8;
        double freq = rng.uniform(0.3, 1.0) * octave * 2.0 * 3.14159265358979323846 / scale_px;
        double ang = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        kx[i] = freq * std::cos(ang);
        ky[i] = freq * std::sin(ang);
        ph[i] = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
        am[i] = i < 6 ? 1.0 : 0.6;
    }
    double peak = 1e-9;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = 0.0;
            for (int i = 0; i < waves; ++i) v += am[i] * std::cos(kx[i] * x + ky[i] * y + ph[i]);
            f.at(x, y) = v;
            peak = std::max(peak, std::abs(v));
        }
    for (auto& v : f.data()) v /= peak;
    return f;
}

}  // namespace scene_detail

/// Builds a piecewise-planar scene: vertical strips of constant integer
/// disparity, strip radiances forming bands that together reproduce the target
/// histogram exactly (rank remap through the target's inverse CDF), plus
/// band-limited texture so stereo matching has something to lock onto.
inline SyntheticScene make_scene(const SceneSpec& spec) {
    const int w = spec.width, h = spec.height;
    const int layers = int(spec.layer_disparities.size());
    if (layers < 1) throw SpecInfeasible("scene needs at least one disparity layer");
    if (w / layers < 8) throw SpecInfeasible("layers too narrow for the requested width");
    for (double d : spec.layer_disparities)
        if (d < 0 || d >= w) throw SpecInfeasible("layer disparity outside [0, width)");

    Rng rng(hash_seed(spec.seed, 0x5ce1e));
    SyntheticScene scene;
    scene.spec = spec;
    scene.gt_disparity = ImageF(w, h, 0.0);
    scene.log_radiance = ImageF(w, h, 0.0);

    // Strip boundaries: roughly equal with a little jitter.
    std::vector<int> bounds(layers + 1, 0);
    for (int l = 1; l < layers; ++l) {
        int base = w * l / layers;
        bounds[l] = std::clamp(base + int(rng.uniform(-w * 0.03, w * 0.03)), bounds[l - 1] + 4, w - 4 * (layers - l));
    }
    bounds[layers] = w;

    ImageF field(w, h, 0.0);
    ImageF tex = scene_detail::texture_field(w, h, std::max(6.0, w / 40.0), rng);
    for (int l = 0; l < layers; ++l) {
        for (int y = 0; y < h; ++y)
            for (int x = bounds[l]; x < bounds[l + 1]; ++x) {
                scene.gt_disparity.at(x, y) = spec.layer_disparities[size_t(l)];
                // A mild within-strip ramp keeps ranks unique inside a band.
                double ramp = 0.08 * (double(x - bounds[l]) / std::max(1, bounds[l + 1] - bounds[l] - 1));
                field.at(x, y) = double(l) + spec.texture_amp * tex.at(x, y) + ramp;
            }
    }

    // Rank remap through the target inverse CDF: the output histogram matches
    // the request bin-for-bin regardless of the texture.
    const size_t n = size_t(w) * size_t(h);
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return field[a] < field[b]; });
    for (size_t r = 0; r < n; ++r)
        scene.log_radiance[order[r]] = spec.target_hist.quantile((double(r) + 0.5) / double(n));

    // Occlusion: where a nearer strip lands on the same secondary column.
    scene.occlusion = Mask(w, h, 0);
    std::vector<double> best(size_t(w), -1.0);
    for (int y = 0; y < h; ++y) {
        std::fill(best.begin(), best.end(), -1.0);
        for (int x = 0; x < w; ++x) {
            int xs = x - int(std::lround(scene.gt_disparity.at(x, y)));
            if (xs < 0 || xs >= w) continue;
            best[size_t(xs)] = std::max(best[size_t(xs)], scene.gt_disparity.at(x, y));
        }
        for (int x = 0; x < w; ++x) {
            double d = scene.gt_disparity.at(x, y);
            int xs = x - int(std::lround(d));
            if (xs < 0 || xs >= w || best[size_t(xs)] > d)
                scene.occlusion.at(x, y) = 1;
        }
    }
    return scene;
}

/// Forward-warp of the primary log radiance into the secondary view with
/// z-order resolution (larger disparity wins). Secondary pixels with no source
/// are flagged invalid and filled from the nearest valid column.
inline std::pair<ImageF, Mask> render_secondary(const SyntheticScene& scene) {
    const int w = scene.log_radiance.width(), h = scene.log_radiance.height();
    ImageF out(w, h, 0.0);
    Mask valid(w, h, 0);
    ImageF depth(w, h, -1.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double d = scene.gt_disparity.at(x, y);
            int xs = x - int(std::lround(d));
            if (xs < 0 || xs >= w) continue;
            if (d > depth.at(xs, y)) {
                depth.at(xs, y) = d;
                out.at(xs, y) = scene.log_radiance.at(x, y);
                valid.at(xs, y) = 1;
            }
        }
        // fill holes (dis-occlusions and the right margin) by column replication
        double fill = 0.0;
        bool have = false;
        for (int x = w - 1; x >= 0; --x) {
            if (valid.at(x, y)) {
                fill = out.at(x, y);
                have = true;
            } else if (have) {
                out.at(x, y) = fill;
            }
        }
        for (int x = 0; x < w; ++x) {
            if (valid.at(x, y)) {
                fill = out.at(x, y);
                have = true;
            } else if (have) {
                out.at(x, y) = fill;
            }
        }
    }
    return {std::move(out), std::move(valid)};
}

/// Simulates every shot of a plan against the scene. Pixel noise streams are
/// keyed by (seed, shot index, pixel index) so captures are reproducible and
/// order-independent.
inline CaptureStacks capture_stack(const SyntheticScene& scene, std::span<const Shot> shots,
                                   std::span<const CameraModel> cameras, uint64_t seed) {
    CaptureStacks stacks;
    auto [sec_log, sec_valid] = render_secondary(scene);
    const int w = scene.log_radiance.width(), h = scene.log_radiance.height();
    for (size_t si = 0; si < shots.size(); ++si) {
        const Shot& shot = shots[si];
        const CameraModel& cam = cameras[size_t(shot.camera) < cameras.size() ? size_t(shot.camera) : 0];
        const ImageF& view = shot.camera == CameraId::primary ? scene.log_radiance : sec_log;
        LdrImage img;
        img.shot = shot;
        img.pixels = ImageU8(w, h, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                Rng rng(hash_seed(seed, si + 1, size_t(y) * w + x));
                double phi = std::exp(view.at(x, y));
                img.pixels.at(x, y) = uint8_t(cam.expose_pixel(phi, shot.t, shot.gain, rng));
            }
        (shot.camera == CameraId::primary ? stacks.primary : stacks.secondary).push_back(std::move(img));
    }
    return stacks;
}

// --- scene presets --------------------------------------------------------

/// Scenes whose radiance sits where the default camera's exposure range can
/// reach it (anchor exposures of a few hundred milliseconds).
inline SceneSpec make_preset_scene_spec(const std::string& name, uint64_t seed, int width = 320,
                                        int height = 240) {
    SceneSpec spec;
    spec.width = width;
    spec.height = height;
    spec.seed = seed;
    if (name == "unimodal") {
        spec.target_hist = make_unimodal_hist(3.4, 9.0);
        spec.layer_disparities = {4, 12, 24};
    } else if (name == "bimodal") {
        spec.target_hist = make_bimodal_hist(3.4, 10.0);
        spec.layer_disparities = {6, 16, 28, 10};
    } else if (name == "wide") {
        spec.target_hist = make_bimodal_hist(3.0, 11.5, 256, 0.6);
        spec.layer_disparities = {8, 20, 32};
    } else if (name == "three-region") {
        LogRadianceHistogram h = make_three_region_hist(0.2, 3.4, 1.0, 2.0, 3.0);
        spec.target_hist = h;
        spec.layer_disparities = {5, 15, 25};
    } else {
        throw BadInput("unknown scene preset: " + name);
    }
    return spec;
}

}  // namespace stereohdr
