// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "stereohdr/camera.hpp"
#include "stereohdr/disparity.hpp"
#include "stereohdr/image.hpp"
#include "stereohdr/scene.hpp"

namespace stereohdr {

/// One shot converted to the radiance domain: log-radiance estimates, their
/// hat weights, and the per-pixel validity (neither noisy nor saturated).
/// Values are defined even on invalid pixels so fallbacks stay ordered.
struct ShotRadiance {
    ImageF values;
    ImageF weight;
    Mask valid;
    Shot shot;
};

/// CameraModel with a replacement response table (the estimated one).
inline CameraModel with_icrf(CameraModel cam, const Icrf& icrf) {
    cam.icrf = icrf;
    return cam;
}

/// Radiance-domain conversion of one capture: R = e(d) - log t + log g for
/// pixels strictly inside the admissible range; outside pixels are invalid.
inline ShotRadiance to_radiance(const LdrImage& img, const CameraModel& cam, double eta) {
    ShotRadiance out;
    out.shot = img.shot;
    const int w = img.pixels.width(), h = img.pixels.height();
    out.values = ImageF(w, h, 0.0);
    out.weight = ImageF(w, h, 0.0);
    out.valid = Mask(w, h, 0);
    const double base = -std::log(img.shot.t) + std::log(img.shot.gain);
    const int d_low = cam.lowest_admissible_pixel(img.shot.gain, eta);
    for (size_t i = 0; i < out.values.size(); ++i) {
        int d = img.pixels[i];
        out.values[i] = cam.icrf(d) + base;
        if (cam.valid_pixel(d, d_low)) {
            out.valid[i] = 1;
            out.weight[i] = triangular_weight(d);
        }
    }
    return out;
}

/// Backward warp into the primary view by the disparity map (nearest sample).
/// Pixels with invalid disparity, out-of-bounds source, or invalid source are
/// flagged invalid.
inline std::pair<ImageF, Mask> warp_to_primary(const ImageF& src, const Mask& src_valid,
                                               const DisparityMap& disp) {
    const int w = src.width(), h = src.height();
    ImageF out(w, h, 0.0);
    Mask valid(w, h, 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!disp.valid.at(x, y)) continue;
            int xs = x - int(std::lround(disp.values.at(x, y)));
            if (xs < 0 || xs >= w) continue;
            out.at(x, y) = src.at(xs, y);
            if (src_valid.empty() || src_valid.at(xs, y)) valid.at(x, y) = 1;
        }
    return {std::move(out), std::move(valid)};
}

inline ShotRadiance warp_to_primary(const ShotRadiance& sr, const DisparityMap& disp) {
    ShotRadiance out;
    out.shot = sr.shot;
    auto [vals, valid] = warp_to_primary(sr.values, sr.valid, disp);
    out.values = std::move(vals);
    out.valid = std::move(valid);
    out.weight = ImageF(sr.weight.width(), sr.weight.height(), 0.0);
    for (int y = 0; y < out.weight.height(); ++y)
        for (int x = 0; x < out.weight.width(); ++x) {
            if (!out.valid.at(x, y)) continue;
            int xs = x - int(std::lround(disp.values.at(x, y)));
            out.weight.at(x, y) = sr.weight.at(xs, y);
        }
    return out;
}

/// Fused HDR radiance map with per-pixel confidence and the index of the shot
/// that contributed most (primary shots first, then secondaries; -1 = none).
struct RadianceMap {
    ImageF values;
    ImageF confidence;
    Image<int16_t> source;
    Mask valid;
};

namespace fusion_detail {

inline std::vector<ImageF> smoothed_weights(std::span<const ShotRadiance> shots, double sigma) {
    std::vector<ImageF> out;
    out.reserve(shots.size());
    for (const auto& s : shots) {
        ImageF w = sigma > 0 ? gaussian_blur(s.weight, sigma) : s.weight;
        // smoothing must never leak weight onto pixels with no estimate
        for (size_t i = 0; i < w.size(); ++i)
            if (!s.valid[i]) w[i] = 0.0;
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace fusion_detail

/// Primary-first fusion: wherever any primary shot has a usable estimate the
/// output is the weighted average of primary estimates only; warped secondary
/// estimates fill in the rest. Weight fields (not radiances) are smoothed to
/// soften seams between contributing shots.
inline RadianceMap fuse(std::span<const ShotRadiance> primaries,
                        std::span<const ShotRadiance> warped_secondaries, double sigma = 2.0) {
    if (primaries.empty() && warped_secondaries.empty()) throw BadInput("fuse needs at least one map");
    const ShotRadiance& ref = primaries.empty() ? warped_secondaries.front() : primaries.front();
    const int w = ref.values.width(), h = ref.values.height();
    RadianceMap out;
    out.values = ImageF(w, h, 0.0);
    out.confidence = ImageF(w, h, 0.0);
    out.source = Image<int16_t>(w, h, -1);
    out.valid = Mask(w, h, 0);

    auto wp = fusion_detail::smoothed_weights(primaries, sigma);
    auto ws = fusion_detail::smoothed_weights(warped_secondaries, sigma);

    for (size_t i = 0; i < out.values.size(); ++i) {
        double acc = 0.0, wsum = 0.0, wmax = -1.0;
        int src = -1;
        for (size_t k = 0; k < primaries.size(); ++k) {
            double wk = wp[k][i];
            if (wk <= 0.0) continue;
            acc += wk * primaries[k].values[i];
            wsum += wk;
            if (wk > wmax) {
                wmax = wk;
                src = int(k);
            }
        }
        if (wsum <= 0.0) {
            for (size_t k = 0; k < warped_secondaries.size(); ++k) {
                double wk = ws[k][i];
                if (wk <= 0.0) continue;
                acc += wk * warped_secondaries[k].values[i];
                wsum += wk;
                if (wk > wmax) {
                    wmax = wk;
                    src = int(primaries.size() + k);
                }
            }
        }
        if (wsum > 0.0) {
            out.values[i] = acc / wsum;
            out.confidence[i] = wsum;
            out.source[i] = int16_t(src);
            out.valid[i] = 1;
        }
    }
    return out;
}

/// Single-view fusion of one camera's stack into its radiance map Q. Invalid
/// pixels carry a synthetically saturated fallback so downstream tone mapping
/// keeps them ordered: the largest saturated estimate or the smallest
/// too-dark one.
inline RadianceView per_camera_hdr(std::span<const ShotRadiance> shots, double sigma = 0.0) {
    RadianceMap m = fuse(shots, {}, sigma);
    RadianceView view;
    view.values = std::move(m.values);
    view.valid = std::move(m.valid);
    for (size_t i = 0; i < view.values.size(); ++i) {
        if (view.valid[i]) continue;
        double sat = -std::numeric_limits<double>::infinity();
        double dark = std::numeric_limits<double>::infinity();
        bool any_sat = false;
        for (const auto& s : shots) {
            // invalid pixel: every shot saw it either saturated or too dark;
            // classify by where the estimate sits relative to the shot's ceiling
            double v = s.values[i];
            if (v >= s.shot.interval.hi - 1e-12) {
                any_sat = true;
                sat = std::max(sat, v);
            } else {
                dark = std::min(dark, v);
            }
        }
        view.values[i] = any_sat ? sat : dark;
    }
    view.recompute_range();
    return view;
}

}  // namespace stereohdr
