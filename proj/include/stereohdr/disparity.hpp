// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stereohdr/errors.hpp"
#include "stereohdr/image.hpp"

namespace stereohdr {

/// A per-camera fused log-radiance map with its achieved range over valid
/// pixels. Invalid pixels still carry an ordered fallback value so tone
/// mapping produces a displayable (saturated) intensity there.
struct RadianceView {
    ImageF values;
    Mask valid;
    double range_lo = 0.0;
    double range_hi = 0.0;

    void recompute_range() {
        range_lo = std::numeric_limits<double>::infinity();
        range_hi = -std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < values.size(); ++i) {
            if (!valid[i]) continue;
            range_lo = std::min(range_lo, values[i]);
            range_hi = std::max(range_hi, values[i]);
        }
        if (range_lo > range_hi) {
            range_lo = 0.0;
            range_hi = 0.0;
        }
    }
};

struct RadiancePair {
    RadianceView q1, q2;
};

/// Clamps both views to their common radiance range so they tone-map
/// identically: pixels outside the common range are synthetically saturated at
/// its end values. Idempotent.
inline RadiancePair simulated_saturation(RadiancePair pair) {
    double lo = std::max(pair.q1.range_lo, pair.q2.range_lo);
    double hi = std::min(pair.q1.range_hi, pair.q2.range_hi);
    if (!(lo < hi)) throw NoCommonRange("camera radiance ranges do not overlap");
    for (auto view : {&pair.q1, &pair.q2}) {
        for (auto& v : view->values.data()) v = std::clamp(v, lo, hi);
        view->range_lo = lo;
        view->range_hi = hi;
    }
    return pair;
}

/// Affine remap of log radiance over [lo, hi] to 8-bit, clamped.
inline ImageU8 tone_map(const ImageF& map, double lo, double hi) {
    ImageU8 out(map.width(), map.height(), 0);
    double scale = hi - lo > 1e-12 ? 255.0 / (hi - lo) : 0.0;
    for (size_t i = 0; i < map.size(); ++i) {
        double v = (map[i] - lo) * scale;
        out[i] = uint8_t(std::clamp(int(std::lround(v)), 0, 255));
    }
    return out;
}

struct BlockMatchConfig {
    int block = 9;
    int max_disparity = 48;
    double lr_tolerance = 1.0;
    // a match must beat the best non-adjacent alternative by this factor,
    // otherwise the pixel is ambiguous (flat or repetitive) and flagged invalid
    double uniqueness_ratio = 0.95;
};

struct DisparityMap {
    ImageF values;
    Mask valid;
};

namespace disparity_detail {

/// Zero-mean SAD matching of `a` against `b`, where the match for a-pixel x is
/// b-pixel x - dir*d. Costs are window sums computed with integral images, one
/// disparity plane at a time.
inline void zm_sad_match(const ImageU8& a, const ImageU8& b, int dir, const BlockMatchConfig& cfg,
                         ImageF& best_d, Mask& has) {
    const int w = a.width(), h = a.height(), r = cfg.block / 2;
    ImageF fa(w, h), fb(w, h);
    for (size_t i = 0; i < fa.size(); ++i) {
        fa[i] = double(a[i]);
        fb[i] = double(b[i]);
    }
    auto ia = integral_image(fa);
    auto ib = integral_image(fb);
    const double inv_area = 1.0 / double(cfg.block * cfg.block);

    ImageF za(w, h), zb(w, h);
    for (int y = r; y < h - r; ++y)
        for (int x = r; x < w - r; ++x) {
            za.at(x, y) = fa.at(x, y) - box_sum(ia, w, x - r, y - r, x + r, y + r) * inv_area;
            zb.at(x, y) = fb.at(x, y) - box_sum(ib, w, x - r, y - r, x + r, y + r) * inv_area;
        }

    // Scoring is restricted to pixels whose whole cost window lies where the
    // zero-mean values (and their shifted counterparts) are defined.
    const int b0 = 2 * r;
    ImageF best_cost(w, h, std::numeric_limits<double>::infinity());
    ImageF second_cost(w, h, std::numeric_limits<double>::infinity());
    best_d = ImageF(w, h, 0.0);
    has = Mask(w, h, 0);
    ImageF diff(w, h, 0.0);
    for (int d = 0; d <= cfg.max_disparity; ++d) {
        diff.fill(0.0);
        for (int y = r; y < h - r; ++y)
            for (int x = r; x < w - r; ++x) {
                int xb = x - dir * d;
                if (xb < r || xb >= w - r) continue;
                diff.at(x, y) = std::abs(za.at(x, y) - zb.at(xb, y));
            }
        auto idiff = integral_image(diff);
        for (int y = b0; y < h - b0; ++y)
            for (int x = b0; x < w - b0; ++x) {
                int xb = x - dir * d;
                if (xb < b0 || xb >= w - b0) continue;
                double c = box_sum(idiff, w, x - r, y - r, x + r, y + r);
                if (c < best_cost.at(x, y)) {
                    if (std::abs(double(d) - best_d.at(x, y)) > 1.0 || !has.at(x, y))
                        second_cost.at(x, y) = best_cost.at(x, y);
                    best_cost.at(x, y) = c;
                    best_d.at(x, y) = double(d);
                    has.at(x, y) = 1;
                } else if (std::abs(double(d) - best_d.at(x, y)) > 1.0 &&
                           c < second_cost.at(x, y)) {
                    second_cost.at(x, y) = c;
                }
            }
    }
    // ambiguity rejection: the winner must be clearly better than the best
    // non-adjacent alternative
    for (int y = b0; y < h - b0; ++y)
        for (int x = b0; x < w - b0; ++x) {
            if (!has.at(x, y)) continue;
            double second = second_cost.at(x, y);
            if (std::isfinite(second) && !(best_cost.at(x, y) < cfg.uniqueness_ratio * second))
                has.at(x, y) = 0;
        }
}

}  // namespace disparity_detail

/// Block matching (zero-mean SAD) with a left-right consistency check; pixels
/// failing the check are flagged invalid rather than filled.
inline DisparityMap estimate_disparity(const ImageU8& left, const ImageU8& right,
                                       const BlockMatchConfig& cfg = {}) {
    if (!left.same_shape(right)) throw BadInput("stereo pair size mismatch");
    ImageF dl, dr;
    Mask hl, hr;
    disparity_detail::zm_sad_match(left, right, +1, cfg, dl, hl);
    disparity_detail::zm_sad_match(right, left, -1, cfg, dr, hr);

    DisparityMap out;
    out.values = ImageF(left.width(), left.height(), 0.0);
    out.valid = Mask(left.width(), left.height(), 0);
    for (int y = 0; y < left.height(); ++y)
        for (int x = 0; x < left.width(); ++x) {
            if (!hl.at(x, y)) continue;
            int d = int(dl.at(x, y));
            int xr = x - d;
            if (xr < 0 || !hr.at(xr, y)) continue;
            if (std::abs(dl.at(x, y) - dr.at(xr, y)) > cfg.lr_tolerance) continue;
            out.values.at(x, y) = dl.at(x, y);
            out.valid.at(x, y) = 1;
        }
    return out;
}

/// Fraction of masked pixels whose estimate deviates from ground truth by
/// strictly more than the threshold, or that have no valid estimate at all.
inline double disparity_error(const DisparityMap& est, const ImageF& gt, const Mask& mask,
                              double threshold_px = 4.0) {
    if (!est.values.same_shape(gt) || !gt.same_shape(mask)) throw BadInput("disparity grid mismatch");
    size_t total = 0, bad = 0;
    for (size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        ++total;
        if (!est.valid[i] || std::abs(est.values[i] - gt[i]) > threshold_px) ++bad;
    }
    if (total == 0) throw EmptyMask("disparity error over an empty mask");
    return double(bad) / double(total);
}

}  // namespace stereohdr
