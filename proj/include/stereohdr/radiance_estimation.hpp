// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "stereohdr/camera.hpp"
#include "stereohdr/errors.hpp"
#include "stereohdr/histogram.hpp"
#include "stereohdr/scene.hpp"

namespace stereohdr {

struct StackEstimateOptions {
    int bins = 256;
    double eta = snr_from_db(3.2);  // admissibility floor for usable pixels
    double pct_lo = 0.001;          // range-of-interest cut
    double pct_hi = 0.999;
};

/// Scene radiance distribution from a dense capture stack: every admissible
/// pixel is mapped through the response to log radiance, multi-shot estimates
/// of the same pixel are averaged per camera, and the pooled estimates are
/// binned. The two views are pooled without registration (small baseline).
inline LogRadianceHistogram estimate_from_stack(const CaptureStacks& stacks,
                                                std::span<const CameraModel> cameras,
                                                const StackEstimateOptions& opts = {}) {
    std::vector<double> samples;
    auto accumulate_camera = [&](std::span<const LdrImage> stack, const CameraModel& cam) {
        if (stack.empty()) return;
        const int w = stack.front().pixels.width(), h = stack.front().pixels.height();
        std::vector<double> sum(size_t(w) * h, 0.0);
        std::vector<int> cnt(size_t(w) * h, 0);
        for (const auto& img : stack) {
            const int d_low = cam.lowest_admissible_pixel(img.shot.gain, opts.eta);
            const double base = -std::log(img.shot.t) + std::log(img.shot.gain);
            for (size_t i = 0; i < img.pixels.size(); ++i) {
                int d = img.pixels[i];
                if (!cam.valid_pixel(d, d_low)) continue;
                sum[i] += cam.icrf(d) + base;
                cnt[i] += 1;
            }
        }
        for (size_t i = 0; i < sum.size(); ++i)
            if (cnt[i] > 0) samples.push_back(sum[i] / cnt[i]);
    };
    accumulate_camera(stacks.primary, cameras[0]);
    if (cameras.size() > 1) accumulate_camera(stacks.secondary, cameras[1]);
    if (samples.empty()) throw EmptyEstimate("no pixel produced a usable radiance estimate");

    LogRadianceHistogram hist = LogRadianceHistogram::from_samples(samples, opts.bins);
    std::sort(samples.begin(), samples.end());
    auto pct = [&](double p) {
        double idx = p * double(samples.size() - 1);
        size_t i0 = size_t(idx);
        size_t i1 = std::min(i0 + 1, samples.size() - 1);
        double f = idx - double(i0);
        return samples[i0] * (1.0 - f) + samples[i1] * f;
    };
    double lo = pct(opts.pct_lo), hi = pct(opts.pct_hi);
    if (lo < hi) hist.set_range_of_interest(lo, hi);
    return hist;
}

}  // namespace stereohdr
