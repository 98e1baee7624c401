// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "stereohdr/camera.hpp"
#include "stereohdr/disparity.hpp"
#include "stereohdr/errors.hpp"
#include "stereohdr/fusion.hpp"
#include "stereohdr/icrf_estimation.hpp"
#include "stereohdr/scene.hpp"

namespace stereohdr {

struct PipelineConfig {
    int n_iters = 3;
    double eta = snr_from_db(3.2);
    double lambda_sm = 50.0;
    int sample_budget = 4000;
    BlockMatchConfig matcher;
    double fuse_sigma = 2.0;
    uint64_t seed = 7;
    std::optional<DisparityMap> disparity_override;  // skips matching when set
    const ImageF* gt_disparity = nullptr;            // optional, enables the GT diagnostic
    const Mask* gt_disparity_mask = nullptr;
};

struct IterationDiagnostics {
    int iteration = 0;
    double cross_camera_error = 0.0;       // mean |q1 - warp(q2)| on co-visible pixels
    double mean_abs_disparity_error = -1;  // -1 when no ground truth was supplied
};

struct PipelineResult {
    RadianceMap hdr;
    DisparityMap disparity;
    IcrfEstimate icrfs;
    std::vector<IterationDiagnostics> diagnostics;
};

/// Mean absolute log-radiance difference between the primary map and the
/// warped secondary map over pixels valid in both (and in the given mask).
inline double cross_camera_radiance_error(const RadianceView& q1, const ImageF& q2_warped,
                                          const Mask& q2_warped_valid, const Mask& mask) {
    double acc = 0.0;
    size_t n = 0;
    for (size_t i = 0; i < q1.values.size(); ++i) {
        if (!mask.empty() && !mask[i]) continue;
        if (!q1.valid[i] || !q2_warped_valid[i]) continue;
        acc += std::abs(q1.values[i] - q2_warped[i]);
        ++n;
    }
    if (n == 0) throw EmptyMask("no co-visible pixels for the cross-camera error");
    return acc / double(n);
}

namespace pipeline_detail {

inline std::vector<ShotRadiance> stack_to_radiance(std::span<const LdrImage> stack,
                                                   const CameraModel& cam, const Icrf& icrf,
                                                   double eta) {
    std::vector<ShotRadiance> out;
    out.reserve(stack.size());
    CameraModel c = with_icrf(cam, icrf);
    for (const auto& img : stack) out.push_back(to_radiance(img, c, eta));
    return out;
}

}  // namespace pipeline_detail

/// Final reconstruction for fixed responses and disparity: primary shots to
/// radiance, secondary shots warped into the primary view, primary-first fusion.
inline RadianceMap reconstruct(const CaptureStacks& stacks, std::span<const CameraModel> cameras,
                               const Icrf& e1, const Icrf& e2, const DisparityMap& disparity,
                               const PipelineConfig& cfg) {
    auto prim = pipeline_detail::stack_to_radiance(stacks.primary, cameras[0], e1, cfg.eta);
    std::vector<ShotRadiance> warped;
    if (cameras.size() > 1 && !stacks.secondary.empty()) {
        auto sec = pipeline_detail::stack_to_radiance(stacks.secondary, cameras[1], e2, cfg.eta);
        warped.reserve(sec.size());
        for (const auto& s : sec) warped.push_back(warp_to_primary(s, disparity));
    }
    return fuse(prim, warped, cfg.fuse_sigma);
}

/// Alternating disparity/response estimation followed by fusion. Each
/// iteration matches with the current responses, then re-estimates the
/// responses from the matched correspondences; diagnostics are recorded at the
/// top of each iteration, before that iteration's response update.
inline PipelineResult run_pipeline(const CaptureStacks& stacks,
                                   std::span<const CameraModel> cameras, const Icrf& init_e1,
                                   const Icrf& init_e2, const PipelineConfig& cfg) {
    if (cfg.n_iters < 1) throw BadInput("pipeline needs at least one iteration");
    if (stacks.primary.empty()) throw BadInput("primary stack is empty");
    const bool dual = cameras.size() > 1 && !stacks.secondary.empty();

    PipelineResult result;
    Icrf e1 = init_e1, e2 = init_e2;
    double anchor_value = init_e1(128);  // keep the initial absolute gauge
    DisparityMap disp;

    if (!dual) {
        // single-camera degenerate mode: no matching, no response refinement
        disp.values = ImageF(stacks.primary.front().pixels.width(),
                             stacks.primary.front().pixels.height(), 0.0);
        disp.valid = Mask(disp.values.width(), disp.values.height(), 0);
        result.hdr = reconstruct(stacks, cameras, e1, e2, disp, cfg);
        result.disparity = std::move(disp);
        result.icrfs = {e1, 0.0, 0.0, cfg.lambda_sm, true};
        return result;
    }

    for (int iter = 0; iter < cfg.n_iters; ++iter) {
        auto prim = pipeline_detail::stack_to_radiance(stacks.primary, cameras[0], e1, cfg.eta);
        auto sec = pipeline_detail::stack_to_radiance(stacks.secondary, cameras[1], e2, cfg.eta);
        RadianceView q1 = per_camera_hdr(prim);
        RadianceView q2 = per_camera_hdr(sec);

        RadiancePair clamped = simulated_saturation({q1, q2});
        ImageU8 tm1 = tone_map(clamped.q1.values, clamped.q1.range_lo, clamped.q1.range_hi);
        ImageU8 tm2 = tone_map(clamped.q2.values, clamped.q2.range_lo, clamped.q2.range_hi);
        disp = cfg.disparity_override ? *cfg.disparity_override
                                      : estimate_disparity(tm1, tm2, cfg.matcher);

        IterationDiagnostics diag;
        diag.iteration = iter;
        auto [q2w, q2w_valid] = warp_to_primary(q2.values, q2.valid, disp);
        diag.cross_camera_error = cross_camera_radiance_error(q1, q2w, q2w_valid, Mask{});
        if (cfg.gt_disparity) {
            double acc = 0.0;
            size_t n = 0;
            for (size_t i = 0; i < disp.values.size(); ++i) {
                if (!disp.valid[i]) continue;
                if (cfg.gt_disparity_mask && !(*cfg.gt_disparity_mask)[i]) continue;
                acc += std::abs(disp.values[i] - (*cfg.gt_disparity)[i]);
                ++n;
            }
            diag.mean_abs_disparity_error = n ? acc / double(n) : -1.0;
        }
        result.diagnostics.push_back(diag);

        auto corrs = correspondences_from_disparity(stacks, cameras, disp, cfg.sample_budget,
                                                    cfg.eta, hash_seed(cfg.seed, uint64_t(iter)));
        try {
            result.icrfs = estimate_joint_icrf(corrs, cfg.lambda_sm, 128, anchor_value);
        } catch (const InsufficientData&) {
            // Exposure-poor sequences (one shot per camera) cannot pin the
            // table's shape; keep it and re-fit the inter-camera offset only.
            result.icrfs = estimate_offset_only(corrs, e1);
        }
        e1 = result.icrfs.e1;
        e2 = result.icrfs.e2();
    }

    result.hdr = reconstruct(stacks, cameras, e1, e2, disp, cfg);
    result.disparity = std::move(disp);
    return result;
}

}  // namespace stereohdr
