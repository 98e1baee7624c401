// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "stereohdr/fusion.hpp"
#include "stereohdr/rng.hpp"
#include "stereohdr/scene.hpp"

using namespace stereohdr;

namespace {

CameraModel quiet_camera() {
    CameraModel cam = make_default_camera();
    cam.noise.sigma_r = 0.0;
    cam.noise.sigma_q = 0.0;
    cam.noise.shot_noise_scale = 0.0;
    return cam;
}

SyntheticScene test_scene(uint64_t seed, double lo = 3.5, double stops = 8.0) {
    SceneSpec spec;
    spec.width = 160;
    spec.height = 120;
    spec.seed = seed;
    spec.target_hist = make_unimodal_hist(lo, stops);
    spec.layer_disparities = {6, 15};
    return make_scene(spec);
}

Shot shot_with_low(const CameraModel& cam, CameraId id, double low, double eta) {
    double t = cam.min_admissible_signal(1.0, eta) / std::exp(low);
    return {id, t, 100.0, 1.0, cam.log_radiance_interval(t, 1.0, eta)};
}

}  // namespace

TEST_CASE("warp_to_primary") {
    const int w = 60, h = 40;
    ImageF src(w, h);
    Rng rng(5);
    for (auto& v : src.data()) v = rng.uniform(0.0, 1.0);
    Mask valid(w, h, 1);

    SUBCASE("zero disparity is identity") {
        DisparityMap disp{ImageF(w, h, 0.0), Mask(w, h, 1)};
        auto [out, ok] = warp_to_primary(src, valid, disp);
        CHECK(out == src);
        CHECK(count_set(ok) == size_t(w * h));
    }
    SUBCASE("constant disparity shifts horizontally") {
        DisparityMap disp{ImageF(w, h, 7.0), Mask(w, h, 1)};
        auto [out, ok] = warp_to_primary(src, valid, disp);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (x < 7) {
                    CHECK(ok.at(x, y) == 0);
                } else {
                    CHECK(ok.at(x, y) == 1);
                    CHECK(out.at(x, y) == src.at(x - 7, y));
                }
            }
    }
    SUBCASE("invalid disparity and invalid source propagate") {
        DisparityMap disp{ImageF(w, h, 3.0), Mask(w, h, 1)};
        disp.valid.at(10, 10) = 0;
        Mask holey = valid;
        holey.at(20, 20) = 0;  // source pixel: lands at (23, 20)
        auto [out, ok] = warp_to_primary(src, holey, disp);
        CHECK(ok.at(10, 10) == 0);
        CHECK(ok.at(23, 20) == 0);
    }
    SUBCASE("ground-truth warp matches the primary view (noiseless)") {
        auto scene = test_scene(8);
        auto [sec, sec_valid] = render_secondary(scene);
        DisparityMap disp{scene.gt_disparity, Mask(scene.gt_disparity.width(),
                                                   scene.gt_disparity.height(), 1)};
        auto [back, ok] = warp_to_primary(sec, sec_valid, disp);
        for (int y = 0; y < scene.log_radiance.height(); ++y)
            for (int x = 0; x < scene.log_radiance.width(); ++x) {
                if (scene.occlusion.at(x, y) || !ok.at(x, y)) continue;
                CHECK(back.at(x, y) == doctest::Approx(scene.log_radiance.at(x, y)).epsilon(1e-12));
            }
    }
}

TEST_CASE("to_radiance") {
    CameraModel cam = quiet_camera();
    double eta = snr_from_db(3.2);
    auto scene = test_scene(9);
    Shot shot = shot_with_low(cam, CameraId::primary, 3.5, eta);
    auto stacks = capture_stack(scene, std::span(&shot, 1), std::array<CameraModel, 2>{cam, cam}, 1);
    auto sr = to_radiance(stacks.primary[0], cam, eta);

    int d_low = cam.lowest_admissible_pixel(shot.gain, eta);
    double step = 0.0;
    for (int d = 1; d < 256; ++d) step = std::max(step, cam.icrf(d) - cam.icrf(d - 1));

    size_t valid_count = 0;
    for (int y = 0; y < sr.values.height(); ++y)
        for (int x = 0; x < sr.values.width(); ++x) {
            int d = stacks.primary[0].pixels.at(x, y);
            if (d <= d_low || d >= cam.d_saturation) {
                CHECK(sr.valid.at(x, y) == 0);
                CHECK(sr.weight.at(x, y) == 0.0);
            } else {
                ++valid_count;
                CHECK(sr.valid.at(x, y) == 1);
                CHECK(sr.weight.at(x, y) == doctest::Approx(triangular_weight(d)));
                // noiseless mid-range pixel inverts to the scene radiance
                CHECK(std::abs(sr.values.at(x, y) - scene.log_radiance.at(x, y)) <= step);
            }
        }
    CHECK(valid_count > sr.values.size() / 2);
}

TEST_CASE("two shots of one pixel agree within the noise bound") {
    CameraModel cam = make_default_camera();
    double eta = snr_from_db(3.2);
    auto scene = test_scene(10, 3.8, 5.0);
    std::vector<Shot> shots{shot_with_low(cam, CameraId::primary, 3.6, eta),
                            shot_with_low(cam, CameraId::primary, 4.4, eta)};
    auto stacks = capture_stack(scene, shots, std::array<CameraModel, 2>{cam, cam}, 2);
    auto a = to_radiance(stacks.primary[0], cam, eta);
    auto b = to_radiance(stacks.primary[1], cam, eta);
    double worst_sigma = std::sqrt(1.0 / eta);  // log-domain noise at the SNR floor
    size_t both = 0, agree = 0;
    for (size_t i = 0; i < a.values.size(); ++i) {
        if (!a.valid[i] || !b.valid[i]) continue;
        ++both;
        agree += std::abs(a.values[i] - b.values[i]) < 5.0 * worst_sigma;
    }
    REQUIRE(both > a.values.size() / 4);
    CHECK(double(agree) / double(both) > 0.99);
}

TEST_CASE("fuse") {
    const int w = 40, h = 30;
    auto make_sr = [&](double value, double weight, bool valid_all) {
        ShotRadiance sr;
        sr.values = ImageF(w, h, value);
        sr.weight = ImageF(w, h, valid_all ? weight : 0.0);
        sr.valid = Mask(w, h, valid_all ? 1 : 0);
        sr.shot = Shot{CameraId::primary, 0.1, 100.0, 1.0, {0.0, 5.0}};
        return sr;
    };

    SUBCASE("single fully valid primary is returned as-is") {
        auto sr = make_sr(2.5, 0.8, true);
        auto fused = fuse(std::span(&sr, 1), {}, 2.0);
        for (size_t i = 0; i < fused.values.size(); ++i) {
            CHECK(fused.valid[i] == 1);
            CHECK(fused.values[i] == doctest::Approx(2.5));
            CHECK(fused.source[i] == 0);
        }
    }
    SUBCASE("secondary fills only where no primary is valid") {
        auto prim = make_sr(2.0, 0.8, true);
        // carve an invalid hole in the primary
        for (int y = 10; y < 20; ++y)
            for (int x = 10; x < 20; ++x) {
                prim.valid.at(x, y) = 0;
                prim.weight.at(x, y) = 0.0;
            }
        auto sec = make_sr(7.0, 0.5, true);
        auto fused = fuse(std::span(&prim, 1), std::span(&sec, 1), 0.0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                bool hole = x >= 10 && x < 20 && y >= 10 && y < 20;
                CHECK(fused.values.at(x, y) == doctest::Approx(hole ? 7.0 : 2.0));
                CHECK(fused.source.at(x, y) == (hole ? 1 : 0));
            }
    }
    SUBCASE("pixel valid in exactly one shot equals that estimate") {
        auto a = make_sr(1.0, 0.3, true);
        auto b = make_sr(9.0, 0.9, false);  // all invalid
        std::vector<ShotRadiance> prim{a, b};
        auto fused = fuse(prim, {}, 1.5);
        for (size_t i = 0; i < fused.values.size(); ++i)
            CHECK(fused.values[i] == doctest::Approx(1.0));
    }
    SUBCASE("zero smoothing equals the plain weighted average") {
        Rng rng(3);
        auto a = make_sr(0.0, 0.0, true);
        auto b = make_sr(0.0, 0.0, true);
        for (size_t i = 0; i < a.values.size(); ++i) {
            a.values[i] = rng.uniform(0.0, 1.0);
            b.values[i] = rng.uniform(4.0, 5.0);
            a.weight[i] = rng.uniform(0.1, 1.0);
            b.weight[i] = rng.uniform(0.1, 1.0);
        }
        std::vector<ShotRadiance> prim{a, b};
        auto fused = fuse(prim, {}, 0.0);
        for (size_t i = 0; i < fused.values.size(); ++i) {
            double expect = (a.weight[i] * a.values[i] + b.weight[i] * b.values[i]) /
                            (a.weight[i] + b.weight[i]);
            CHECK(fused.values[i] == doctest::Approx(expect).epsilon(1e-12));
        }
    }
    SUBCASE("smoothing never leaks weight onto invalid pixels") {
        auto a = make_sr(1.0, 0.8, true);
        for (int x = 0; x < w; ++x) {
            a.valid.at(x, 5) = 0;
            a.weight.at(x, 5) = 0.0;
        }
        auto fused = fuse(std::span(&a, 1), {}, 3.0);
        for (int x = 0; x < w; ++x) CHECK(fused.valid.at(x, 5) == 0);
    }
    SUBCASE("no sources at all is an error") {
        CHECK_THROWS_AS(fuse({}, {}, 1.0), BadInput);
    }
}

TEST_CASE("per_camera_hdr") {
    CameraModel cam = quiet_camera();
    double eta = snr_from_db(3.2);
    auto scene = test_scene(11, 3.6, 9.0);

    SUBCASE("one shot acts as identity on valid pixels") {
        Shot shot = shot_with_low(cam, CameraId::primary, 3.6, eta);
        auto stacks =
            capture_stack(scene, std::span(&shot, 1), std::array<CameraModel, 2>{cam, cam}, 4);
        auto sr = to_radiance(stacks.primary[0], cam, eta);
        auto q = per_camera_hdr(std::span(&sr, 1));
        for (size_t i = 0; i < q.values.size(); ++i)
            if (sr.valid[i]) CHECK(q.values[i] == doctest::Approx(sr.values[i]));
    }
    SUBCASE("dense stack recovers the scene within the quantization floor") {
        PlannerConfig cfg;
        auto cams = std::array<CameraModel, 2>{cam, cam};
        auto dense = make_dense_plan(scene.spec.target_hist, cams, 2, cfg);
        auto stacks = capture_stack(scene, dense.shots, cams, 5);
        std::vector<ShotRadiance> srs;
        for (const auto& img : stacks.primary) srs.push_back(to_radiance(img, cam, cfg.eta));
        auto q = per_camera_hdr(srs);
        double step = 0.0;
        for (int d = 1; d < 256; ++d) step = std::max(step, cam.icrf(d) - cam.icrf(d - 1));
        double sse = 0.0;
        size_t n = 0;
        for (size_t i = 0; i < q.values.size(); ++i) {
            REQUIRE(q.valid[i] == 1);
            double e = q.values[i] - scene.log_radiance[i];
            sse += e * e;
            ++n;
        }
        CHECK(std::sqrt(sse / double(n)) < step);
    }
    SUBCASE("saturated fallbacks stay ordered for tone mapping") {
        // one mid-range shot: pixels above its interval saturate, below are dark
        Shot shot = shot_with_low(cam, CameraId::primary, 6.0, eta);
        auto stacks =
            capture_stack(scene, std::span(&shot, 1), std::array<CameraModel, 2>{cam, cam}, 6);
        auto sr = to_radiance(stacks.primary[0], cam, eta);
        auto q = per_camera_hdr(std::span(&sr, 1));
        for (int y = 0; y < q.values.height(); ++y)
            for (int x = 0; x < q.values.width(); ++x) {
                if (q.valid.at(x, y)) continue;
                double v = q.values.at(x, y);
                double truth = scene.log_radiance.at(x, y);
                if (truth > shot.interval.hi)
                    CHECK(v >= q.range_hi - 1e-9);  // saturated side clips high
                if (truth < shot.interval.lo)
                    CHECK(v <= q.range_lo + 1e-9);  // dark side clips low
            }
    }
}
