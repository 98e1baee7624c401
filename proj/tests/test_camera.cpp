// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "stereohdr/camera.hpp"
#include "stereohdr/rng.hpp"

using namespace stereohdr;

namespace {

CameraModel quiet_camera(double sigma_r, double sigma_q) {
    CameraModel cam = make_default_camera();
    cam.noise.sigma_r = sigma_r;
    cam.noise.sigma_q = sigma_q;
    return cam;
}

}  // namespace

TEST_CASE("snr basics") {
    CameraModel cam = quiet_camera(2.0, 1.0);
    CHECK(cam.snr(0.0, 0.1, 1.0) == 0.0);

    CameraModel pure = quiet_camera(0.0, 0.0);
    // pure shot noise: snr == phi * t
    CHECK(pure.snr(10.0, 0.1, 1.0) == doctest::Approx(1.0));
    CHECK(pure.snr_db(10.0, 0.1, 1.0) == doctest::Approx(0.0));

    // direct evaluation: (10*0.1)^2 / (10*0.1 + 4 + 1) = 1/6
    CHECK(cam.snr(10.0, 0.1, 1.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
    CHECK(cam.snr_db(10.0, 0.1, 1.0) == doctest::Approx(10.0 * std::log10(1.0 / 6.0)));
}

TEST_CASE("min admissible signal") {
    SUBCASE("shot-noise-only limit") {
        NoiseModel n{0.0, 0.0, 100.0};
        CHECK(n.min_admissible_signal(1.0, 4.0) == doctest::Approx(4.0));
        CHECK(n.min_admissible_signal(2.0, 4.0) == doctest::Approx(2.0));
    }
    SUBCASE("root verified against a bisection oracle") {
        NoiseModel n{1.0, 1.0, 100.0};
        double g = 0.5, eta = 2.0;
        double xl = n.min_admissible_signal(g, eta);
        auto snr_of_x = [&](double x) {
            return x * x / (x / g + n.sigma_r * n.sigma_r / (g * g) + n.sigma_q * n.sigma_q);
        };
        // independent bisection on the monotone snr-vs-x curve
        double lo = 1e-12, hi = 1e6;
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            (snr_of_x(mid) < eta ? lo : hi) = mid;
        }
        CHECK(xl == doctest::Approx(hi).epsilon(1e-9));
        CHECK(snr_of_x(xl) == doctest::Approx(eta).epsilon(1e-12));
    }
    SUBCASE("strictly increasing in eta") {
        NoiseModel n{2.0, 3.0, 100.0};
        double prev = 0.0;
        for (double eta = 0.5; eta < 30.0; eta *= 1.7) {
            double xl = n.min_admissible_signal(0.7, eta);
            CHECK(xl > prev);
            prev = xl;
        }
    }
}

TEST_CASE("snr at the admissible floor equals eta") {
    Rng rng(99);
    CameraModel cam = make_default_camera();
    for (int i = 0; i < 200; ++i) {
        cam.noise.sigma_r = rng.uniform(0.0, 5.0);
        cam.noise.sigma_q = rng.uniform(0.0, 3.0);
        double g = rng.uniform(0.1, 4.0);
        double eta = rng.uniform(0.5, 20.0);
        double t = rng.uniform(1e-3, 2.0);
        double xl = cam.min_admissible_signal(g, eta);
        double phi = xl * g / t;
        CHECK(cam.snr(phi, t, g) == doctest::Approx(eta).epsilon(1e-9));
    }
}

TEST_CASE("log radiance interval") {
    SUBCASE("direct substitution") {
        // engineered so x_l = e^-6 and e(d_sat) = 0
        CameraModel cam;
        cam.noise = {0.0, 0.0, 100.0};
        cam.icrf = make_gamma_icrf(2.2, 2.2 * std::log(255.0 / 250.0));
        Interval iv = cam.log_radiance_interval(1.0, 1.0, std::exp(-6.0));
        CHECK(iv.lo == doctest::Approx(-6.0));
        CHECK(iv.hi == doctest::Approx(0.0).epsilon(1e-9));
    }
    SUBCASE("doubling t shifts both endpoints down by log 2") {
        CameraModel cam = make_default_camera();
        double eta = snr_from_db(3.2);
        Interval a = cam.log_radiance_interval(0.01, 1.0, eta);
        Interval b = cam.log_radiance_interval(0.02, 1.0, eta);
        CHECK(b.lo == doctest::Approx(a.lo - std::log(2.0)));
        CHECK(b.hi == doctest::Approx(a.hi - std::log(2.0)));
        CHECK(b.length() == doctest::Approx(a.length()));
    }
    SUBCASE("higher ISO at fixed t/g: top unchanged, floor rises") {
        CameraModel cam = make_default_camera();
        double eta = snr_from_db(3.2);
        double g1 = 1.0, g2 = 0.5;  // ISO doubled
        double t1 = 0.02, t2 = t1 * g2 / g1;  // fixed t/g
        Interval a = cam.log_radiance_interval(t1, g1, eta);
        Interval b = cam.log_radiance_interval(t2, g2, eta);
        CHECK(b.hi == doctest::Approx(a.hi));
        CHECK(b.lo > a.lo);
    }
    SUBCASE("width independent of t, strictly shrinking with ISO") {
        CameraModel cam = make_default_camera();
        double eta = snr_from_db(3.2);
        double w1 = cam.log_radiance_interval(0.004, 1.0, eta).length();
        double w2 = cam.log_radiance_interval(1.9, 1.0, eta).length();
        CHECK(w1 == doctest::Approx(w2));
        double prev = 1e9;
        for (double iso : cam.iso_set) {
            double w = cam.log_radiance_interval(0.01, cam.gain_for_iso(iso), eta).length();
            CHECK(w < prev);
            prev = w;
        }
    }
    SUBCASE("infeasible when the SNR floor tops saturation") {
        CameraModel cam;
        cam.noise = {0.0, 0.0, 100.0};
        cam.icrf = make_gamma_icrf(2.2, 0.0);  // e(255) = 0
        CHECK_THROWS_AS(cam.log_radiance_interval(0.1, 1.0, 100.0), InfeasibleShot);
    }
}

TEST_CASE("expose_pixel") {
    SUBCASE("saturation and inverse consistency without noise") {
        CameraModel cam = quiet_camera(0.0, 0.0);
        cam.noise.shot_noise_scale = 0.0;
        Rng rng(1);
        // far above the top code
        double phi_sat = std::exp(cam.icrf(255)) * 4.0;
        CHECK(cam.expose_pixel(phi_sat, 1.0, 1.0, rng) == 255);
        // signal exactly at code 128
        double phi_mid = std::exp(cam.icrf(128));
        CHECK(cam.expose_pixel(phi_mid, 1.0, 1.0, rng) == 128);
        CHECK(cam.expose_pixel(0.0, 1.0, 1.0, rng) == 0);
    }
    SUBCASE("noiseless capture inverts within one code") {
        CameraModel cam = quiet_camera(0.0, 0.0);
        cam.noise.shot_noise_scale = 0.0;
        Rng rng(1);
        for (int d = 1; d < cam.d_saturation; ++d) {
            double phi = std::exp(cam.icrf(d) + 0.002);
            int got = cam.expose_pixel(phi, 1.0, 1.0, rng);
            CHECK(std::abs(got - d) <= 1);
        }
    }
    SUBCASE("noise variance matches the model within 5%") {
        // linear response so the quantization step maps to a constant sigma_q:
        // step in signal units is x_max/255, sigma_q = step/sqrt(12)
        double x_max = 4000.0;
        CameraModel cam;
        cam.icrf = make_linear_icrf(std::log(x_max));
        cam.noise.sigma_r = 6.0;
        cam.noise.sigma_q = (x_max / 255.0) / std::sqrt(12.0);
        double g = 1.3, t = 0.5;
        double phi = std::exp(cam.icrf(120)) * g / t;

        Rng rng(12345);
        const int n = 100000;
        double mean = 0.0, m2 = 0.0;
        for (int i = 0; i < n; ++i) {
            int d = cam.expose_pixel(phi, t, g, rng);
            double est = std::exp(cam.icrf(d)) * g;  // electrons
            double delta = est - mean;
            mean += delta / double(i + 1);
            m2 += delta * (est - mean);
        }
        double var = m2 / double(n - 1);
        double predicted = phi * t + cam.noise.sigma_r * cam.noise.sigma_r +
                           cam.noise.sigma_q * cam.noise.sigma_q * g * g;
        CHECK(var == doctest::Approx(predicted).epsilon(0.05));
    }
    SUBCASE("deterministic given the generator state") {
        CameraModel cam = make_default_camera();
        Rng a(77), b(77);
        for (int i = 0; i < 50; ++i)
            CHECK(cam.expose_pixel(30.0, 0.05, 1.0, a) == cam.expose_pixel(30.0, 0.05, 1.0, b));
    }
}

TEST_CASE("lowest admissible pixel tracks the signal floor") {
    CameraModel cam = make_default_camera();
    double eta = snr_from_db(3.2);
    for (double iso : cam.iso_set) {
        double g = cam.gain_for_iso(iso);
        int dl = cam.lowest_admissible_pixel(g, eta);
        double ls = std::log(cam.min_admissible_signal(g, eta));
        CHECK(cam.icrf(dl) >= ls);
        if (dl > 0) CHECK(cam.icrf(dl - 1) < ls);
        CHECK(dl < cam.d_saturation);
    }
}

TEST_CASE("triangular weight") {
    CHECK(triangular_weight(0) == 0.0);
    CHECK(triangular_weight(255) == 0.0);
    double peak = triangular_weight(127);
    CHECK(triangular_weight(128) == doctest::Approx(peak));
    for (int d = 0; d <= 255; ++d) {
        CHECK(triangular_weight(d) == doctest::Approx(triangular_weight(255 - d)));
        CHECK(triangular_weight(d) <= peak);
    }
}
