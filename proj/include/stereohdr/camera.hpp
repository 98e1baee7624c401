// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include "stereohdr/errors.hpp"
#include "stereohdr/interval.hpp"
#include "stereohdr/rng.hpp"

namespace stereohdr {

/// SNR values follow the power convention: snr_from_db(3.2) is the ratio the
/// planner compares per-shot SNR against when the user asks for 3.2 dB.
inline double snr_from_db(double db) { return std::pow(10.0, db / 10.0); }
inline double snr_to_db(double ratio) { return 10.0 * std::log10(ratio); }

/// Hat weighting over pixel values: zero at both ends, peaking mid-range.
inline double triangular_weight(int d) {
    return std::min(std::clamp(d, 0, 255), 255 - std::clamp(d, 0, 255)) / 127.5;
}

/// Inverse camera response: pixel value -> log exposure-referred signal,
/// i.e. the log of phi*t/g that produces that pixel value.
class Icrf {
  public:
    static constexpr int kTableSize = 256;

    Icrf() { table_.fill(0.0); }
    explicit Icrf(const std::array<double, kTableSize>& table) : table_(table) { validate(); }

    double operator()(int d) const { return table_[size_t(std::clamp(d, 0, kTableSize - 1))]; }
    const std::array<double, kTableSize>& table() const { return table_; }
    std::array<double, kTableSize>& mutable_table() { return table_; }

    /// Continuous pixel position whose interpolated log signal equals ls.
    double continuous_pixel(double ls) const {
        if (ls <= table_.front()) return 0.0;
        if (ls >= table_.back()) return double(kTableSize - 1);
        // table_ is non-decreasing: binary search for the bracketing segment.
        auto it = std::upper_bound(table_.begin(), table_.end(), ls);
        int d1 = int(it - table_.begin());
        int d0 = d1 - 1;
        double e0 = table_[d0], e1 = table_[d1];
        double f = e1 > e0 ? (ls - e0) / (e1 - e0) : 0.0;
        return double(d0) + f;
    }

    /// Quantized forward response for a linear signal (phi*t/g).
    int pixel_for_signal(double signal, int d_max = kTableSize - 1) const {
        if (!(signal > 0.0)) return 0;
        int d = int(std::lround(continuous_pixel(std::log(signal))));
        return std::clamp(d, 0, d_max);
    }

    /// Smallest pixel value whose log signal is at least ls, or kTableSize if none.
    int first_pixel_at_or_above(double ls) const {
        auto it = std::lower_bound(table_.begin(), table_.end(), ls);
        return int(it - table_.begin());
    }

    bool is_non_decreasing() const {
        for (int d = 1; d < kTableSize; ++d)
            if (table_[d] < table_[d - 1]) return false;
        return true;
    }

    void validate() const {
        for (double v : table_)
            if (!std::isfinite(v)) throw BadInput("icrf entries must be finite");
        if (!is_non_decreasing()) throw BadInput("icrf must be non-decreasing");
    }

    Icrf shifted(double offset) const {
        Icrf out = *this;
        for (auto& v : out.table_) v += offset;
        return out;
    }

  private:
    std::array<double, kTableSize> table_;
};

/// Gamma-style response, affine in log: e(d) = log_full_scale + gamma*log(d/255).
/// d=0 is pinned half a code above zero so the table stays finite.
inline Icrf make_gamma_icrf(double gamma = 2.2, double log_full_scale = std::log(5000.0)) {
    std::array<double, Icrf::kTableSize> t;
    for (int d = 0; d < Icrf::kTableSize; ++d)
        t[d] = log_full_scale + gamma * std::log(std::max(double(d), 0.5) / 255.0);
    return Icrf(t);
}

inline Icrf make_linear_icrf(double log_full_scale = std::log(5000.0)) {
    return make_gamma_icrf(1.0, log_full_scale);
}

struct NoiseModel {
    double sigma_r = 2.0;     // read noise, electrons
    double sigma_q = 1.0;     // quantization noise, electrons at unit gain
    double gain_const = 100;  // K in iso = K / g
    // Simulation-only switch: 0 turns photon shot noise off so tests can
    // capture exact radiances. SNR math always assumes the physical value 1.
    double shot_noise_scale = 1.0;

    /// Smallest exposure-referred signal x = phi*t/g meeting the SNR floor eta:
    /// the positive root of eta = x^2 / (x/g + sigma_r^2/g^2 + sigma_q^2).
    double min_admissible_signal(double g, double eta) const {
        double a = eta / g;
        double b = sigma_r * sigma_r / (g * g) + sigma_q * sigma_q;
        return 0.5 * (a + std::sqrt(a * a + 4.0 * eta * b));
    }

    void validate() const {
        if (sigma_r < 0 || sigma_q < 0) throw BadInput("noise sigmas must be non-negative");
        if (!(gain_const > 0)) throw BadInput("gain constant must be positive");
    }
};

/// One physical camera: response table, noise, and hardware limits.
struct CameraModel {
    Icrf icrf;
    NoiseModel noise;
    double t_min = 1.0 / 4000.0;
    double t_max = 3.2;
    std::vector<double> iso_set = {50, 100, 200, 400};
    int d_saturation = 250;  // highest unsaturated pixel value
    int bit_depth = 8;

    double gain_for_iso(double iso) const { return noise.gain_const / iso; }
    int max_pixel() const { return (1 << bit_depth) - 1; }
    double log_x_u() const { return icrf(d_saturation); }

    /// Per-shot SNR for an unsaturated pixel of linear radiance phi.
    double snr(double phi, double t, double g) const {
        if (!(phi > 0.0)) return 0.0;
        double s = phi * t;
        return s * s / (s + noise.sigma_r * noise.sigma_r + noise.sigma_q * noise.sigma_q * g * g);
    }
    double snr_db(double phi, double t, double g) const { return snr_to_db(snr(phi, t, g)); }

    double min_admissible_signal(double g, double eta) const {
        return noise.min_admissible_signal(g, eta);
    }

    /// Log radiance range a shot captures with SNR >= eta and no saturation.
    Interval log_radiance_interval(double t, double g, double eta) const {
        double xl = min_admissible_signal(g, eta);
        double lo = std::log(xl) - std::log(t) + std::log(g);
        double hi = log_x_u() - std::log(t) + std::log(g);
        if (!(lo < hi))
            throw InfeasibleShot("SNR floor exceeds saturation ceiling for this gain");
        return {lo, hi};
    }

    /// Smallest pixel value meeting the SNR floor at gain g. Valid pixels for
    /// reconstruction are strictly between this value and d_saturation.
    int lowest_admissible_pixel(double g, double eta) const {
        return icrf.first_pixel_at_or_above(std::log(min_admissible_signal(g, eta)));
    }

    bool valid_pixel(int d, int d_low) const { return d > d_low && d < d_saturation; }

    /// Simulated exposure of one pixel: shot + read noise in electrons, then the
    /// response curve and quantization. Deterministic for a given generator state.
    int expose_pixel(double phi, double t, double g, Rng& rng) const {
        double electrons = phi * t;
        double shot = electrons > 0 && noise.shot_noise_scale > 0
                          ? rng.normal(0.0, noise.shot_noise_scale * std::sqrt(electrons))
                          : 0.0;
        double read = noise.sigma_r > 0 ? rng.normal(0.0, noise.sigma_r) : 0.0;
        double signal = (electrons + shot + read) / g;
        return icrf.pixel_for_signal(signal, max_pixel());
    }

    void validate() const {
        icrf.validate();
        noise.validate();
        if (!(t_min > 0) || !(t_min <= t_max)) throw BadInput("bad exposure range");
        if (iso_set.empty()) throw BadInput("iso set must be non-empty");
        for (size_t i = 1; i < iso_set.size(); ++i)
            if (!(iso_set[i] > iso_set[i - 1])) throw BadInput("iso set must be strictly increasing");
        if (bit_depth < 1 || bit_depth > 8) throw BadInput("bit depth must be in [1, 8]");
        if (d_saturation <= 0 || d_saturation >= (1 << bit_depth))
            throw BadInput("d_saturation out of pixel range");
    }
};

/// Default synthetic camera used by tests and presets: a phone-like sensor
/// whose per-shot usable range is about ten stops at base ISO.
inline CameraModel make_default_camera() {
    CameraModel cam;
    cam.icrf = make_gamma_icrf();
    return cam;
}

/// Larger-well variant with roughly thirteen stops of per-shot range; used
/// where wide scenes must stay plannable.
inline CameraModel make_wide_range_camera() {
    CameraModel cam;
    cam.icrf = make_gamma_icrf(2.2, std::log(50000.0));
    return cam;
}

/// Noisier sensor where quantization noise dominates, so raising ISO buys a
/// real reduction in exposure time. Exercises the ISO-selection trade-off.
inline CameraModel make_noisy_camera() {
    CameraModel cam;
    cam.icrf = make_gamma_icrf();
    cam.noise.sigma_r = 10.0;
    cam.noise.sigma_q = 30.0;
    return cam;
}

}  // namespace stereohdr
