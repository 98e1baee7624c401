// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <set>
#include <span>
#include <vector>

#include "stereohdr/camera.hpp"
#include "stereohdr/disparity.hpp"
#include "stereohdr/errors.hpp"
#include "stereohdr/rng.hpp"
#include "stereohdr/scene.hpp"

namespace stereohdr {

/// One pixel-value measurement of a scene point in one (shot, camera).
struct IcrfObservation {
    int camera = 0;  // 0 = primary, 1 = secondary
    int d = 0;
    double log_t = 0.0;
    double log_g = 0.0;
};

/// All measurements of one scene point across shots and cameras.
struct Correspondence {
    std::vector<IcrfObservation> obs;
};

/// Joint estimate: primary table, constant secondary offset, and diagnostics.
struct IcrfEstimate {
    Icrf e1;
    double offset_c = 0.0;
    double residual = 0.0;
    double lambda_sm = 0.0;
    bool monotone_ok = true;  // non-decreasing where hat weight exceeds 10% of peak

    Icrf e2() const { return e1.shifted(offset_c); }
};

namespace icrf_detail {

constexpr int kVars = 257;  // e1(0..255) then the offset c

/// Symmetric positive-definite solve (in-place Cholesky). Returns false when a
/// pivot collapses, i.e. the gauge-fixed system is still rank deficient.
inline bool cholesky_solve(std::vector<double>& H, std::vector<double>& b, int n) {
    for (int j = 0; j < n; ++j) {
        double d = H[size_t(j) * n + j];
        for (int k = 0; k < j; ++k) d -= H[size_t(j) * n + k] * H[size_t(j) * n + k];
        if (!(d > 1e-11)) return false;
        d = std::sqrt(d);
        H[size_t(j) * n + j] = d;
        for (int i = j + 1; i < n; ++i) {
            double s = H[size_t(i) * n + j];
            for (int k = 0; k < j; ++k) s -= H[size_t(i) * n + k] * H[size_t(j) * n + k];
            H[size_t(i) * n + j] = s / d;
        }
    }
    for (int i = 0; i < n; ++i) {
        double s = b[size_t(i)];
        for (int k = 0; k < i; ++k) s -= H[size_t(i) * n + k] * b[size_t(k)];
        b[size_t(i)] = s / H[size_t(i) * n + i];
    }
    for (int i = n - 1; i >= 0; --i) {
        double s = b[size_t(i)];
        for (int k = i + 1; k < n; ++k) s -= H[size_t(k) * n + i] * b[size_t(k)];
        b[size_t(i)] = s / H[size_t(i) * n + i];
    }
    return true;
}

inline void check_data_volume(std::span<const Correspondence> corrs) {
    std::set<int> pixel_values;
    for (const auto& c : corrs)
        for (const auto& o : c.obs) pixel_values.insert(o.d);
    if (pixel_values.size() < 50) throw InsufficientData("correspondences span too few pixel values");
}

inline void check_preconditions(std::span<const Correspondence> corrs) {
    // Within-camera exposure diversity is what pins the table's shape: with a
    // single exposure per camera a flat table plus a suitable offset fits any
    // cross-camera data exactly, so such input is rejected as insufficient.
    std::set<long long> per_camera[2];
    for (const auto& c : corrs)
        for (const auto& o : c.obs) per_camera[o.camera == 1 ? 1 : 0].insert(llround(o.log_t * 1e9));
    if (per_camera[0].size() < 2 && per_camera[1].size() < 2)
        throw InsufficientData("need at least two distinct exposures within one camera");
    check_data_volume(corrs);
}

}  // namespace icrf_detail

/// Joint response recovery from point correspondences. Minimizes the weighted
/// squared consistency error of all observations against per-point radiances,
/// with the secondary response constrained to the primary plus a constant
/// offset, a curvature (second-difference) smoothness term on the table, and
/// the gauge pinned by an anchor entry. Per-point radiances are eliminated in
/// closed form, leaving a dense 257-variable normal system.
inline IcrfEstimate estimate_joint_icrf(std::span<const Correspondence> corrs,
                                        double lambda_sm = 50.0, int anchor_d = 128,
                                        double anchor_value = 0.0) {
    using namespace icrf_detail;
    check_preconditions(corrs);

    std::vector<double> H(size_t(kVars) * kVars, 0.0), rhs(kVars, 0.0);
    auto idx = [](const IcrfObservation& o, int which) {
        // which 0: pixel entry, which 1: offset entry (secondary only)
        return which == 0 ? o.d : 256;
    };

    struct Packed {
        int n = 0;
        std::array<const IcrfObservation*, 32> obs;
        std::array<double, 32> w2, m;
    };

    for (const auto& c : corrs) {
        Packed p;
        for (const auto& o : c.obs) {
            double w = triangular_weight(o.d);
            if (w <= 0.0 || p.n >= int(p.obs.size())) continue;
            p.obs[size_t(p.n)] = &o;
            p.w2[size_t(p.n)] = w * w;
            p.m[size_t(p.n)] = -o.log_t + o.log_g;
            ++p.n;
        }
        if (p.n < 2) continue;  // a single observation cancels against its own radiance
        double denom = 0.0, sm = 0.0;
        for (int i = 0; i < p.n; ++i) {
            denom += p.w2[size_t(i)];
            sm += p.w2[size_t(i)] * p.m[size_t(i)];
        }
        // H += sum w2 a a^T - s s^T / denom, rhs -= (sum w2 m a - s * sm / denom)
        auto add_entry = [&](int r, int cidx, double v) { H[size_t(r) * kVars + cidx] += v; };
        for (int i = 0; i < p.n; ++i) {
            const auto& oi = *p.obs[size_t(i)];
            int nzi = oi.camera == 1 ? 2 : 1;
            for (int a = 0; a < nzi; ++a) {
                int ra = idx(oi, a);
                rhs[size_t(ra)] -= p.w2[size_t(i)] * p.m[size_t(i)];
                for (int b = 0; b < nzi; ++b) add_entry(ra, idx(oi, b), p.w2[size_t(i)]);
            }
            for (int j = 0; j < p.n; ++j) {
                const auto& oj = *p.obs[size_t(j)];
                int nzj = oj.camera == 1 ? 2 : 1;
                double f = p.w2[size_t(i)] * p.w2[size_t(j)] / denom;
                for (int a = 0; a < nzi; ++a) {
                    int ra = idx(oi, a);
                    for (int b = 0; b < nzj; ++b) add_entry(ra, idx(oj, b), -f);
                }
            }
            for (int a = 0; a < nzi; ++a)
                rhs[size_t(idx(oi, a))] += p.w2[size_t(i)] * sm / denom;
        }
    }

    // curvature smoothness on the shared table
    for (int l = 1; l <= 254; ++l) {
        double wl = std::sqrt(lambda_sm) * triangular_weight(l);
        if (wl <= 0.0) continue;
        const int cols[3] = {l - 1, l, l + 1};
        const double coef[3] = {wl, -2.0 * wl, wl};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
                H[size_t(cols[a]) * kVars + cols[b]] += coef[a] * coef[b];
    }

    // gauge anchor
    H[size_t(anchor_d) * kVars + anchor_d] += 1.0;
    rhs[size_t(anchor_d)] += anchor_value;

    std::vector<double> x = rhs;
    if (!cholesky_solve(H, x, kVars))
        throw RankDeficient("response system singular after gauge fixing");

    IcrfEstimate est;
    est.lambda_sm = lambda_sm;
    est.offset_c = x[256];
    std::array<double, Icrf::kTableSize> table;
    for (int d = 0; d < Icrf::kTableSize; ++d) table[size_t(d)] = x[size_t(d)];

    // Monotonicity is checked, not enforced: a violation on the well-weighted
    // support is a data problem the caller should see.
    est.monotone_ok = true;
    double wmax = triangular_weight(127);
    for (int d = 1; d < Icrf::kTableSize; ++d) {
        if (triangular_weight(d) < 0.1 * wmax || triangular_weight(d - 1) < 0.1 * wmax) continue;
        if (table[size_t(d)] < table[size_t(d - 1)] - 1e-9) est.monotone_ok = false;
    }
    // The returned table must satisfy the response invariant; tiny numerical
    // dips outside the trusted support are flattened.
    std::array<double, Icrf::kTableSize> mono = table;
    for (int d = 1; d < Icrf::kTableSize; ++d)
        mono[size_t(d)] = std::max(mono[size_t(d)], mono[size_t(d - 1)]);
    est.e1 = Icrf(mono);

    // residual of the returned estimate: data part with optimal per-point
    // radiances, plus smoothness
    double cost = 0.0;
    for (const auto& c : corrs) {
        double denom = 0.0, num = 0.0;
        for (const auto& o : c.obs) {
            double w = triangular_weight(o.d);
            if (w <= 0.0) continue;
            double z = est.e1(o.d) + (o.camera == 1 ? est.offset_c : 0.0) - o.log_t + o.log_g;
            denom += w * w;
            num += w * w * z;
        }
        if (denom <= 0.0) continue;
        double rp = num / denom;
        for (const auto& o : c.obs) {
            double w = triangular_weight(o.d);
            if (w <= 0.0) continue;
            double z = est.e1(o.d) + (o.camera == 1 ? est.offset_c : 0.0) - o.log_t + o.log_g;
            cost += w * w * (z - rp) * (z - rp);
        }
    }
    for (int l = 1; l <= 254; ++l) {
        double wl = triangular_weight(l);
        double dd = est.e1(l - 1) - 2.0 * est.e1(l) + est.e1(l + 1);
        cost += lambda_sm * wl * wl * dd * dd;
    }
    est.residual = cost;
    return est;
}

/// One-parameter fallback for exposure-poor stacks: keeps the given primary
/// table and fits only the constant secondary offset (the per-point radiances
/// are eliminated in closed form, leaving a scalar normal equation).
inline IcrfEstimate estimate_offset_only(std::span<const Correspondence> corrs, const Icrf& e1) {
    double num = 0.0, den = 0.0;
    for (const auto& c : corrs) {
        double A = 0.0, B = 0.0, Z = 0.0, ZS = 0.0, S2 = 0.0;
        for (const auto& o : c.obs) {
            double w = triangular_weight(o.d);
            if (w <= 0.0) continue;
            double w2 = w * w;
            double zeta = e1(o.d) - o.log_t + o.log_g;
            double s = o.camera == 1 ? 1.0 : 0.0;
            A += w2;
            B += w2 * s;
            Z += w2 * zeta;
            ZS += w2 * zeta * s;
            S2 += w2 * s * s;
        }
        if (A <= 0.0 || B <= 0.0 || B >= A - 1e-12) continue;  // needs both cameras
        num += ZS - Z * B / A;
        den += S2 - B * B / A;
    }
    if (den <= 1e-12) throw InsufficientData("no cross-camera pairs constrain the offset");
    IcrfEstimate est;
    est.e1 = e1;
    est.offset_c = -num / den;
    est.lambda_sm = 0.0;
    est.monotone_ok = e1.is_non_decreasing();
    double cost = 0.0;
    for (const auto& c : corrs) {
        double denom = 0.0, mean = 0.0;
        for (const auto& o : c.obs) {
            double w = triangular_weight(o.d);
            if (w <= 0.0) continue;
            double z = e1(o.d) + (o.camera == 1 ? est.offset_c : 0.0) - o.log_t + o.log_g;
            denom += w * w;
            mean += w * w * z;
        }
        if (denom <= 0.0) continue;
        mean /= denom;
        for (const auto& o : c.obs) {
            double w = triangular_weight(o.d);
            if (w <= 0.0) continue;
            double z = e1(o.d) + (o.camera == 1 ? est.offset_c : 0.0) - o.log_t + o.log_g;
            cost += w * w * (z - mean) * (z - mean);
        }
    }
    est.residual = cost;
    return est;
}

/// Per-point radiance implied by an estimate (weighted mean over observations).
inline double point_radiance(const Correspondence& c, const IcrfEstimate& est) {
    double denom = 0.0, num = 0.0;
    for (const auto& o : c.obs) {
        double w = triangular_weight(o.d);
        if (w <= 0.0) continue;
        double z = est.e1(o.d) + (o.camera == 1 ? est.offset_c : 0.0) - o.log_t + o.log_g;
        denom += w * w;
        num += w * w * z;
    }
    return denom > 0.0 ? num / denom : std::nan("");
}

/// Samples correspondences from the stacks through a disparity map. Primary
/// pixels are drawn evenly across intensity deciles (so dark table entries are
/// not starved by bright-dominated scenes), paired with their
/// disparity-shifted secondary pixels, and observations outside each shot's
/// admissible pixel range are dropped. Points need at least one usable
/// observation per camera to constrain the offset.
inline std::vector<Correspondence> correspondences_from_disparity(
    const CaptureStacks& stacks, std::span<const CameraModel> cameras, const DisparityMap& disp,
    int budget, double eta, uint64_t seed) {
    if (stacks.primary.empty() || stacks.secondary.empty())
        throw InsufficientData("need both cameras' stacks");
    const int w = disp.values.width(), h = disp.values.height();
    const ImageU8& strat_img = stacks.primary.front().pixels;

    std::array<std::vector<int>, 10> strata;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (!disp.valid.at(x, y)) continue;
            int xs = x - int(std::lround(disp.values.at(x, y)));
            if (xs < 0 || xs >= w) continue;
            int s = std::min(9, strat_img.at(x, y) * 10 / 256);
            strata[size_t(s)].push_back(y * w + x);
        }

    std::vector<int> d_low_p, d_low_s;
    for (const auto& img : stacks.primary)
        d_low_p.push_back(cameras[0].lowest_admissible_pixel(img.shot.gain, eta));
    for (const auto& img : stacks.secondary)
        d_low_s.push_back(cameras[1].lowest_admissible_pixel(img.shot.gain, eta));

    Rng rng(hash_seed(seed, 0x1c2f));
    std::vector<Correspondence> out;
    const int per_stratum = std::max(1, budget / 10);
    for (auto& bucket : strata) {
        // deterministic partial shuffle, then take the head
        for (size_t i = 0; i + 1 < bucket.size(); ++i) {
            size_t j = i + size_t(rng.below(bucket.size() - i));
            std::swap(bucket[i], bucket[j]);
        }
        int taken = 0;
        for (size_t i = 0; i < bucket.size() && taken < per_stratum; ++i) {
            int x = bucket[i] % w, y = bucket[i] / w;
            int xs = x - int(std::lround(disp.values.at(x, y)));
            Correspondence c;
            bool has_p = false, has_s = false;
            for (size_t k = 0; k < stacks.primary.size(); ++k) {
                int d = stacks.primary[k].pixels.at(x, y);
                if (!cameras[0].valid_pixel(d, d_low_p[k])) continue;
                c.obs.push_back({0, d, std::log(stacks.primary[k].shot.t),
                                 std::log(stacks.primary[k].shot.gain)});
                has_p = true;
            }
            for (size_t k = 0; k < stacks.secondary.size(); ++k) {
                int d = stacks.secondary[k].pixels.at(xs, y);
                if (!cameras[1].valid_pixel(d, d_low_s[k])) continue;
                c.obs.push_back({1, d, std::log(stacks.secondary[k].shot.t),
                                 std::log(stacks.secondary[k].shot.gain)});
                has_s = true;
            }
            if (!has_p || !has_s) continue;
            out.push_back(std::move(c));
            ++taken;
        }
    }
    if (out.empty()) throw InsufficientData("no usable correspondences survived filtering");
    icrf_detail::check_data_volume(out);
    return out;
}

/// Root-mean-square table difference over a pixel-value range after removing
/// the gauge (best constant shift).
inline double icrf_rmse(const Icrf& a, const Icrf& b, int d_lo = 20, int d_hi = 235) {
    double mean = 0.0;
    int n = 0;
    for (int d = d_lo; d <= d_hi; ++d, ++n) mean += a(d) - b(d);
    mean /= std::max(1, n);
    double ss = 0.0;
    for (int d = d_lo; d <= d_hi; ++d) {
        double e = a(d) - b(d) - mean;
        ss += e * e;
    }
    return std::sqrt(ss / std::max(1, n));
}

}  // namespace stereohdr
