// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "stereohdr/errors.hpp"
#include "stereohdr/interval.hpp"

namespace stereohdr {

/// Binned probability distribution over log radiance. Mass inside a bin is
/// treated as uniformly spread, so interval integrals are exact piecewise-linear
/// functions of the interval endpoints (and therefore differentiable almost
/// everywhere, which the planner's refinement stage relies on).
class LogRadianceHistogram {
  public:
    LogRadianceHistogram() = default;

    LogRadianceHistogram(std::vector<double> edges, std::vector<double> probs)
        : edges_(std::move(edges)), probs_(std::move(probs)) {
        validate();
        roi_ = {edges_.front(), edges_.back()};
    }

    static LogRadianceHistogram from_samples(std::span<const double> samples, int bins = 256) {
        if (samples.empty()) throw EmptyEstimate("no samples for histogram");
        auto [mn_it, mx_it] = std::minmax_element(samples.begin(), samples.end());
        double mn = *mn_it, mx = *mx_it;
        if (mx - mn < 1e-12) {  // constant scene: one occupied bin, padded edges
            mn -= 0.5;
            mx += 0.5;
            bins = 1;
        }
        std::vector<double> edges(bins + 1), probs(bins, 0.0);
        for (int i = 0; i <= bins; ++i) edges[i] = mn + (mx - mn) * double(i) / bins;
        const double inv_width = bins / (mx - mn);
        for (double s : samples) {
            int b = std::clamp(int((s - mn) * inv_width), 0, bins - 1);
            probs[b] += 1.0;
        }
        for (auto& p : probs) p /= double(samples.size());
        LogRadianceHistogram h(std::move(edges), std::move(probs));
        // Percentile range of interest keeps an isolated hot pixel from
        // inflating the range the planner must cover.
        std::vector<double> sorted(samples.begin(), samples.end());
        std::sort(sorted.begin(), sorted.end());
        auto pct = [&](double p) {
            double idx = p * (sorted.size() - 1);
            size_t i0 = size_t(idx);
            size_t i1 = std::min(i0 + 1, sorted.size() - 1);
            double f = idx - double(i0);
            return sorted[i0] * (1.0 - f) + sorted[i1] * f;
        };
        double lo = pct(0.001), hi = pct(0.999);
        if (lo < hi) h.set_range_of_interest(lo, hi);
        return h;
    }

    const std::vector<double>& edges() const { return edges_; }
    const std::vector<double>& probs() const { return probs_; }
    int bin_count() const { return int(probs_.size()); }
    Interval support() const { return {edges_.front(), edges_.back()}; }

    Interval range_of_interest() const { return roi_; }
    void set_range_of_interest(double lo, double hi) {
        if (!(lo < hi)) throw BadInput("range of interest must be non-degenerate");
        roi_ = {std::max(lo, edges_.front()), std::min(hi, edges_.back())};
    }

    /// Probability mass inside one interval.
    double mass_in(const Interval& iv) const {
        if (iv.empty()) return 0.0;
        double total = 0.0;
        for (size_t b = 0; b < probs_.size(); ++b) {
            double blo = edges_[b], bhi = edges_[b + 1];
            if (bhi <= iv.lo || blo >= iv.hi) continue;
            double olo = std::max(blo, iv.lo), ohi = std::min(bhi, iv.hi);
            total += probs_[b] * (ohi - olo) / (bhi - blo);
        }
        return total;
    }

    /// Probability mass inside a normalized interval set (disjoint parts sum).
    double mass_in(const IntervalSet& set) const {
        double total = 0.0;
        for (const auto& p : set.parts()) total += mass_in(p);
        return total;
    }

    /// Uncovered sub-intervals of the range of interest. Empty result means the
    /// coverage constraint holds.
    std::vector<Interval> coverage_gap(const IntervalSet& set, double eps = 0.0) const {
        return set.gaps_within(roi_, eps);
    }

    /// Inverse CDF; p in [0, 1].
    double quantile(double p) const {
        p = std::clamp(p, 0.0, 1.0);
        double acc = 0.0;
        for (size_t b = 0; b < probs_.size(); ++b) {
            if (acc + probs_[b] >= p) {
                double f = probs_[b] > 0 ? (p - acc) / probs_[b] : 0.0;
                return edges_[b] + f * (edges_[b + 1] - edges_[b]);
            }
            acc += probs_[b];
        }
        return edges_.back();
    }

    void validate() const {
        if (edges_.size() != probs_.size() + 1 || probs_.empty())
            throw BadInput("histogram edge/prob size mismatch");
        for (size_t i = 0; i + 1 < edges_.size(); ++i)
            if (!(edges_[i] < edges_[i + 1])) throw BadInput("histogram edges not increasing");
        double sum = 0.0;
        for (double p : probs_) {
            if (!(p >= 0.0)) throw BadInput("negative histogram mass");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw BadInput("histogram mass does not sum to 1");
    }

  private:
    std::vector<double> edges_;
    std::vector<double> probs_;
    Interval roi_;
};

// --- synthetic distribution presets -------------------------------------

/// Uniform over [lo, hi].
inline LogRadianceHistogram make_uniform_hist(double lo, double hi, int bins = 256) {
    std::vector<double> edges(bins + 1), probs(bins, 1.0 / bins);
    for (int i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * double(i) / bins;
    return {std::move(edges), std::move(probs)};
}

namespace detail {
inline LogRadianceHistogram from_density(double lo, double hi, int bins,
                                         const std::vector<std::pair<double, double>>& gauss) {
    // gauss: (center, sigma) pairs, equal weight, truncated to [lo, hi].
    std::vector<double> edges(bins + 1), probs(bins, 0.0);
    for (int i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * double(i) / bins;
    for (int b = 0; b < bins; ++b) {
        double x = 0.5 * (edges[b] + edges[b + 1]);
        double d = 0.0;
        for (auto [mu, sg] : gauss) d += std::exp(-0.5 * (x - mu) * (x - mu) / (sg * sg)) / sg;
        probs[b] = d + 1e-6;  // faint floor keeps coverage meaningful across the range
    }
    double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    for (auto& p : probs) p /= sum;
    return {std::move(edges), std::move(probs)};
}
}  // namespace detail

/// Single concentrated mode spanning `range_stops` stops of dynamic range.
inline LogRadianceHistogram make_unimodal_hist(double lo_log, double range_stops, int bins = 256) {
    double span = range_stops * std::log(2.0);
    double hi = lo_log + span;
    return detail::from_density(lo_log, hi, bins, {{lo_log + 0.45 * span, 0.16 * span}});
}

/// Two modes near the range ends, as in indoor/outdoor mixed scenes.
inline LogRadianceHistogram make_bimodal_hist(double lo_log, double range_stops, int bins = 256,
                                              double balance = 0.5) {
    double span = range_stops * std::log(2.0);
    double hi = lo_log + span;
    auto h = detail::from_density(lo_log, hi, bins,
                                  {{lo_log + 0.22 * span, 0.09 * span}, {lo_log + 0.78 * span, 0.09 * span}});
    if (balance != 0.5) {
        auto probs = h.probs();
        auto edges = h.edges();
        double mid = lo_log + 0.5 * span;
        double wl = 0.0, wr = 0.0;
        for (size_t b = 0; b < probs.size(); ++b)
            (0.5 * (edges[b] + edges[b + 1]) < mid ? wl : wr) += probs[b];
        for (size_t b = 0; b < probs.size(); ++b) {
            bool left = 0.5 * (edges[b] + edges[b + 1]) < mid;
            probs[b] *= left ? balance / wl : (1.0 - balance) / wr;
        }
        h = LogRadianceHistogram(std::move(edges), std::move(probs));
    }
    return h;
}

/// Three isolated blocks: two flanks of mass `flank_mass` each around a heavy
/// center. The flank placement makes the overlap constraint non-convex, which
/// the planner test fixtures exploit.
inline LogRadianceHistogram make_three_region_hist(double flank_mass, double lo = 0.0,
                                                   double region_w = 1.0, double gap_w = 2.0,
                                                   double center_w = 3.0, int bins_per_region = 32) {
    // layout: [flank1][gap][center][gap][flank2]
    std::vector<double> edges, probs;
    auto push_block = [&](double start, double width, double mass, bool occupied) {
        for (int i = 0; i < bins_per_region; ++i) {
            edges.push_back(start + width * double(i) / bins_per_region);
            probs.push_back(occupied ? mass / bins_per_region : 0.0);
        }
    };
    double x = lo;
    push_block(x, region_w, flank_mass, true);
    x += region_w;
    push_block(x, gap_w, 0.0, false);
    x += gap_w;
    push_block(x, center_w, 1.0 - 2.0 * flank_mass, true);
    x += center_w;
    push_block(x, gap_w, 0.0, false);
    x += gap_w;
    push_block(x, region_w, flank_mass, true);
    x += region_w;
    edges.push_back(x);
    return {std::move(edges), std::move(probs)};
}

}  // namespace stereohdr
