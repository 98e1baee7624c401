// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <initializer_list>
#include <vector>

namespace stereohdr {

/// Closed interval on the log-radiance axis.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool empty() const { return hi <= lo; }
    double length() const { return empty() ? 0.0 : hi - lo; }
    bool contains(double x) const { return x >= lo && x <= hi; }

    Interval intersect(const Interval& o) const { return {std::max(lo, o.lo), std::min(hi, o.hi)}; }

    bool operator==(const Interval& o) const = default;
};

/// Union of closed intervals kept normalized: sorted, pairwise disjoint,
/// touching pieces merged. Degenerate (zero-length) pieces are dropped.
class IntervalSet {
  public:
    IntervalSet() = default;
    IntervalSet(std::initializer_list<Interval> parts) {
        for (const auto& p : parts) add(p);
    }

    void add(const Interval& p) {
        if (p.empty()) return;
        parts_.push_back(p);
        normalize();
    }

    const std::vector<Interval>& parts() const { return parts_; }
    bool empty() const { return parts_.empty(); }
    size_t count() const { return parts_.size(); }

    double total_length() const {
        double s = 0.0;
        for (const auto& p : parts_) s += p.length();
        return s;
    }

    bool contains(double x) const {
        for (const auto& p : parts_)
            if (p.contains(x)) return true;
        return false;
    }

    Interval hull() const {
        if (parts_.empty()) return {};
        return {parts_.front().lo, parts_.back().hi};
    }

    IntervalSet unite(const IntervalSet& o) const {
        IntervalSet r = *this;
        r.parts_.insert(r.parts_.end(), o.parts_.begin(), o.parts_.end());
        r.normalize();
        return r;
    }

    IntervalSet intersect(const IntervalSet& o) const {
        IntervalSet r;
        for (const auto& a : parts_)
            for (const auto& b : o.parts_) {
                Interval c = a.intersect(b);
                if (!c.empty()) r.parts_.push_back(c);
            }
        r.normalize();
        return r;
    }

    IntervalSet intersect(const Interval& window) const {
        IntervalSet w;
        w.add(window);
        return intersect(w);
    }

    /// Pieces of `window` not covered by this set. Gaps of length <= eps are
    /// dropped so floating-point slivers do not count as coverage holes.
    std::vector<Interval> gaps_within(const Interval& window, double eps = 0.0) const {
        std::vector<Interval> out;
        if (window.empty()) return out;
        double cursor = window.lo;
        for (const auto& p : parts_) {
            if (p.hi <= cursor) continue;
            if (p.lo >= window.hi) break;
            if (p.lo > cursor) {
                Interval gap{cursor, std::min(p.lo, window.hi)};
                if (gap.length() > eps) out.push_back(gap);
            }
            cursor = std::max(cursor, p.hi);
            if (cursor >= window.hi) break;
        }
        if (cursor < window.hi) {
            Interval gap{cursor, window.hi};
            if (gap.length() > eps) out.push_back(gap);
        }
        return out;
    }

    bool covers(const Interval& window, double eps = 0.0) const { return gaps_within(window, eps).empty(); }

    bool operator==(const IntervalSet& o) const = default;

  private:
    void normalize() {
        std::erase_if(parts_, [](const Interval& p) { return p.empty(); });
        std::sort(parts_.begin(), parts_.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        std::vector<Interval> merged;
        for (const auto& p : parts_) {
            if (!merged.empty() && p.lo <= merged.back().hi)
                merged.back().hi = std::max(merged.back().hi, p.hi);
            else
                merged.push_back(p);
        }
        parts_ = std::move(merged);
    }

    std::vector<Interval> parts_;
};

}  // namespace stereohdr
