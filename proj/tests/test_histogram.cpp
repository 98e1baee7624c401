// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "stereohdr/histogram.hpp"
#include "stereohdr/interval.hpp"
#include "stereohdr/rng.hpp"

using namespace stereohdr;

TEST_CASE("interval set normalization and ops") {
    IntervalSet s{{2.0, 3.0}, {0.0, 1.0}, {0.5, 1.5}};
    REQUIRE(s.count() == 2);
    CHECK(s.parts()[0] == Interval{0.0, 1.5});
    CHECK(s.parts()[1] == Interval{2.0, 3.0});
    CHECK(s.total_length() == doctest::Approx(2.5));
    CHECK(s.contains(1.4));
    CHECK(!s.contains(1.7));

    IntervalSet t{{1.0, 2.2}};
    auto u = s.unite(t);
    CHECK(u.count() == 1);
    CHECK(u.parts()[0] == Interval{0.0, 3.0});

    auto i = s.intersect(t);
    CHECK(i.count() == 2);
    CHECK(i.parts()[0] == Interval{1.0, 1.5});
    CHECK(i.parts()[1] == Interval{2.0, 2.2});

    auto gaps = s.gaps_within({0.0, 3.0});
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0] == Interval{1.5, 2.0});
}

TEST_CASE("interval gaps against a dense membership oracle") {
    Rng rng(4242);
    for (int trial = 0; trial < 40; ++trial) {
        IntervalSet s;
        int parts = 1 + int(rng.below(5));
        for (int p = 0; p < parts; ++p) {
            double lo = rng.uniform(0.0, 9.0);
            s.add({lo, lo + rng.uniform(0.1, 2.5)});
        }
        Interval window{rng.uniform(0.0, 2.0), rng.uniform(6.0, 10.0)};
        auto gaps = s.gaps_within(window);

        const int grid = 10000;
        for (int k = 0; k <= grid; ++k) {
            double x = window.lo + (window.hi - window.lo) * double(k) / grid;
            bool in_gap_list = false;
            for (const auto& g : gaps)
                if (x > g.lo + 1e-9 && x < g.hi - 1e-9) in_gap_list = true;
            if (in_gap_list) CHECK(!s.contains(x));
            if (s.contains(x)) CHECK(!in_gap_list);
        }
    }
}

TEST_CASE("histogram mass basics") {
    auto h = make_uniform_hist(0.0, 10.0);
    CHECK(h.mass_in(h.support()) == doctest::Approx(1.0));
    CHECK(h.mass_in(IntervalSet{}) == 0.0);
    CHECK(h.mass_in(IntervalSet{{0.0, 3.0}, {7.0, 10.0}}) == doctest::Approx(0.6));
    CHECK(h.mass_in(Interval{-5.0, 0.0}) == 0.0);
    CHECK(h.mass_in(Interval{2.0, 2.0}) == 0.0);
}

TEST_CASE("histogram mass modularity") {
    Rng rng(7);
    auto h = make_bimodal_hist(0.0, 10.0);
    for (int trial = 0; trial < 60; ++trial) {
        IntervalSet a, b;
        for (int p = 0; p < 3; ++p) {
            double lo = rng.uniform(-1.0, 8.0);
            a.add({lo, lo + rng.uniform(0.0, 3.0)});
            lo = rng.uniform(-1.0, 8.0);
            b.add({lo, lo + rng.uniform(0.0, 3.0)});
        }
        double lhs = h.mass_in(a.unite(b)) + h.mass_in(a.intersect(b));
        double rhs = h.mass_in(a) + h.mass_in(b);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("coverage gap experiments") {
    auto h = make_uniform_hist(0.0, 8.0);
    h.set_range_of_interest(1.0, 7.0);
    CHECK(h.coverage_gap(IntervalSet{{0.0, 8.0}}).empty());
    auto gaps = h.coverage_gap(IntervalSet{{1.0, 4.0}});
    REQUIRE(gaps.size() == 1);
    CHECK(gaps[0] == Interval{4.0, 7.0});

    // coverage empty <=> restricted mass equals the full range-of-interest mass
    IntervalSet partial{{1.0, 4.0}, {4.5, 7.0}};
    double roi_mass = h.mass_in(h.range_of_interest());
    CHECK(h.mass_in(partial.intersect(h.range_of_interest())) < roi_mass);
    IntervalSet full{{0.5, 7.5}};
    CHECK(h.coverage_gap(full).empty());
    CHECK(h.mass_in(full.intersect(h.range_of_interest())) == doctest::Approx(roi_mass));
}

TEST_CASE("quantile inverts mass") {
    auto h = make_bimodal_hist(2.0, 9.0);
    for (double p : {0.01, 0.2, 0.5, 0.8, 0.99}) {
        double q = h.quantile(p);
        CHECK(h.mass_in(Interval{h.support().lo, q}) == doctest::Approx(p).epsilon(1e-6));
    }
}

TEST_CASE("from_samples percentile range of interest") {
    std::vector<double> samples;
    Rng rng(3);
    for (int i = 0; i < 20000; ++i) samples.push_back(rng.uniform(0.0, 5.0));
    samples.push_back(50.0);  // isolated hot sample must not stretch the range
    auto h = LogRadianceHistogram::from_samples(samples);
    CHECK(h.range_of_interest().hi < 6.0);
    CHECK(h.range_of_interest().lo < 0.2);
}

TEST_CASE("constant input collapses to a single occupied bin") {
    std::vector<double> samples(100, 3.25);
    auto h = LogRadianceHistogram::from_samples(samples);
    double total = 0.0;
    int occupied = 0;
    for (double p : h.probs()) {
        total += p;
        occupied += p > 0;
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(occupied == 1);
}

TEST_CASE("three-region layout carries the requested masses") {
    double gamma = 0.2;
    auto h = make_three_region_hist(gamma, 0.0, 1.0, 2.0, 3.0);
    CHECK(h.mass_in(Interval{0.0, 1.0}) == doctest::Approx(gamma));
    CHECK(h.mass_in(Interval{1.0, 3.0}) == doctest::Approx(0.0));
    CHECK(h.mass_in(Interval{3.0, 6.0}) == doctest::Approx(1.0 - 2.0 * gamma));
    CHECK(h.mass_in(Interval{6.0, 8.0}) == doctest::Approx(0.0));
    CHECK(h.mass_in(Interval{8.0, 9.0}) == doctest::Approx(gamma));
}
