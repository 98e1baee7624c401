// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stereohdr/camera.hpp"
#include "stereohdr/errors.hpp"
#include "stereohdr/histogram.hpp"
#include "stereohdr/interval.hpp"
#include "stereohdr/rng.hpp"

namespace stereohdr {

enum class CameraId { primary = 0, secondary = 1 };

inline const char* to_string(CameraId c) { return c == CameraId::primary ? "primary" : "secondary"; }

/// One planned capture: camera, exposure, ISO, and the log-radiance interval
/// the shot covers at the planner's SNR floor.
struct Shot {
    CameraId camera = CameraId::primary;
    double t = 0.0;
    double iso = 100.0;
    double gain = 1.0;
    Interval interval;
};

struct RefineConfig {
    bool enabled = true;
    int passes = 3;
    int max_iters = 30;
    double initial_damping = 1e-2;
    double temperature = 0.05;  // smooth-max temperature as a fraction of t_cap
    bool coordinate_polish = true;
};

struct PlannerConfig {
    double gamma_err = 0.05;          // max predicted disparity-error fraction
    double eta = snr_from_db(3.2);    // per-shot SNR floor (power convention)
    std::optional<Interval> range_of_interest;  // overrides the histogram's own
    int max_shots_per_camera = 6;
    double pair_mass_tol = 1e-4;      // overlap bisection tolerance, fraction of gamma_err
    RefineConfig refine;
};

struct CapturePlan {
    std::vector<Shot> shots;
    double t_cap = 0.0;
    double predicted_disp_err = 1.0;
    double worst_snr = 0.0;
    bool coverage_ok = false;

    int shots_on(CameraId c) const {
        int n = 0;
        for (const auto& s : shots) n += (s.camera == c);
        return n;
    }
    double time_on(CameraId c) const {
        double t = 0.0;
        for (const auto& s : shots)
            if (s.camera == c) t += s.t;
        return t;
    }
};

namespace planner_detail {

constexpr double kFeasTol = 1e-12;

inline Interval roi_of(const LogRadianceHistogram& hist, const PlannerConfig& cfg) {
    return cfg.range_of_interest.value_or(hist.range_of_interest());
}

inline Shot make_shot(const CameraModel& cam, CameraId id, double t, double iso, double eta) {
    double g = cam.gain_for_iso(iso);
    return {id, t, iso, g, cam.log_radiance_interval(t, g, eta)};
}

inline IntervalSet union_of(std::span<const Shot> shots, CameraId c) {
    IntervalSet s;
    for (const auto& sh : shots)
        if (sh.camera == c) s.add(sh.interval);
    return s;
}

inline IntervalSet union_of_all(std::span<const Shot> shots) {
    IntervalSet s;
    for (const auto& sh : shots) s.add(sh.interval);
    return s;
}

inline double t_cap_of(std::span<const Shot> shots) {
    double tp = 0.0, ts = 0.0;
    for (const auto& s : shots) (s.camera == CameraId::primary ? tp : ts) += s.t;
    return std::max(tp, ts);
}

}  // namespace planner_detail

/// Metrics for an arbitrary shot list: capture time (cameras fire
/// simultaneously, so it is the max of per-camera sums), predicted disparity
/// error (mass outside the intersection of the two cameras' covered sets),
/// worst per-shot SNR over the used radiance range, and coverage of the range
/// of interest.
inline CapturePlan evaluate_plan(std::vector<Shot> shots, const LogRadianceHistogram& hist,
                                 std::span<const CameraModel> cameras, const PlannerConfig& cfg) {
    using namespace planner_detail;
    CapturePlan p;
    p.shots = std::move(shots);
    p.t_cap = t_cap_of(p.shots);
    Interval roi = roi_of(hist, cfg);
    p.coverage_ok = union_of_all(p.shots).covers(roi, 1e-9);
    IntervalSet overlap = union_of(p.shots, CameraId::primary).intersect(union_of(p.shots, CameraId::secondary));
    p.predicted_disp_err = 1.0 - hist.mass_in(overlap);
    p.worst_snr = p.shots.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (const auto& s : p.shots) {
        const CameraModel& cam = cameras[size_t(s.camera) < cameras.size() ? size_t(s.camera) : 0];
        double phi = std::exp(std::max(s.interval.lo, roi.lo));
        p.worst_snr = std::min(p.worst_snr, cam.snr(phi, s.t, s.gain));
    }
    return p;
}

inline bool plan_feasible(const CapturePlan& p, const PlannerConfig& cfg) {
    using namespace planner_detail;
    return p.coverage_ok && p.predicted_disp_err <= cfg.gamma_err + kFeasTol &&
           p.worst_snr >= cfg.eta * (1.0 - 1e-12);
}

/// Per-camera ISO assignment by per-camera shot index. Indices beyond the
/// stored list inherit the last entry (new shots keep the previous same-camera
/// ISO); an empty list means the lowest supported ISO.
struct IsoAssignment {
    std::array<std::vector<int>, 2> idx;

    int get(CameraId c, int k) const {
        const auto& v = idx[size_t(c)];
        if (v.empty()) return 0;
        return v[std::min(size_t(k), v.size() - 1)];
    }
    void set(CameraId c, int k, int iso_index) {
        auto& v = idx[size_t(c)];
        while (int(v.size()) <= k) v.push_back(v.empty() ? 0 : v.back());
        v[size_t(k)] = iso_index;
    }
};

namespace planner_detail {

struct InitFailure {
    CameraId camera = CameraId::primary;
    int shot_index = 0;  // per-camera index
    std::string reason;
};

struct InitOutcome {
    std::vector<Shot> shots;
    std::optional<InitFailure> failure;
    bool ok() const { return !failure.has_value(); }
};

/// Exposure-ladder construction for fixed ISOs. Shot 0 anchors its interval at
/// the low end of the range of interest; each following shot (cameras
/// alternating) takes the largest exposure step whose pairwise non-overlap
/// mass stays within the geometrically shrinking budget gamma/2^i, found by
/// bisection on the monotone mass curve. The ladder stops once a shot's
/// interval tops the range of interest.
inline InitOutcome try_init_exposures(const LogRadianceHistogram& hist,
                                      std::span<const CameraModel> cameras,
                                      const IsoAssignment& isos, const PlannerConfig& cfg,
                                      std::optional<CameraId> forced_anchor = {}) {
    InitOutcome out;
    const Interval roi = roi_of(hist, cfg);
    const bool dual = cameras.size() >= 2;
    const bool use_budget = dual && cfg.gamma_err < 1.0;

    auto camera_of = [&](CameraId id) -> const CameraModel& { return cameras[size_t(id)]; };
    auto iso_at = [&](const CameraModel& cam, CameraId id, int k) {
        return cam.iso_set[std::min(size_t(isos.get(id, k)), cam.iso_set.size() - 1)];
    };
    auto anchor_time = [&](CameraId id) -> std::optional<double> {
        const CameraModel& cam = camera_of(id);
        double iso = iso_at(cam, id, 0);
        double g = cam.gain_for_iso(iso);
        double xl = cam.min_admissible_signal(g, cfg.eta);
        if (!(std::log(xl) < cam.log_x_u())) return {};  // empty interval at this gain
        double t = xl * g / std::exp(roi.lo);
        if (t > cam.t_max * (1.0 + 1e-12)) return {};  // cannot reach the dark end
        return std::clamp(t, cam.t_min, cam.t_max);
    };

    CameraId anchor = CameraId::primary;
    if (forced_anchor) {
        anchor = *forced_anchor;
    } else if (dual) {
        auto tp = anchor_time(CameraId::primary);
        auto ts = anchor_time(CameraId::secondary);
        if (tp && ts)
            anchor = (*ts < *tp) ? CameraId::secondary : CameraId::primary;
        else if (ts && !tp)
            anchor = CameraId::secondary;
    }

    int count[2] = {0, 0};
    for (int i = 0;; ++i) {
        CameraId cam_id = dual ? (i % 2 == 0 ? anchor : (anchor == CameraId::primary
                                                             ? CameraId::secondary
                                                             : CameraId::primary))
                               : CameraId::primary;
        const CameraModel& cam = camera_of(cam_id);
        int k = count[size_t(cam_id)];
        if (k >= cfg.max_shots_per_camera) {
            out.failure = {cam_id, k, "shot budget exceeded before covering the range of interest"};
            return out;
        }
        double iso = iso_at(cam, cam_id, k);
        double g = cam.gain_for_iso(iso);
        double xl = cam.min_admissible_signal(g, cfg.eta);
        if (!(std::log(xl) < cam.log_x_u())) {
            out.failure = {cam_id, k, "SNR floor exceeds saturation ceiling at this ISO"};
            return out;
        }

        double t = 0.0;
        if (i == 0) {
            double t_ideal = xl * g / std::exp(roi.lo);
            if (t_ideal > cam.t_max * (1.0 + 1e-12)) {
                out.failure = {cam_id, k,
                               "coverage: cannot reach the low end of the range of interest "
                               "within exposure limits"};
                return out;
            }
            t = std::clamp(t_ideal, cam.t_min, cam.t_max);
        } else {
            const Interval prev = out.shots.back().interval;
            // Exposures that keep the new interval between "touching the
            // previous interval's top" and "aligned with its bottom".
            double t_nogap = xl * g / std::exp(prev.hi);
            double t_eq = xl * g / std::exp(prev.lo);
            double t_lo = std::max(t_nogap, cam.t_min);
            double t_hi = std::min(t_eq, cam.t_max);
            if (t_lo > t_hi * (1.0 + 1e-12)) {
                out.failure = {cam_id, k, "coverage: exposure window empty within hardware limits"};
                return out;
            }
            if (use_budget) {
                double budget = cfg.gamma_err / std::pow(2.0, double(i));
                double mass_tol = cfg.pair_mass_tol * cfg.gamma_err;
                auto non_overlap = [&](double tt) {
                    Interval next = cam.log_radiance_interval(tt, g, cfg.eta);
                    return 1.0 - hist.mass_in(prev.intersect(next));
                };
                if (non_overlap(t_hi) > budget + mass_tol) {
                    out.failure = {cam_id, k,
                                   "disparity: pairwise overlap budget unattainable within "
                                   "hardware limits"};
                    return out;
                }
                if (non_overlap(t_lo) <= budget) {
                    t = t_lo;  // the largest step already fits the budget
                } else {
                    double lo = std::log(t_lo), hi = std::log(t_hi);
                    for (int it = 0; it < 200; ++it) {
                        double mid = 0.5 * (lo + hi);
                        if (non_overlap(std::exp(mid)) <= budget)
                            hi = mid;
                        else
                            lo = mid;
                        if (hi - lo < 1e-14) break;
                        if (non_overlap(std::exp(hi)) - non_overlap(std::exp(lo)) < mass_tol &&
                            non_overlap(std::exp(lo)) <= budget + mass_tol)
                            break;
                    }
                    t = std::exp(hi);
                }
            } else {
                t = t_lo;  // pure coverage ladder
            }
        }

        out.shots.push_back(make_shot(cam, cam_id, t, iso, cfg.eta));
        ++count[size_t(cam_id)];
        // The ladder stops once a shot tops the range of interest, but an
        // active disparity constraint needs at least one shot per camera.
        bool both_present = !use_budget || (count[0] >= 1 && count[1] >= 1);
        if (out.shots.back().interval.hi >= roi.hi - 1e-12 && both_present) break;
    }
    return out;
}

}  // namespace planner_detail

/// Exposure selection for a given ISO configuration. Throws Infeasible (or
/// ShotBudgetExceeded) naming the binding constraint.
inline std::vector<Shot> init_exposures(const LogRadianceHistogram& hist,
                                        std::span<const CameraModel> cameras,
                                        const IsoAssignment& isos, const PlannerConfig& cfg,
                                        std::optional<CameraId> forced_anchor = {}) {
    auto out = planner_detail::try_init_exposures(hist, cameras, isos, cfg, forced_anchor);
    if (!out.ok()) {
        const auto& f = *out.failure;
        std::string msg = f.reason + " (" + to_string(f.camera) + " shot " +
                          std::to_string(f.shot_index) + ")";
        if (f.reason.find("shot budget") != std::string::npos) throw ShotBudgetExceeded(msg);
        throw Infeasible(msg);
    }
    return out.shots;
}

struct InitResult {
    std::vector<Shot> shots;
    IsoAssignment isos;
};

/// Overall initialization with ISO selection. Starts every shot at the lowest
/// ISO that admits a feasible ladder, then walks the shots once in capture
/// order, stepping each shot's ISO upward while the overall capture time
/// strictly decreases (first local minimum along the scan).
inline InitResult init_isos(const LogRadianceHistogram& hist, std::span<const CameraModel> cameras,
                            const PlannerConfig& cfg) {
    using namespace planner_detail;
    IsoAssignment assign;

    // Lowest feasible starting ISOs: escalate exactly the shot the ladder
    // construction reports as binding.
    InitOutcome cur = try_init_exposures(hist, cameras, assign, cfg);
    int guard = 0;
    while (!cur.ok()) {
        const auto& f = *cur.failure;
        const CameraModel& cam = cameras[size_t(f.camera) < cameras.size() ? size_t(f.camera) : 0];
        int at = assign.get(f.camera, f.shot_index);
        if (at + 1 >= int(cam.iso_set.size())) {
            std::string msg = f.reason + " (" + to_string(f.camera) + " shot " +
                              std::to_string(f.shot_index) + ", all ISOs tried)";
            if (f.reason.find("shot budget") != std::string::npos) throw ShotBudgetExceeded(msg);
            throw Infeasible(msg);
        }
        assign.set(f.camera, f.shot_index, at + 1);
        if (++guard > 64 * cfg.max_shots_per_camera) throw Infeasible("ISO escalation did not converge");
        cur = try_init_exposures(hist, cameras, assign, cfg);
    }

    double best_t = t_cap_of(cur.shots);
    size_t j = 0;
    while (j < cur.shots.size()) {
        CameraId c = cur.shots[j].camera;
        int k = 0;
        for (size_t q = 0; q < j; ++q) k += (cur.shots[q].camera == c);
        const CameraModel& cam = cameras[size_t(c) < cameras.size() ? size_t(c) : 0];
        while (true) {
            int at = assign.get(c, k);
            if (at + 1 >= int(cam.iso_set.size())) break;
            IsoAssignment trial = assign;
            trial.set(c, k, at + 1);
            InitOutcome r = try_init_exposures(hist, cameras, trial, cfg);
            if (!r.ok()) break;
            double t_new = t_cap_of(r.shots);
            if (t_new < best_t * (1.0 - 1e-12)) {
                assign = trial;
                cur = std::move(r);
                best_t = t_new;
            } else {
                break;
            }
        }
        ++j;
    }
    return {std::move(cur.shots), std::move(assign)};
}

namespace planner_detail {

struct RefineObjective {
    const LogRadianceHistogram& hist;
    std::span<const CameraModel> cameras;
    const PlannerConfig& cfg;
    const std::vector<Shot>& base;  // camera/ISO structure, exposures replaced

    std::vector<Shot> shots_at(std::span<const double> u) const {
        std::vector<Shot> s = base;
        for (size_t i = 0; i < s.size(); ++i) {
            const CameraModel& cam = cameras[size_t(s[i].camera)];
            double t = std::clamp(std::exp(u[i]), cam.t_min, cam.t_max);
            s[i] = make_shot(cam, s[i].camera, t, s[i].iso, cfg.eta);
        }
        return s;
    }

    /// Residual vector: sqrt(smooth-max capture time) plus weighted hinges for
    /// coverage gap length and disparity-error excess.
    std::vector<double> residuals(std::span<const double> u, double tau, double penalty) const {
        std::vector<Shot> s = shots_at(u);
        Interval roi = roi_of(hist, cfg);
        double tp = 0.0, ts = 0.0;
        bool dual = cameras.size() >= 2;
        for (const auto& sh : s) (sh.camera == CameraId::primary ? tp : ts) += sh.t;
        double smax = dual ? tau * std::log(std::exp((tp - std::max(tp, ts)) / tau) +
                                            std::exp((ts - std::max(tp, ts)) / tau)) +
                                 std::max(tp, ts)
                           : tp;
        auto cover = union_of_all(s);
        double gap = 0.0;
        for (const auto& g : cover.gaps_within(roi)) gap += g.length();
        double viol = 0.0;
        if (dual && cfg.gamma_err < 1.0) {
            auto overlap = union_of(s, CameraId::primary).intersect(union_of(s, CameraId::secondary));
            viol = std::max(0.0, (1.0 - hist.mass_in(overlap)) - cfg.gamma_err);
        }
        return {std::sqrt(std::max(smax, 0.0)), penalty * gap, penalty * viol};
    }

    static double cost(std::span<const double> r) {
        double c = 0.0;
        for (double v : r) c += v * v;
        return c;
    }
};

inline void solve_normal_equations(std::vector<double>& A, std::vector<double>& b, int n) {
    // In-place Cholesky-free Gaussian elimination with partial pivoting; the
    // systems here are tiny (one variable per shot).
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (piv != col) {
            for (int cc = 0; cc < n; ++cc) std::swap(A[col * n + cc], A[piv * n + cc]);
            std::swap(b[col], b[piv]);
        }
        double d = A[col * n + col];
        if (std::abs(d) < 1e-300) continue;
        for (int r = col + 1; r < n; ++r) {
            double f = A[r * n + col] / d;
            for (int cc = col; cc < n; ++cc) A[r * n + cc] -= f * A[col * n + cc];
            b[r] -= f * b[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double d = A[r * n + r];
        if (std::abs(d) < 1e-300) {
            b[r] = 0.0;
            continue;
        }
        for (int cc = r + 1; cc < n; ++cc) b[r] -= A[r * n + cc] * b[cc];
        b[r] /= d;
    }
}

}  // namespace planner_detail

/// Damped least-squares fine-tuning of the exposures (ISOs stay fixed). Works
/// on log exposures against a smooth-max/penalty surrogate, verifies every
/// candidate against the true constraints, and never returns a plan worse or
/// less feasible than its input.
inline CapturePlan refine(const CapturePlan& plan, const LogRadianceHistogram& hist,
                          std::span<const CameraModel> cameras, const PlannerConfig& cfg) {
    using namespace planner_detail;
    CapturePlan best = evaluate_plan(plan.shots, hist, cameras, cfg);
    if (!cfg.refine.enabled || plan.shots.empty()) return best;

    const int n = int(plan.shots.size());
    RefineObjective obj{hist, cameras, cfg, plan.shots};
    std::vector<double> u(n);
    for (int i = 0; i < n; ++i) u[i] = std::log(plan.shots[i].t);

    auto consider = [&](std::span<const double> cand) {
        CapturePlan p = evaluate_plan(obj.shots_at(cand), hist, cameras, cfg);
        if (plan_feasible(p, cfg) && p.t_cap < best.t_cap) best = p;
    };

    for (int pass = 0; pass < cfg.refine.passes; ++pass) {
        double tau = std::max(best.t_cap, 1e-9) * cfg.refine.temperature * std::pow(0.3, pass);
        double penalty = 30.0 * (best.t_cap + 1.0) * std::pow(10.0, pass);
        double lambda = cfg.refine.initial_damping;
        std::vector<double> r = obj.residuals(u, tau, penalty);
        double c = RefineObjective::cost(r);
        for (int iter = 0; iter < cfg.refine.max_iters; ++iter) {
            const int m = int(r.size());
            std::vector<double> J(size_t(m) * n);
            for (int i = 0; i < n; ++i) {
                double h = 1e-6 * std::max(1.0, std::abs(u[i]));
                std::vector<double> up(u.begin(), u.end());
                up[i] += h;
                auto rp = obj.residuals(up, tau, penalty);
                for (int k = 0; k < m; ++k) J[size_t(k) * n + i] = (rp[k] - r[k]) / h;
            }
            bool stepped = false;
            for (int attempt = 0; attempt < 8 && !stepped; ++attempt) {
                std::vector<double> A(size_t(n) * n, 0.0), g(n, 0.0);
                for (int a = 0; a < n; ++a) {
                    for (int b2 = 0; b2 < n; ++b2) {
                        double s = 0.0;
                        for (int k = 0; k < m; ++k) s += J[size_t(k) * n + a] * J[size_t(k) * n + b2];
                        A[size_t(a) * n + b2] = s;
                    }
                    A[size_t(a) * n + a] += lambda * (A[size_t(a) * n + a] + 1e-12);
                    double s = 0.0;
                    for (int k = 0; k < m; ++k) s += J[size_t(k) * n + a] * r[k];
                    g[a] = -s;
                }
                solve_normal_equations(A, g, n);
                std::vector<double> un(n);
                for (int i = 0; i < n; ++i) {
                    const CameraModel& cam = cameras[size_t(plan.shots[i].camera)];
                    un[i] = std::clamp(u[i] + g[i], std::log(cam.t_min), std::log(cam.t_max));
                }
                auto rn = obj.residuals(un, tau, penalty);
                double cn = RefineObjective::cost(rn);
                if (cn < c) {
                    u = std::move(un);
                    r = std::move(rn);
                    c = cn;
                    lambda = std::max(lambda * 0.4, 1e-12);
                    stepped = true;
                    consider(u);
                } else {
                    lambda *= 4.0;
                }
            }
            if (!stepped) break;
        }
    }

    if (cfg.refine.coordinate_polish && !best.shots.empty()) {
        // Greedy per-shot tightening: the smallest exposure that keeps the full
        // plan feasible, shots on the slower camera first.
        for (int sweep = 0; sweep < 2; ++sweep) {
            for (size_t i = 0; i < best.shots.size(); ++i) {
                const CameraModel& cam = cameras[size_t(best.shots[i].camera)];
                double lo = std::log(cam.t_min), hi = std::log(best.shots[i].t);
                auto feasible_at = [&](double lt) {
                    std::vector<Shot> s = best.shots;
                    s[i] = make_shot(cam, s[i].camera, std::exp(lt), s[i].iso, cfg.eta);
                    return plan_feasible(evaluate_plan(std::move(s), hist, cameras, cfg), cfg);
                };
                if (feasible_at(lo)) {
                    hi = lo;
                } else {
                    for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
                        double mid = 0.5 * (lo + hi);
                        (feasible_at(mid) ? hi : lo) = mid;
                    }
                }
                std::vector<Shot> s = best.shots;
                s[i] = make_shot(cam, s[i].camera, std::exp(hi), s[i].iso, cfg.eta);
                CapturePlan p = evaluate_plan(std::move(s), hist, cameras, cfg);
                if (plan_feasible(p, cfg) && p.t_cap <= best.t_cap) best = std::move(p);
            }
        }
    }
    return best;
}

/// Full planning pipeline: ISO/exposure initialization followed by refinement.
inline CapturePlan plan(const LogRadianceHistogram& hist, std::span<const CameraModel> cameras,
                        const PlannerConfig& cfg) {
    InitResult init = init_isos(hist, cameras, cfg);
    CapturePlan p0 = evaluate_plan(std::move(init.shots), hist, cameras, cfg);
    if (!plan_feasible(p0, cfg)) {
        std::string why = !p0.coverage_ok ? "coverage gap after initialization"
                          : p0.predicted_disp_err > cfg.gamma_err
                              ? "disparity error above threshold after initialization"
                              : "SNR floor violated after initialization";
        throw Infeasible(why);
    }
    return refine(p0, hist, cameras, cfg);
}

struct BruteGrids {
    std::vector<double> exposures;  // candidate exposure times, any order
    std::vector<double> isos;       // candidate ISO values (must be supported)
    int max_shots_per_camera = 2;
    size_t combo_cap = 4'000'000;
};

/// Exhaustive grid search used as a test oracle. Enumerates every multiset of
/// distinct (exposure, ISO) shots up to the per-camera cap and returns the
/// global optimum over the grid.
inline CapturePlan brute_force_plan(const LogRadianceHistogram& hist,
                                    std::span<const CameraModel> cameras,
                                    const PlannerConfig& cfg, const BruteGrids& grids) {
    using namespace planner_detail;
    const Interval roi = roi_of(hist, cfg);
    const bool dual = cameras.size() >= 2;

    struct Option {
        double t, iso;
        Interval interval;
    };
    struct Subset {
        IntervalSet cover;
        double time = 0.0;
        std::vector<int> members;
    };

    auto options_for = [&](const CameraModel& cam) {
        std::vector<Option> opts;
        for (double t : grids.exposures) {
            if (t < cam.t_min * (1 - 1e-12) || t > cam.t_max * (1 + 1e-12)) continue;
            for (double iso : grids.isos) {
                if (std::find_if(cam.iso_set.begin(), cam.iso_set.end(),
                                 [&](double v) { return std::abs(v - iso) < 1e-9; }) ==
                    cam.iso_set.end())
                    continue;
                double g = cam.gain_for_iso(iso);
                if (!(std::log(cam.min_admissible_signal(g, cfg.eta)) < cam.log_x_u())) continue;
                opts.push_back({t, iso, cam.log_radiance_interval(t, g, cfg.eta)});
            }
        }
        return opts;
    };

    auto subsets_for = [&](const std::vector<Option>& opts) {
        std::vector<Subset> subsets;
        std::vector<int> pick;
        auto emit = [&]() {
            Subset s;
            for (int m : pick) {
                s.cover.add(opts[size_t(m)].interval);
                s.time += opts[size_t(m)].t;
            }
            s.members = pick;
            subsets.push_back(std::move(s));
        };
        // sizes 0..max, combinations without repetition
        emit();
        std::vector<int> stack;
        auto rec = [&](auto&& self, int start, int remaining) -> void {
            if (remaining == 0) return;
            for (int m = start; m < int(opts.size()); ++m) {
                pick.push_back(m);
                emit();
                self(self, m + 1, remaining - 1);
                pick.pop_back();
            }
        };
        rec(rec, 0, grids.max_shots_per_camera);
        std::sort(subsets.begin(), subsets.end(),
                  [](const Subset& a, const Subset& b) { return a.time < b.time; });
        return subsets;
    };

    auto prim_opts = options_for(cameras[0]);
    auto prim_sets = subsets_for(prim_opts);
    std::vector<Option> sec_opts;
    std::vector<Subset> sec_sets;
    if (dual) {
        sec_opts = options_for(cameras[1]);
        sec_sets = subsets_for(sec_opts);
    } else {
        sec_sets.push_back({});
    }
    if (prim_sets.size() * sec_sets.size() > grids.combo_cap)
        throw GridTooLarge("grid search would exceed the combination cap");

    double best_t = std::numeric_limits<double>::infinity();
    const Subset* best_p = nullptr;
    const Subset* best_s = nullptr;
    for (const auto& ps : prim_sets) {
        if (ps.time >= best_t) break;
        for (const auto& ss : sec_sets) {
            double t_cap = std::max(ps.time, ss.time);
            if (t_cap >= best_t) {
                if (ss.time >= best_t) break;
                continue;
            }
            if (!ps.cover.unite(ss.cover).covers(roi, 1e-9)) continue;
            double err = 1.0 - hist.mass_in(ps.cover.intersect(ss.cover));
            if (err > cfg.gamma_err + kFeasTol) continue;
            best_t = t_cap;
            best_p = &ps;
            best_s = &ss;
        }
    }
    if (!best_p) throw Infeasible("no grid plan satisfies the constraints");

    std::vector<Shot> shots;
    for (int m : best_p->members) {
        const auto& o = prim_opts[size_t(m)];
        shots.push_back(make_shot(cameras[0], CameraId::primary, o.t, o.iso, cfg.eta));
    }
    if (dual && best_s)
        for (int m : best_s->members) {
            const auto& o = sec_opts[size_t(m)];
            shots.push_back(make_shot(cameras[1], CameraId::secondary, o.t, o.iso, cfg.eta));
        }
    return evaluate_plan(std::move(shots), hist, cameras, cfg);
}

enum class BaselineScheme { exp_comp, exp_intrl };

/// Conventional bracketing baselines. exp_comp runs the primary camera down
/// from the dark-end anchor and the secondary up from the bright-end anchor in
/// C-stop steps; exp_intrl alternates both cameras through one C-stop ladder.
/// Baselines are never rejected: metrics and flags report infeasibility.
inline CapturePlan make_baseline(const LogRadianceHistogram& hist,
                                 std::span<const CameraModel> cameras, BaselineScheme scheme,
                                 int stops, int shots_per_camera, const PlannerConfig& cfg) {
    using namespace planner_detail;
    const Interval roi = roi_of(hist, cfg);
    const double factor = std::pow(2.0, double(stops));
    std::vector<Shot> shots;

    auto clamp_shot = [&](const CameraModel& cam, CameraId id, double t, double iso) {
        return make_shot(cam, id, std::clamp(t, cam.t_min, cam.t_max), iso, cfg.eta);
    };

    const CameraModel& prim = cameras[0];
    const CameraModel& sec = cameras[cameras.size() > 1 ? 1 : 0];
    double iso_p = prim.iso_set.front();
    double iso_s = sec.iso_set.front();
    double gp = prim.gain_for_iso(iso_p);
    double gs = sec.gain_for_iso(iso_s);
    double t_dark = prim.min_admissible_signal(gp, cfg.eta) * gp / std::exp(roi.lo);
    double t_bright = std::exp(sec.log_x_u()) * gs / std::exp(roi.hi);

    if (scheme == BaselineScheme::exp_comp) {
        for (int k = 0; k < shots_per_camera; ++k)
            shots.push_back(clamp_shot(prim, CameraId::primary, t_dark / std::pow(factor, k), iso_p));
        if (cameras.size() > 1)
            for (int k = 0; k < shots_per_camera; ++k)
                shots.push_back(
                    clamp_shot(sec, CameraId::secondary, t_bright * std::pow(factor, k), iso_s));
    } else {
        int total = shots_per_camera * (cameras.size() > 1 ? 2 : 1);
        for (int k = 0; k < total; ++k) {
            CameraId id = (k % 2 == 0 || cameras.size() == 1) ? CameraId::primary : CameraId::secondary;
            const CameraModel& cam = id == CameraId::primary ? prim : sec;
            double iso = id == CameraId::primary ? iso_p : iso_s;
            shots.push_back(clamp_shot(cam, id, t_dark / std::pow(factor, k), iso));
        }
    }
    return evaluate_plan(std::move(shots), hist, cameras, cfg);
}

/// Dense reference ladder: both cameras sweep their exposure down in
/// `stops`-stop steps until the interval has moved entirely past the range of
/// interest, so every radiance appears in several exposures per camera. This
/// is the ground-truth capture scheme.
inline CapturePlan make_dense_plan(const LogRadianceHistogram& hist,
                                   std::span<const CameraModel> cameras, int stops,
                                   const PlannerConfig& cfg) {
    using namespace planner_detail;
    const Interval roi = roi_of(hist, cfg);
    const double factor = std::pow(2.0, double(stops));
    std::vector<Shot> shots;
    for (size_t ci = 0; ci < cameras.size(); ++ci) {
        const CameraModel& cam = cameras[ci];
        CameraId id = ci == 0 ? CameraId::primary : CameraId::secondary;
        double iso = cam.iso_set.front();
        double g = cam.gain_for_iso(iso);
        // longest useful exposure: the darkest radiance of interest sits just
        // below saturation; sweep down until the interval has passed the top
        double t = std::exp(cam.log_x_u()) * g / std::exp(roi.lo) * 0.98;
        t = std::clamp(t, cam.t_min, cam.t_max);
        for (int k = 0; k < 64; ++k) {
            Shot s = make_shot(cam, id, t, iso, cfg.eta);
            shots.push_back(s);
            if (s.interval.lo >= roi.hi - 1e-12 || t <= cam.t_min * (1 + 1e-12)) break;
            t = std::max(t / factor, cam.t_min);
        }
    }
    return evaluate_plan(std::move(shots), hist, cameras, cfg);
}

// --- convexity test fixtures ---------------------------------------------

/// Camera whose log-radiance interval has exactly the given width when driven
/// with eta = 1: zero read/quantization noise, unit gain, saturation at w.
inline CameraModel make_width_camera(double width) {
    CameraModel cam;
    cam.noise = {0.0, 0.0, 100.0};
    cam.iso_set = {100.0};
    cam.t_min = 1e-7;
    cam.t_max = 1e5;
    cam.icrf = make_gamma_icrf(2.2, width + 2.2 * std::log(255.0 / 250.0));
    return cam;
}

/// A pair of coverage-feasible exposure ladders over the same shot/camera
/// structure with strictly positive overlap margins. Any convex combination of
/// the two exposure vectors must stay coverage-feasible.
struct CoveragePairSample {
    std::array<CameraModel, 2> cameras;
    PlannerConfig config;
    Interval roi;
    std::vector<Shot> a, b;

    std::vector<Shot> blend(double lambda) const {
        std::vector<Shot> out = a;
        for (size_t i = 0; i < out.size(); ++i) {
            const CameraModel& cam = cameras[size_t(out[i].camera)];
            double t = (1.0 - lambda) * a[i].t + lambda * b[i].t;
            out[i] = planner_detail::make_shot(cam, out[i].camera, t, out[i].iso, config.eta);
        }
        return out;
    }
};

inline CoveragePairSample make_coverage_pair_sample(uint64_t seed) {
    Rng rng(hash_seed(0xc0fe, seed));
    double w = rng.uniform(2.0, 4.0);
    CoveragePairSample s;
    s.cameras = {make_width_camera(w), make_width_camera(w)};
    s.config.eta = 1.0;
    s.config.gamma_err = 1.0;

    const int n = 4;
    double span = rng.uniform(1.2 * w, 2.2 * w);
    s.roi = {0.0, span};

    auto ladder = [&]() {
        std::vector<double> lows;
        for (int attempt = 0; attempt < 400; ++attempt) {
            lows.clear();
            lows.push_back(-rng.uniform(0.02, 0.25) * w);
            for (int i = 1; i < n; ++i) lows.push_back(lows.back() + rng.uniform(0.25, 0.85) * w);
            if (lows.back() + w >= span + 0.02 * w) return lows;
        }
        // fall back to an evenly spaced feasible ladder
        lows.clear();
        for (int i = 0; i < n; ++i) lows.push_back(-0.05 * w + (span - 0.9 * w) * double(i) / (n - 1));
        return lows;
    };
    auto to_shots = [&](const std::vector<double>& lows) {
        std::vector<Shot> shots;
        for (int i = 0; i < n; ++i) {
            CameraId id = i % 2 == 0 ? CameraId::primary : CameraId::secondary;
            double t = std::exp(-lows[size_t(i)]);  // x_l * g = 1 for these cameras
            shots.push_back(planner_detail::make_shot(s.cameras[size_t(id)], id, t, 100.0, 1.0));
        }
        return shots;
    };
    s.a = to_shots(ladder());
    s.b = to_shots(ladder());
    return s;
}

/// Three-region distribution whose disparity constraint admits two feasible
/// exposure sequences but rejects their midpoint: two flanks of mass gamma_err
/// around a heavy center, a two-shot primary camera covering everything, and a
/// single secondary shot that can sit over either flank but not both.
struct ThreeRegionFixture {
    LogRadianceHistogram hist;
    std::array<CameraModel, 2> cameras;
    PlannerConfig config;
    std::vector<Shot> seq_a, seq_b;

    std::vector<Shot> midpoint() const {
        std::vector<Shot> out = seq_a;
        for (size_t i = 0; i < out.size(); ++i) {
            double t = 0.5 * (seq_a[i].t + seq_b[i].t);
            out[i] = planner_detail::make_shot(cameras[size_t(out[i].camera)], out[i].camera, t,
                                               out[i].iso, config.eta);
        }
        return out;
    }

    double disparity_err(std::span<const Shot> shots) const {
        IntervalSet p = planner_detail::union_of(shots, CameraId::primary);
        IntervalSet q = planner_detail::union_of(shots, CameraId::secondary);
        return 1.0 - hist.mass_in(p.intersect(q));
    }
};

inline ThreeRegionFixture make_three_region_fixture(double gamma_err = 0.2) {
    ThreeRegionFixture f;
    // layout: flank [0,1], gap (1,3), center [3,6], gap (6,8), flank [8,9]
    f.hist = make_three_region_hist(gamma_err, 0.0, 1.0, 2.0, 3.0);
    f.cameras = {make_width_camera(6.0), make_width_camera(6.0)};
    f.config.eta = 1.0;
    f.config.gamma_err = gamma_err;
    f.config.range_of_interest = Interval{0.0, 9.0};

    auto shot = [&](CameraId id, double low) {
        return planner_detail::make_shot(f.cameras[size_t(id)], id, std::exp(-low), 100.0, 1.0);
    };
    // Primary covers the full range in both sequences; only the secondary moves.
    f.seq_a = {shot(CameraId::primary, 0.0), shot(CameraId::primary, 3.0),
               shot(CameraId::secondary, 0.0)};
    f.seq_b = {shot(CameraId::primary, 0.0), shot(CameraId::primary, 3.0),
               shot(CameraId::secondary, 3.0)};
    return f;
}

/// Uniform-distribution case where the disparity constraint collapses to a
/// half-space: with the middle shots pinned, feasibility depends only on the
/// ratio of the last to the first exposure.
struct UniformCaseFixture {
    LogRadianceHistogram hist;
    std::array<CameraModel, 2> cameras;
    PlannerConfig config;
    double width = 3.0;
    double span = 7.0;
    std::array<double, 2> fixed_lows = {1.6, 3.2};
    double max_low_spread;  // feasibility <=> low_last - low_first <= this

    std::vector<Shot> make_shots(double low_first, double low_last) const {
        auto shot = [&](CameraId id, double low) {
            return planner_detail::make_shot(cameras[size_t(id)], id, std::exp(-low), 100.0, 1.0);
        };
        return {shot(CameraId::primary, low_first), shot(CameraId::secondary, fixed_lows[0]),
                shot(CameraId::primary, fixed_lows[1]), shot(CameraId::secondary, low_last)};
    }

    double disparity_err(std::span<const Shot> shots) const {
        IntervalSet p = planner_detail::union_of(shots, CameraId::primary);
        IntervalSet q = planner_detail::union_of(shots, CameraId::secondary);
        return 1.0 - hist.mass_in(p.intersect(q));
    }
};

inline UniformCaseFixture make_uniform_case_fixture(double gamma_err = 0.45) {
    UniformCaseFixture f;
    f.hist = make_uniform_hist(0.0, f.span);
    f.cameras = {make_width_camera(f.width), make_width_camera(f.width)};
    f.config.eta = 1.0;
    f.config.gamma_err = gamma_err;
    // sum of pairwise overlaps = 3w - (low_last - low_first); constraint
    // (sum)/span >= 1 - gamma  <=>  spread <= 3w - span(1 - gamma)
    f.max_low_spread = 3.0 * f.width - f.span * (1.0 - gamma_err);
    return f;
}

}  // namespace stereohdr
