#include "pancake/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace pancake {

namespace {

constexpr double kPi = std::numbers::pi;

double phi1_of(const SpeedFunction& speed) { return eval_reduced(speed, 1.0, 1.0); }

// Records with -t below 1% of the lifetime are skipped by monitors whose
// bounds vanish at extinction: the 2% slack cannot absorb the extinction-time
// uncertainty there. Relative to T_ext so the cut is scaling-coherent.
double t_floor(const Trajectory& traj) { return 0.01 * traj.T_ext; }

struct LineFit {
    double slope = 0.0, intercept = 0.0;
    double se_slope = 0.0, se_intercept = 0.0;
    double residual_norm = 0.0;
    int m = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    LineFit f;
    f.m = static_cast<int>(x.size());
    if (f.m < 2) return f;
    double sx = 0, sy = 0;
    for (int i = 0; i < f.m; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double xb = sx / f.m, yb = sy / f.m;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < f.m; ++i) {
        sxx += (x[i] - xb) * (x[i] - xb);
        sxy += (x[i] - xb) * (y[i] - yb);
    }
    f.slope = sxy / sxx;
    f.intercept = yb - f.slope * xb;
    double rss = 0;
    for (int i = 0; i < f.m; ++i) {
        const double r = y[i] - (f.intercept + f.slope * x[i]);
        rss += r * r;
    }
    f.residual_norm = std::sqrt(rss / f.m);
    if (f.m > 2) {
        const double s2 = rss / (f.m - 2);
        f.se_slope = std::sqrt(s2 / sxx);
        f.se_intercept = std::sqrt(s2 * (1.0 / f.m + xb * xb / sxx));
    }
    return f;
}

// Iterate (frame, curvatures) pairs.
template <typename F>
void for_each_frame(const Trajectory& traj, const SpeedFunction& speed, F&& fn) {
    const CurvatureOptions opts{traj.config.diff_backend, traj.config.pole_band};
    for (size_t k = 0; k < traj.frames.size(); ++k) {
        const CurvatureData cd = curvatures_from_support(traj.frames[k], speed, opts);
        fn(traj.records[k], traj.frames[k], cd);
    }
}

BoundReport not_applicable(std::string name, std::string why) {
    BoundReport r;
    r.name = std::move(name);
    r.pass = true;
    r.applicable = false;
    r.note = std::move(why);
    return r;
}

struct MarginAccum {
    double worst = std::numeric_limits<double>::infinity();
    double witness = 0.0;
    std::vector<std::array<double, 2>> series;
    void add(double t, double margin) {
        series.push_back({t, margin});
        if (margin < worst) {
            worst = margin;
            witness = t;
        }
    }
    void finish(BoundReport& r) const {
        r.worst_margin = worst;
        r.witness_time = witness;
        r.margin_series = series;
        r.frames_checked = static_cast<int>(series.size());
        r.pass = worst >= -r.slack_used;
    }
};

}  // namespace

double geometry_fidelity(int N, const CurvatureOptions& opts) {
    struct Key {
        int N;
        DiffBackend b;
        double band;
        bool operator<(const Key& o) const {
            return std::tie(N, b, band) < std::tie(o.N, o.b, o.band);
        }
    };
    static std::map<Key, double> cache;
    static std::mutex mu;
    const Key key{N, opts.backend, opts.pole_band};
    {
        std::lock_guard lock(mu);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
    }

    const ThetaGrid grid(N, opts.backend, opts.pole_band);
    double worst = 0.0;
    for (double t : {-2.0, -4.0, -8.0}) {
        const SupportProfile prof = support_from_turning_angle(angenent_oval(t, N), t, 2);
        std::vector<double> kap(N), lam(N);
        curvatures_from_support(grid, prof.sigma, kap, lam);

        // lambda ds integral against the closed form
        double disc = 0.0;
        for (int j = 0; j < N; ++j) disc += lam[j] / kap[j];
        disc *= grid.dtheta();
        double exact = 0.0;
        const int M = 1 << 15;
        for (int i = 0; i < M; ++i) {
            const double th = 2.0 * kPi * (i + 0.5) / M;
            exact += oval_lambda(th, t) / oval_kappa(th, t);
        }
        exact *= 2.0 * kPi / M;
        worst = std::max(worst, std::fabs(disc - exact) / exact);

        // support-form area against the exact A = -2 pi t
        const Displacements d = displacements(prof, opts);
        worst = std::max(worst, std::fabs(d.A - (-2.0 * kPi * t)) / (-2.0 * kPi * t));

        // pointwise lambda outside the band (2 extra nodes of margin)
        for (int j = 0; j < N; ++j) {
            if (grid.blend_weight(j) < 1.0) continue;
            const int p1 = N / 4, p2 = 3 * N / 4;
            auto dist = [N](int a, int b) {
                int v = std::abs(a - b) % N;
                return std::min(v, N - v);
            };
            if (std::min(dist(j, p1), dist(j, p2)) <= opts.pole_band + 2) continue;
            const double ex = oval_lambda(grid.theta(j), t);
            worst = std::max(worst, std::fabs(lam[j] - ex) / ex);
        }
    }

    std::lock_guard lock(mu);
    cache[key] = worst;
    return worst;
}

namespace {
// 2% base (extinction-time estimation) + the calibrated discretization scale.
double disc_slack(const Trajectory& traj) {
    const CurvatureOptions opts{traj.config.diff_backend, traj.config.pole_band};
    return 0.02 + geometry_fidelity(traj.config.N, opts);
}
}  // namespace

DiagnosticsRecord record_from_frame(const SupportProfile& frame, const SpeedFunction& speed,
                                    const CurvatureOptions& opts, double t_reindexed) {
    DiagnosticsRecord r;
    r.t = t_reindexed;
    r.t_sim = frame.t;
    const CurvatureData cd = curvatures_from_support(frame, speed, opts);
    const Displacements d = displacements(frame, opts);
    r.h = d.h;
    r.ell = d.ell;
    r.A = d.A;
    r.rin = d.rin;
    r.rout = d.rout;

    const int N = frame.N;
    const double dth = 2.0 * kPi / N;
    r.phi_min = std::numeric_limits<double>::infinity();
    r.phi_max = -std::numeric_limits<double>::infinity();
    r.min_kappa_minus_lambda = std::numeric_limits<double>::infinity();
    r.max_ratio = 0.0;
    double li = 0.0, l2i = 0.0;
    for (int j = 0; j < N; ++j) {
        r.phi_min = std::min(r.phi_min, cd.phi[j]);
        r.phi_max = std::max(r.phi_max, cd.phi[j]);
        r.min_kappa_minus_lambda = std::min(r.min_kappa_minus_lambda, cd.kappa[j] - cd.lambda[j]);
        r.max_ratio = std::max(r.max_ratio, cd.kappa[j] / cd.lambda[j]);
        li += cd.lambda[j] / cd.kappa[j];
        l2i += (cd.lambda[j] * cd.lambda[j]) / (cd.kappa[j] * cd.kappa[j]);
    }
    r.lambda_integral = li * dth;
    r.lambda2_over_kappa_integral = l2i * dth;
    return r;
}

double phi_arc_integral(const SupportProfile& frame, const SpeedFunction& speed,
                        const CurvatureOptions& opts) {
    const CurvatureData cd = curvatures_from_support(frame, speed, opts);
    double s = 0.0;
    for (size_t j = 0; j < cd.phi.size(); ++j) s += cd.phi[j] / cd.kappa[j];
    return s * 2.0 * kPi / frame.N;
}

// ---- flow-invariant monitors ------------------------------------------------

BoundReport monitor_kappa_ge_lambda(const Trajectory& traj) {
    BoundReport r;
    r.name = "kappa_ge_lambda";
    r.slack_used = 1e-8;
    MarginAccum acc;
    const CurvatureOptions opts{traj.config.diff_backend, traj.config.pole_band};
    for (size_t k = 0; k < traj.frames.size(); ++k) {
        const auto& frame = traj.frames[k];
        std::vector<double> kap(frame.N), lam(frame.N);
        const ThetaGrid grid(frame.N, opts.backend, opts.pole_band);
        curvatures_from_support(grid, frame.sigma, kap, lam);
        double maxk = 0.0, worst = std::numeric_limits<double>::infinity();
        for (int j = 0; j < frame.N; ++j) {
            maxk = std::max(maxk, kap[j]);
            worst = std::min(worst, kap[j] - lam[j]);
        }
        acc.add(traj.records[k].t, worst / maxk);
    }
    acc.finish(r);
    return r;
}

BoundReport monitor_pinching(const Trajectory& traj) {
    BoundReport r;
    r.name = "pinching_ratio_bounded";
    r.slack_used = 0.01;
    if (traj.records.empty()) return not_applicable(r.name, "no records");
    const double initial = traj.records.front().max_ratio;
    MarginAccum acc;
    double running = 0.0;
    for (const auto& rec : traj.records) {
        running = std::max(running, rec.max_ratio);
        acc.add(rec.t, (initial - running) / initial);
    }
    acc.finish(r);
    return r;
}

BoundReport monitor_lambda_monotone(const Trajectory& traj) {
    BoundReport r;
    r.name = "lambda_nondecreasing";
    r.slack_used = 1e-8;
    MarginAccum acc;
    const CurvatureOptions opts{traj.config.diff_backend, traj.config.pole_band};
    for (size_t k = 0; k < traj.frames.size(); ++k) {
        const auto& frame = traj.frames[k];
        const ThetaGrid grid(frame.N, opts.backend, opts.pole_band);
        std::vector<double> kap(frame.N), lam(frame.N);
        curvatures_from_support(grid, frame.sigma, kap, lam);
        // the arc theta in [pi/2, pi]: nodes N/4 .. N/2, starting past the
        // pole band (the blend rule, not the flow, sets lambda inside it)
        int j0 = frame.N / 4;
        while (j0 < frame.N / 2 && grid.blend_weight(j0) < 1.0) ++j0;
        double scale = 0.0;
        for (int j = j0; j <= frame.N / 2; ++j) scale = std::max(scale, lam[j]);
        double worst = std::numeric_limits<double>::infinity();
        for (int j = j0; j < frame.N / 2; ++j) {
            worst = std::min(worst, (lam[j + 1] - lam[j]) / scale);
        }
        acc.add(traj.records[k].t, worst);
    }
    acc.finish(r);
    return r;
}

// ---- displacement and speed bounds -------------------------------------------

BoundReport monitor_ell_ge_h(const Trajectory& traj) {
    BoundReport r;
    r.name = "ell_ge_h";
    r.slack_used = disc_slack(traj);
    MarginAccum acc;
    for (const auto& rec : traj.records) {
        acc.add(rec.t, (rec.ell - rec.h) / std::max(rec.ell, rec.h));
    }
    acc.finish(r);
    return r;
}

BoundReport monitor_hl_sandwich(const Trajectory& traj, const SpeedFunction& speed) {
    BoundReport r;
    r.name = "hl_sandwich";
    r.slack_used = disc_slack(traj);
    const double phi1 = phi1_of(speed);
    const double floor = t_floor(traj);
    MarginAccum acc;
    for (const auto& rec : traj.records) {
        if (rec.t > -floor) continue;
        const double hl = rec.h * rec.ell;
        const double lower = 0.5 * kPi * (-rec.t);
        const double upper = kPi * phi1 * (-rec.t);
        acc.add(rec.t, std::min((hl - lower) / lower, (upper - hl) / upper));
    }
    if (acc.series.empty()) return not_applicable(r.name, "no records before the floor");
    acc.finish(r);
    return r;
}

BoundReport monitor_tr_bounds(const Trajectory& traj, const SpeedFunction& speed) {
    if (!traj.oval_seeded()) return not_applicable("tr_bounds", "needs an oval-seeded run");
    BoundReport r;
    r.name = "tr_bounds";
    r.slack_used = disc_slack(traj);
    const double R = traj.oval_R;
    const double phi1 = phi1_of(speed);
    const double lower = R / (2.0 * phi1) * (1.0 - std::exp(-R));
    const double upper = R + std::log(2.0);
    const double T = traj.T_ext;
    r.worst_margin = std::min((T - lower) / lower, (upper - T) / upper);
    r.witness_time = -T;
    r.frames_checked = 1;
    r.pass = r.worst_margin >= -r.slack_used;
    r.note = "T_R = " + std::to_string(T);
    return r;
}

BoundReport monitor_phi_min(const Trajectory& traj, const SpeedFunction& speed) {
    BoundReport r;
    r.name = "phi_min_pole";
    r.slack_used = disc_slack(traj);
    const double phi1 = phi1_of(speed);
    MarginAccum acc;
    for (const auto& rec : traj.records) {
        const double bound = 2.0 * rec.h / (rec.h * rec.h + rec.ell * rec.ell) * phi1;
        acc.add(rec.t, (bound - rec.phi_min) / bound);
    }
    acc.finish(r);
    return r;
}

BoundReport monitor_h_lower(const Trajectory& traj, const SpeedFunction& speed, double R) {
    BoundReport r;
    r.name = "h_lower_bound";
    r.slack_used = disc_slack(traj);
    const double phi1 = phi1_of(speed);
    MarginAccum acc;
    for (const auto& rec : traj.records) {
        if (rec.t > -0.5) continue;
        const double bound = 0.5 * kPi * (1.0 - std::exp(-R)) * std::exp(2.0 * phi1 / rec.t);
        acc.add(rec.t, (rec.h - bound) / bound);
    }
    if (acc.series.empty()) return not_applicable(r.name, "no records with t <= -0.5");
    acc.finish(r);
    return r;
}

BoundReport monitor_ell_upper(const Trajectory& traj, const SpeedFunction& speed, double R) {
    BoundReport r;
    r.name = "ell_upper_bound";
    r.slack_used = disc_slack(traj);
    const double phi1 = phi1_of(speed);
    MarginAccum acc;
    for (const auto& rec : traj.records) {
        if (rec.t > -0.5) continue;
        const double bound =
            (-2.0 * phi1 * rec.t) / (1.0 - std::exp(-R)) * std::exp(2.0 * phi1 / (-rec.t));
        acc.add(rec.t, (bound - rec.ell) / bound);
    }
    if (acc.series.empty()) return not_applicable(r.name, "no records with t <= -0.5");
    acc.finish(r);
    return r;
}

std::array<BoundReport, 2> monitor_displacement_bounds(const Trajectory& traj,
                                                       const SpeedFunction& speed, double R) {
    return {monitor_h_lower(traj, speed, R), monitor_ell_upper(traj, speed, R)};
}

BoundReport monitor_chou(const Trajectory& traj, const SpeedFunction& speed,
                         std::array<double, 2> window) {
    BoundReport r;
    r.name = "chou_speed_bound";
    r.slack_used = disc_slack(traj);
    const double phi1 = phi1_of(speed);

    std::vector<const DiagnosticsRecord*> recs;
    for (const auto& rec : traj.records) {
        if (rec.t >= window[0] && rec.t <= window[1]) recs.push_back(&rec);
    }
    if (recs.size() < 3) return not_applicable(r.name, "window holds fewer than 3 records");

    double rin_min = std::numeric_limits<double>::infinity();
    double rout_max = 0.0;
    for (auto* rec : recs) {
        rin_min = std::min(rin_min, rec->rin);
        rout_max = std::max(rout_max, rec->rout);
    }
    const double rr = 0.5 * rin_min;  // hypothesis 2r <= sigma <= R holds by construction
    const double bound = (rout_max / rr) * std::max(2.0 * phi1 / rr, recs.front()->phi_max);

    MarginAccum acc;
    double interior_c = 0.0;
    const double t0 = recs.front()->t;
    for (auto* rec : recs) {
        acc.add(rec->t, (bound - rec->phi_max) / bound);
        if (rec->t > t0) {
            interior_c = std::max(
                interior_c, rec->phi_max / (2.0 / rr + 1.0 / std::sqrt(rec->t - t0)));
        }
    }
    acc.finish(r);
    r.note = "interior-form fitted constant C = " + std::to_string(interior_c) +
             ", window r = " + std::to_string(rr) + ", R = " + std::to_string(rout_max);
    return r;
}

BoundReport monitor_barrier_cos(const Trajectory& traj, const SpeedFunction& speed) {
    if (!traj.oval_seeded()) {
        return not_applicable("barrier_cos", "phi >= |cos theta| is a slab-confined bound");
    }
    BoundReport r;
    r.name = "barrier_cos";
    const CurvatureOptions opts{traj.config.diff_backend, traj.config.pole_band};
    r.slack_used = 1e-6 + 0.5 * geometry_fidelity(traj.config.N, opts);
    MarginAccum acc;
    const ThetaGrid grid(traj.config.N, opts.backend, opts.pole_band);
    for_each_frame(traj, speed, [&](const DiagnosticsRecord& rec, const SupportProfile& frame,
                                    const CurvatureData& cd) {
        double worst = std::numeric_limits<double>::infinity();
        for (int j = 0; j < frame.N; ++j) {
            worst = std::min(worst, cd.phi[j] - std::fabs(grid.cos_theta(j)));
        }
        acc.add(rec.t, worst);
    });
    acc.finish(r);
    return r;
}

BoundReport monitor_taylor_sandwich(const Trajectory& traj, const SpeedFunction& speed) {
    BoundReport r;
    r.name = "taylor_sandwich";
    r.slack_used = 1e-8;  // the Taylor bound is exact; only fp noise to absorb
    const SpeedConstants sc = constants(speed);
    MarginAccum acc;
    for_each_frame(traj, speed, [&](const DiagnosticsRecord& rec, const SupportProfile& frame,
                                    const CurvatureData& cd) {
        double worst = std::numeric_limits<double>::infinity();
        for (int j = 0; j < frame.N; ++j) {
            const double lam = std::max(cd.lambda[j], 0.0);
            const double dev = std::fabs(cd.phi[j] - cd.kappa[j] - lam * sc.phidot1);
            const double bound = sc.taylor_C * lam * lam / cd.kappa[j];
            worst = std::min(worst, (bound - dev) / cd.phi[j]);
        }
        acc.add(rec.t, worst);
    });
    acc.finish(r);
    return r;
}

BoundReport monitor_lambda_integrals(const Trajectory& traj) {
    if (!traj.oval_seeded()) {
        return not_applicable("lambda_integrals", "scoped to slab-confined (oval-seeded) runs");
    }
    BoundReport r;
    r.name = "lambda_integrals";
    r.slack_used = 0.0;  // the 2% headroom is embedded in the fitted-c margin
    const double t_min = traj.records.front().t;
    const double lo = std::max(t_min + 0.5, -6.0), hi = -2.0;
    double c_fit = 0.0, sup2 = 0.0;
    MarginAccum acc;
    for (const auto& rec : traj.records) {
        if (rec.t < lo || rec.t > hi) continue;
        const double excess = (-rec.t) * rec.lambda_integral - 2.0 * kPi;
        const double c_here = std::max(0.0, excess - 0.02 * 2.0 * kPi) * std::sqrt(-rec.t);
        c_fit = std::max(c_fit, c_here);
        sup2 = std::max(sup2, rec.t * rec.t * rec.lambda2_over_kappa_integral);
        acc.add(rec.t, (2.0 * kPi - c_here) / (2.0 * kPi));
    }
    if (acc.series.empty()) return not_applicable(r.name, "no records in the late window");
    acc.finish(r);
    r.note = "fitted c = " + std::to_string(c_fit) +
             " (slack form c/(-t)^{1/2}); sup (-t)^2 * lambda2/kappa integral = " +
             std::to_string(sup2);
    return r;
}

BoundReport monitor_phi_min_decay(const Trajectory& traj, const SpeedFunction& speed) {
    if (!traj.oval_seeded()) {
        return not_applicable("phi_min_decay", "scoped to slab-confined runs");
    }
    BoundReport r;
    r.name = "phi_min_decay";
    r.slack_used = 0.02;
    const double phi1 = phi1_of(speed);
    const double t_min = traj.records.front().t;
    const double lo = std::max(t_min + 0.5, -6.0), hi = -2.0;
    std::vector<double> x, y;
    double c1 = 0.0;
    for (const auto& rec : traj.records) {
        if (rec.t < lo || rec.t > hi) continue;
        x.push_back(std::log(-rec.t));
        y.push_back(std::log(rec.phi_min));
        c1 = std::max(c1, rec.phi_min * rec.t * rec.t / (phi1 * kPi));
    }
    if (x.size() < 10) return not_applicable(r.name, "late window too short");
    const LineFit f = fit_line(x, y);
    // phi_min must decay at least like (-t)^{-1.5}; the slab asymptotics give -2
    r.worst_margin = (-1.5 - f.slope) / 1.5;
    r.witness_time = lo;
    r.frames_checked = f.m;
    r.pass = r.worst_margin >= -r.slack_used;
    r.note = "log-log slope = " + std::to_string(f.slope) +
             ", fitted c_1 = " + std::to_string(c1);
    return r;
}

namespace {
// |dA/dt| deviations from -2 pi, averaged over a small bundle around each of
// four sample times in the window.
std::vector<std::array<double, 2>> area_decay_samples(const Trajectory& traj) {
    std::vector<std::array<double, 2>> devs;  // (t, dev)
    const auto& recs = traj.records;
    for (size_t k = 1; k < recs.size(); ++k) {
        const double dt = recs[k].t - recs[k - 1].t;
        if (dt <= 0) continue;
        const double rate = (recs[k].A - recs[k - 1].A) / dt;
        devs.push_back({0.5 * (recs[k].t + recs[k - 1].t), std::fabs(rate + 2.0 * kPi)});
    }
    return devs;
}

std::vector<std::array<double, 2>> quantile_bundles(
    const std::vector<std::array<double, 2>>& series, double lo, double hi, int npts) {
    std::vector<std::array<double, 2>> out;
    for (int q = 0; q < npts; ++q) {
        const double tc = lo + (hi - lo) * (q + 0.5) / npts;
        double acc = 0.0;
        int m = 0;
        for (const auto& p : series) {
            if (std::fabs(p[0] - tc) <= 0.05 * (hi - lo)) {
                acc += p[1];
                ++m;
            }
        }
        if (m > 0) out.push_back({tc, acc / m});
    }
    return out;
}
}  // namespace

BoundReport monitor_crude_area_decay(const Trajectory& traj) {
    if (!traj.oval_seeded()) {
        return not_applicable("crude_area_decay", "A' -> -2 pi holds for slab-confined runs");
    }
    BoundReport r;
    r.name = "crude_area_decay";
    r.slack_used = 0.1 + disc_slack(traj);
    const double t_min = traj.records.front().t;
    const double lo = t_min + 0.2, hi = -1.0;
    if (!(lo < hi)) return not_applicable(r.name, "run too short for the decay window");
    auto samples = quantile_bundles(area_decay_samples(traj), lo, hi, 4);
    if (samples.size() < 3) return not_applicable(r.name, "too few samples in the window");
    // deviation must not grow toward more negative t
    MarginAccum acc;
    for (size_t i = 0; i + 1 < samples.size(); ++i) {
        const double earlier = samples[i][1];   // more negative t
        const double later = samples[i + 1][1];
        acc.add(samples[i][0], (later - earlier) / std::max(later, 1e-12));
    }
    acc.finish(r);
    return r;
}

BoundReport monitor_slab_convergence(const Trajectory& traj) {
    if (!traj.oval_seeded()) {
        return not_applicable("slab_convergence", "needs the slab datum pi/2");
    }
    BoundReport r;
    r.name = "slab_convergence";
    r.slack_used = 1e-6 + disc_slack(traj) * 0.1;
    MarginAccum acc;
    // pi/2 - h must be nondecreasing in t (the slab gap shrinks into the past)
    for (size_t k = 0; k + 1 < traj.records.size(); ++k) {
        const double gap0 = 0.5 * kPi - traj.records[k].h;
        const double gap1 = 0.5 * kPi - traj.records[k + 1].h;
        acc.add(traj.records[k].t, (gap1 - gap0) / std::max(gap1, 1e-12));
    }
    acc.finish(r);
    return r;
}

double tip_grim_distance(const Trajectory& traj, double t) {
    if (t > -1.0) throw std::domain_error("tip distance needs re-indexed t <= -1");
    size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < traj.records.size(); ++k) {
        const double d = std::fabs(traj.records[k].t - t);
        if (d < bd) {
            bd = d;
            best = k;
        }
    }
    const CurvatureOptions opts{traj.config.diff_backend, traj.config.pole_band};
    const ProfileCurve c = embed(traj.frames[best], opts);
    const Vec2 tip = c.points[traj.frames[best].N / 2];
    return grim_cap_distance(c.points, tip, /*tip_is_max_y=*/true);
}

BoundReport monitor_tip_grim(const Trajectory& traj, std::span<const double> sample_times) {
    if (!traj.oval_seeded()) {
        return not_applicable("tip_grim", "tip asymptotics hold for slab-confined runs");
    }
    BoundReport r;
    r.name = "tip_grim";
    r.slack_used = 0.02;
    const double t_min = traj.records.front().t;
    std::vector<double> times(sample_times.begin(), sample_times.end());
    std::sort(times.begin(), times.end());
    bool clamped = false;
    for (auto& t : times) {
        if (t < t_min) {
            t = t_min;
            clamped = true;
        }
    }
    std::vector<double> dist;
    for (double t : times) {
        try {
            dist.push_back(tip_grim_distance(traj, std::min(t, -1.0)));
        } catch (const std::exception& e) {
            return not_applicable(r.name, std::string("tip cap unavailable: ") + e.what());
        }
    }
    MarginAccum acc;
    for (size_t i = 0; i + 1 < dist.size(); ++i) {
        acc.add(times[i], (dist[i + 1] - dist[i]) / std::max(dist[i + 1], 1e-12));
    }
    acc.finish(r);
    std::string vals;
    for (size_t i = 0; i < dist.size(); ++i) {
        vals += (i ? ", " : "") + std::to_string(times[i]) + " -> " + std::to_string(dist[i]);
    }
    r.note = (clamped ? "sample times clamped to the recorded range; " : "") + vals;
    return r;
}

// ---- asymptotic fits ----------------------------------------------------------

AsymptoticFit fit_area_asymptotics(const Trajectory& traj, std::array<double, 2> window) {
    if (window[1] > -2.0 + 1e-12) {
        throw std::invalid_argument("window not ancient: needs t <= -2");
    }
    std::vector<double> x, y;
    for (const auto& rec : traj.records) {
        if (rec.t < window[0] || rec.t > window[1]) continue;
        x.push_back(std::log(-rec.t));
        y.push_back(rec.A / (2.0 * kPi) + rec.t);
    }
    if (x.size() < 10) {
        throw std::invalid_argument("window too short: fewer than 10 records");
    }
    const LineFit f = fit_line(x, y);
    AsymptoticFit out;
    out.model = "A/(2 pi) + t = a log(-t) + b";
    out.window = window;
    out.coefficients = {f.slope, f.intercept};
    out.stderrs = {f.se_slope, f.se_intercept};
    out.target = "phidot1 (a), C (b)";
    out.residual_norm = f.residual_norm;
    return out;
}

AsymptoticFit fit_ell_asymptotics(const Trajectory& traj, double phidot1,
                                  std::array<double, 2> window) {
    if (window[1] > -1.0 + 1e-12) {
        throw std::invalid_argument("window not ancient: needs t <= -1");
    }
    std::vector<double> x, y;
    for (const auto& rec : traj.records) {
        if (rec.t < window[0] || rec.t > window[1]) continue;
        x.push_back(rec.t);
        y.push_back(rec.ell + rec.t - phidot1 * std::log(-rec.t));
    }
    if (x.size() < 10) {
        throw std::invalid_argument("window too short: fewer than 10 records");
    }
    const LineFit f = fit_line(x, y);
    AsymptoticFit out;
    out.model = "ell + t - phidot1 log(-t) = C + drift * t";
    out.window = window;
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= y.size();
    out.coefficients = {mean, f.slope};
    out.stderrs = {f.se_intercept, f.se_slope};
    out.target = "C (limit), drift -> 0";
    out.residual_norm = f.residual_norm;
    return out;
}

AsymptoticFit monitor_improved_speed(const Trajectory& traj, const SpeedFunction& speed,
                                     std::array<double, 2> window) {
    const CurvatureOptions opts{traj.config.diff_backend, traj.config.pole_band};
    const ThetaGrid grid(traj.config.N, opts.backend, opts.pole_band);
    std::vector<double> x, y;
    for (size_t k = 0; k < traj.frames.size(); ++k) {
        const double t = traj.records[k].t;
        if (t < window[0] || t > window[1]) continue;
        const CurvatureData cd = curvatures_from_support(traj.frames[k], speed, opts);
        double m = std::numeric_limits<double>::infinity();
        for (int j = 0; j < traj.frames[k].N; ++j) {
            if (grid.blend_weight(j) < 1.0) continue;  // non-pole nodes only
            m = std::min(m, cd.phi[j] / std::fabs(grid.cos_theta(j)) - 1.0);
        }
        x.push_back(1.0 / (-t));
        y.push_back((-t) * m);
    }
    AsymptoticFit out;
    out.model = "(-t)(min phi/|cos| - 1) = L + b/(-t)";
    out.window = window;
    out.target = "phidot1 (L)";
    if (x.size() < 10) {
        out.note = "window too short";
        return out;
    }
    const LineFit f = fit_line(x, y);
    out.coefficients = {f.intercept, f.slope};
    out.stderrs = {f.se_intercept, f.se_slope};
    out.residual_norm = f.residual_norm;
    return out;
}

MonitorSuite run_all_monitors(const Trajectory& traj, const SpeedFunction& speed) {
    MonitorSuite suite;
    auto add = [&suite](BoundReport r) { suite.bounds.push_back(std::move(r)); };

    const bool pinched = !traj.config.allow_unpinched;
    if (pinched) {
        add(monitor_kappa_ge_lambda(traj));
        add(monitor_pinching(traj));
        add(monitor_lambda_monotone(traj));
    }
    add(monitor_ell_ge_h(traj));
    add(monitor_hl_sandwich(traj, speed));
    add(monitor_tr_bounds(traj, speed));
    add(monitor_phi_min(traj, speed));
    if (traj.oval_seeded()) {
        auto db = monitor_displacement_bounds(traj, speed, traj.oval_R);
        add(db[0]);
        add(db[1]);
    } else {
        add(not_applicable("h_lower_bound", "needs an oval-seeded run"));
        add(not_applicable("ell_upper_bound", "needs an oval-seeded run"));
    }
    {
        const double t0 = traj.records.front().t;
        const double span = traj.records.back().t - t0;
        add(monitor_chou(traj, speed, {t0 + 0.3 * span, t0 + 0.7 * span}));
    }
    add(monitor_barrier_cos(traj, speed));
    add(monitor_taylor_sandwich(traj, speed));
    add(monitor_lambda_integrals(traj));
    add(monitor_phi_min_decay(traj, speed));
    add(monitor_crude_area_decay(traj));
    add(monitor_slab_convergence(traj));
    {
        const std::array<double, 3> times{-6.0, -4.0, -2.0};
        add(monitor_tip_grim(traj, times));
    }

    if (traj.oval_seeded()) {
        try {
            suite.fits.push_back(fit_area_asymptotics(traj, {-7.0, -2.0}));
        } catch (const std::exception& e) {
            AsymptoticFit f;
            f.model = "A/(2 pi) + t = a log(-t) + b";
            f.note = e.what();
            suite.fits.push_back(f);
        }
        const double phidot1 = constants(speed).phidot1;
        try {
            suite.fits.push_back(fit_ell_asymptotics(traj, phidot1, {-3.5, -1.5}));
        } catch (const std::exception& e) {
            AsymptoticFit f;
            f.model = "ell + t - phidot1 log(-t) = C + drift * t";
            f.note = e.what();
            suite.fits.push_back(f);
        }
        suite.fits.push_back(monitor_improved_speed(traj, speed, {-6.0, -2.0}));
    }

    for (const auto& b : suite.bounds) {
        if (b.applicable && !b.pass) suite.all_pass = false;
    }
    return suite;
}

}  // namespace pancake
