#include "pancake/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pancake/diagnostics.hpp"

namespace pancake {

namespace {

constexpr double kPi = std::numbers::pi;

CurvatureOptions curvature_opts(const FlowConfig& cfg) {
    return {cfg.diff_backend, cfg.pole_band};
}

// Workspace for one trajectory; owns the grid and the per-node buffers.
struct Stepper {
    const SpeedFunction& speed;
    const FlowConfig& cfg;
    ThetaGrid grid;
    int N;
    std::vector<double> kappa, lambda, phi, mid, work;

    Stepper(const SpeedFunction& sp, const FlowConfig& c)
        : speed(sp), cfg(c), grid(c.N, c.diff_backend, c.pole_band), N(c.N) {
        if (!(c.cfl > 0.0 && c.cfl <= 0.5)) {
            throw std::invalid_argument("cfl must lie in (0, 0.5]");
        }
        kappa.resize(N);
        lambda.resize(N);
        phi.resize(N);
        mid.resize(N);
        work.resize(N);
    }

    // phi(kappa, lambda) of sigma into `out`; fills kappa/lambda members.
    void eval_phi(std::span<const double> sigma, std::span<double> out) {
        curvatures_from_support(grid, sigma, kappa, lambda);
        const double c = speed.normalization;
        for (int j = 0; j < N; ++j) {
            out[j] = c * speed.reduced_raw(kappa[j], std::max(lambda[j], 0.0));
        }
    }

    // Diffusion coefficient of the linearized equation, maximized over nodes.
    // Inside the pole band lambda is blended toward kappa, so the curvature
    // sensitivity there is phi_kappa + phi_lambda (1 - w); without that term
    // the pole nodes run beyond the RK2 stability bound for speeds with a
    // strong lambda dependence and develop a saturated mesh oscillation.
    double max_diffusion() const {
        double m = 0.0;
        for (int j = 0; j < N; ++j) {
            const auto g = grad_reduced(speed, kappa[j], std::max(lambda[j], 0.0));
            const double sens = g.phi_kappa + g.phi_lambda * (1.0 - grid.blend_weight(j));
            m = std::max(m, sens * kappa[j] * kappa[j]);
        }
        return m;
    }

    void rk2(std::vector<double>& sigma, double dt) {
        eval_phi(sigma, phi);
        for (int j = 0; j < N; ++j) mid[j] = sigma[j] - 0.5 * dt * phi[j];
        eval_phi(mid, work);
        for (int j = 0; j < N; ++j) sigma[j] -= dt * work[j];
        if (cfg.symmetry_enforce) grid.symmetrize(sigma);
    }

    // Lagged-coefficient backward Euler: the curvature term is linearized
    // around the current frame and solved implicitly with the second-order
    // periodic Laplacian (cyclic tridiagonal system).
    void semi_implicit(std::vector<double>& sigma, double dt) {
        eval_phi(sigma, phi);
        std::vector<double> c(N), rhs(N);
        const double h2 = grid.dtheta() * grid.dtheta();
        // u = sigma_tt + sigma with the same FD2 operator used in the solve
        for (int j = 0; j < N; ++j) {
            const double lap =
                (sigma[(j + 1) % N] - 2.0 * sigma[j] + sigma[(j + N - 1) % N]) / h2;
            const auto g = grad_reduced(speed, kappa[j], std::max(lambda[j], 0.0));
            const double sens = g.phi_kappa + g.phi_lambda * (1.0 - grid.blend_weight(j));
            c[j] = sens * kappa[j] * kappa[j];
            rhs[j] = sigma[j] - dt * (phi[j] + c[j] * (lap + sigma[j]));
        }
        // M = I - dt*diag(c)*(T + I), T = periodic FD2
        std::vector<double> diag(N), lower(N), upper(N);
        for (int j = 0; j < N; ++j) {
            diag[j] = 1.0 - dt * c[j] * (-2.0 / h2 + 1.0);
            lower[j] = -dt * c[j] / h2;  // coefficient of sigma_{j-1}
            upper[j] = -dt * c[j] / h2;  // coefficient of sigma_{j+1}
        }
        sigma = solve_cyclic_tridiag(diag, lower, upper, rhs);
        if (cfg.symmetry_enforce) grid.symmetrize(sigma);
    }

    // Thomas algorithm plus a Sherman-Morrison correction for the corners.
    static std::vector<double> solve_cyclic_tridiag(std::span<const double> diag,
                                                    std::span<const double> lower,
                                                    std::span<const double> upper,
                                                    std::span<const double> rhs) {
        const int n = static_cast<int>(diag.size());
        auto solve_tridiag = [&](std::span<const double> d, std::span<const double> b) {
            std::vector<double> cp(n), dp(n), x(n);
            cp[0] = upper[0] / d[0];
            dp[0] = b[0] / d[0];
            for (int i = 1; i < n; ++i) {
                const double m = d[i] - lower[i] * cp[i - 1];
                cp[i] = upper[i] / m;
                dp[i] = (b[i] - lower[i] * dp[i - 1]) / m;
            }
            x[n - 1] = dp[n - 1];
            for (int i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
            return x;
        };
        // remove the wrap entries lower[0] (to x_{n-1}) and upper[n-1] (to x_0)
        const double alpha = lower[0], beta = upper[n - 1];
        const double gamma = -diag[0];
        std::vector<double> d(diag.begin(), diag.end());
        d[0] -= gamma;
        d[n - 1] -= alpha * beta / gamma;
        std::vector<double> u(n, 0.0);
        u[0] = gamma;
        u[n - 1] = beta;
        auto y = solve_tridiag(d, rhs);
        auto q = solve_tridiag(d, u);
        const double vy = y[0] + (alpha / gamma) * y[n - 1];
        const double vq = 1.0 + q[0] + (alpha / gamma) * q[n - 1];
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = y[i] - q[i] * (vy / vq);
        return x;
    }
};

double support_area(const ThetaGrid& grid, std::span<const double> sigma,
                    std::vector<double>& scratch) {
    const int N = grid.size();
    grid.d1(sigma, scratch);
    double s = 0.0;
    for (int j = 0; j < N; ++j) s += sigma[j] * sigma[j] - scratch[j] * scratch[j];
    return 0.5 * s * grid.dtheta();
}

}  // namespace

double cfl_dt(const SupportProfile& profile, const SpeedFunction& speed, const FlowConfig& config) {
    FlowConfig cfg = config;
    cfg.N = profile.N;
    Stepper st(speed, cfg);
    st.eval_phi(profile.sigma, st.phi);
    const double dth = st.grid.dtheta();
    return cfg.cfl * dth * dth / st.max_diffusion();
}

SupportProfile step(const SupportProfile& profile, const SpeedFunction& speed, double dt,
                    const FlowConfig& config) {
    FlowConfig cfg = config;
    cfg.N = profile.N;
    Stepper st(speed, cfg);

    st.eval_phi(profile.sigma, st.phi);  // validates convexity
    const double bound = cfg.cfl * st.grid.dtheta() * st.grid.dtheta() / st.max_diffusion();
    if (cfg.scheme == Scheme::explicit_rk2 && dt > bound * (1.0 + 1e-12)) {
        throw FlowError("dt too large: " + std::to_string(dt) + " exceeds the CFL bound " +
                        std::to_string(bound));
    }

    SupportProfile out = profile;
    if (cfg.scheme == Scheme::explicit_rk2) {
        st.rk2(out.sigma, dt);
    } else {
        st.semi_implicit(out.sigma, dt);
    }
    out.t = profile.t + dt;
    require_convex(st.grid, out.sigma);
    return out;
}

Trajectory run(const SupportProfile& initial, const SpeedFunction& speed,
               const FlowConfig& config, const std::string& seed_id) {
    FlowConfig cfg = config;
    cfg.N = initial.N;
    Stepper st(speed, cfg);

    Trajectory traj;
    traj.speed_id = speed.name;
    traj.n = initial.n;
    traj.config = cfg;
    traj.seed_id = seed_id;

    SupportProfile prof = initial;
    if (cfg.symmetry_enforce) st.grid.symmetrize(prof.sigma);

    // seed checks: convexity and the pinching class kappa >= lambda
    st.eval_phi(prof.sigma, st.phi);
    if (!cfg.allow_unpinched) {
        double max_k = 0.0, worst = std::numeric_limits<double>::infinity();
        for (int j = 0; j < cfg.N; ++j) {
            max_k = std::max(max_k, st.kappa[j]);
            worst = std::min(worst, st.kappa[j] - st.lambda[j]);
        }
        if (worst < -1e-8 * max_k) {
            throw FlowError("initial data violates kappa >= lambda (margin " +
                            std::to_string(worst) + "); rerun with allow_unpinched");
        }
    }

    const CurvatureOptions copts = curvature_opts(cfg);
    std::vector<double> scratch(cfg.N);
    std::vector<double> rates;  // closed integral of phi ds at each record

    auto capture = [&](double t_sim) {
        prof.t = t_sim;
        traj.frames.push_back(prof);
        DiagnosticsRecord r = record_from_frame(prof, speed, copts, t_sim);
        rates.push_back(phi_arc_integral(prof, speed, copts));
        traj.records.push_back(r);
    };

    double t = 0.0;
    long step_count = 0;
    double area = support_area(st.grid, prof.sigma, scratch);
    double rate = 0.0;

    while (true) {
        st.eval_phi(prof.sigma, st.phi);
        double max_k = 0.0, min_sigma = std::numeric_limits<double>::infinity();
        for (int j = 0; j < cfg.N; ++j) {
            max_k = std::max(max_k, st.kappa[j]);
            min_sigma = std::min(min_sigma, prof.sigma[j]);
        }
        area = support_area(st.grid, prof.sigma, scratch);
        rate = 0.0;
        for (int j = 0; j < cfg.N; ++j) rate += st.phi[j] / st.kappa[j];
        rate *= st.grid.dtheta();

        if (step_count % cfg.record_every == 0) capture(t);
        if (area <= cfg.stop_area || max_k >= cfg.stop_kappa) {
            if (step_count % cfg.record_every != 0) capture(t);
            break;
        }
        if (!(min_sigma > 0.0)) {
            throw FlowError("support function lost positivity at t = " + std::to_string(t));
        }
        if (step_count >= cfg.max_steps) {
            throw FlowError("no extinction within budget (" + std::to_string(cfg.max_steps) +
                            " steps)");
        }

        double dt;
        if (cfg.fixed_dt > 0.0) {
            dt = cfg.fixed_dt;
        } else {
            const double dth = st.grid.dtheta();
            const double diffusion = st.max_diffusion();
            dt = cfg.cfl * dth * dth / diffusion;
            if (cfg.scheme == Scheme::semi_implicit) {
                dt = std::min(50.0 * dt, 0.25 / diffusion);
            }
        }

        if (cfg.scheme == Scheme::explicit_rk2) {
            st.rk2(prof.sigma, dt);
        } else {
            st.semi_implicit(prof.sigma, dt);
        }
        t += dt;
        ++step_count;
    }
    traj.total_steps = step_count;

    // T_ext: extrapolate A -> 0 linearly over the final decade of recorded area
    {
        const double A_last = traj.records.back().A;
        const double t_last = traj.records.back().t_sim;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int m = 0;
        for (const auto& r : traj.records) {
            if (r.A <= 10.0 * A_last) {
                sx += r.t_sim;
                sy += r.A;
                sxx += r.t_sim * r.t_sim;
                sxy += r.t_sim * r.A;
                ++m;
            }
        }
        const double det = m * sxx - sx * sx;
        double T = t_last + (rate > 0.0 ? A_last / rate : 0.0);
        if (m >= 2 && std::fabs(det) > 0.0) {
            const double slope = (m * sxy - sx * sy) / det;
            const double icept = (sy * sxx - sx * sxy) / det;
            if (slope < 0.0) T = -icept / slope;
        }
        traj.T_ext = std::max(T, t_last * (1.0 + 1e-12));
    }

    // re-index records, fill the rate residual chain and the tip distances
    for (size_t k = 0; k < traj.records.size(); ++k) {
        auto& r = traj.records[k];
        r.t = r.t_sim - traj.T_ext;
        if (k > 0) {
            const auto& p = traj.records[k - 1];
            const double dtk = r.t_sim - p.t_sim;
            if (dtk > 0.0) {
                const double dA = (r.A - traj.records[k - 1].A) / dtk;
                r.area_rate_residual = std::fabs(dA + 0.5 * (rates[k] + rates[k - 1]));
            }
        }
    }
    for (size_t k = 0; k < traj.frames.size(); ++k) {
        auto& r = traj.records[k];
        try {
            const ProfileCurve c = embed(traj.frames[k], copts);
            const Vec2 tip = c.points[cfg.N / 2];  // theta = pi node
            r.tip_grim_dist = grim_cap_distance(c.points, tip, /*tip_is_max_y=*/true);
        } catch (const std::exception&) {
            r.tip_grim_dist = -1.0;  // cap unresolved near extinction
        }
    }
    return traj;
}

Trajectory evolve_from_oval(double R, const SpeedFunction& speed, const FlowConfig& config) {
    if (!(R > 0.0)) throw std::invalid_argument("oval seed needs R > 0");
    if (R < 2.0 && config.N <= 512) {
        // still allowed, but the slice must resolve; rely on the convexity check
    }
    const ProfileCurve seed_curve = angenent_oval(-R, config.N);
    SupportProfile seed = support_from_turning_angle(seed_curve, 0.0, speed.n);
    Trajectory traj = run(seed, speed, config, "oval:" + std::to_string(R));
    traj.oval_R = R;
    return traj;
}

std::vector<SupportProfile> rescaled_tail(const Trajectory& traj, const SpeedFunction& speed,
                                          int count) {
    if (traj.frames.empty()) return {};
    const double phi1 = eval_reduced(speed, 1.0, 1.0);
    const size_t first = count > 0 && count < static_cast<int>(traj.frames.size())
                             ? traj.frames.size() - count
                             : 0;
    std::vector<SupportProfile> out;
    for (size_t k = first; k < traj.frames.size(); ++k) {
        SupportProfile p = steiner_center(traj.frames[k]);
        const double tau = traj.T_ext - p.t;
        if (!(tau > 0.0)) continue;
        const double scale = std::sqrt(2.0 * phi1 * tau);
        for (auto& s : p.sigma) s /= scale;
        out.push_back(std::move(p));
    }
    return out;
}

Trajectory rescale_trajectory(const Trajectory& traj, const SpeedFunction& speed, double s) {
    Trajectory out = traj;
    out.T_ext = traj.T_ext * s * s;
    out.oval_R = std::numeric_limits<double>::quiet_NaN();  // no longer an oval slice
    const CurvatureOptions copts = curvature_opts(traj.config);
    std::vector<double> rates;
    for (size_t k = 0; k < out.frames.size(); ++k) {
        auto& f = out.frames[k];
        for (auto& v : f.sigma) v *= s;
        f.t = traj.frames[k].t * s * s;
        DiagnosticsRecord r = record_from_frame(f, speed, copts, f.t - out.T_ext);
        r.t_sim = f.t;
        rates.push_back(phi_arc_integral(f, speed, copts));
        if (k > 0) {
            const double dtk = f.t - out.frames[k - 1].t;
            if (dtk > 0.0) {
                const double dA = (r.A - out.records[k - 1].A) / dtk;
                r.area_rate_residual = std::fabs(dA + 0.5 * (rates[k] + rates[k - 1]));
            }
        }
        r.tip_grim_dist = traj.records[k].tip_grim_dist;  // recomputed by monitors if needed
        out.records[k] = r;
    }
    return out;
}

}  // namespace pancake
