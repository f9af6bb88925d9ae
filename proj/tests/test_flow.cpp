#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pancake/flow.hpp"

using namespace pancake;

namespace {
constexpr double kPi = std::numbers::pi;

SupportProfile ellipse_profile(double a, double b, int N) {
    // support of an axis-aligned ellipse with semi-axes a (along e1), b (along e2)
    SupportProfile prof;
    prof.N = N;
    prof.n = 2;
    prof.sigma.resize(N);
    for (int j = 0; j < N; ++j) {
        const double th = 2.0 * kPi * j / N;
        const double n1 = std::sin(th), n2 = -std::cos(th);
        prof.sigma[j] = std::sqrt(a * a * n1 * n1 + b * b * n2 * n2);
    }
    return prof;
}

}  // namespace

TEST_CASE("one explicit step matches the radial law") {
    const auto H = mean_curvature(2);
    const auto prof = circle_profile(1.0, 128, 2);
    const double dt = 1e-4;  // inside the CFL bound at this resolution
    FlowConfig cfg;
    cfg.N = 128;
    const auto next = step(prof, H, dt, cfg);
    const double expected = std::sqrt(1.0 - 4.0 * dt);
    for (int j = 0; j < next.N; ++j) {
        CHECK(next.sigma[j] == doctest::Approx(expected).epsilon(1e-8));
    }
    CHECK(next.t == doctest::Approx(dt));
}

TEST_CASE("symmetry projection keeps symmetric data symmetric to machine precision") {
    const auto prof = support_from_turning_angle(angenent_oval(-3.0, 128), 0.0, 2);
    const auto H = mean_curvature(2);
    FlowConfig cfg;
    cfg.N = 128;
    const auto next = step(prof, H, 1e-5, cfg);
    const int N = next.N;
    for (int j = 0; j < N; ++j) {
        CHECK(next.sigma[j] == next.sigma[(N - j) % N]);
        CHECK(next.sigma[j] == next.sigma[((N / 2 - j) % N + N) % N]);
    }
}

TEST_CASE("zero speed leaves the profile unchanged") {
    SpeedFunction zero;
    zero.name = "zero";
    zero.n = 2;
    zero.full_raw = [](std::span<const double>) { return 0.0; };
    zero.reduced_raw = [](double, double) { return 0.0; };
    zero.grad_raw = [](double, double) -> std::array<double, 2> { return {0.0, 0.0}; };
    const auto prof = support_from_turning_angle(angenent_oval(-3.0, 128), 0.0, 2);
    FlowConfig cfg;
    cfg.N = 128;
    cfg.fixed_dt = 1e-3;
    const auto next = step(prof, zero, 1e-3, cfg);
    for (int j = 0; j < prof.N; ++j) CHECK(next.sigma[j] == doctest::Approx(prof.sigma[j]));
}

TEST_CASE("step guards") {
    const auto H = mean_curvature(2);
    SUBCASE("dt beyond the CFL bound is refused") {
        const auto prof = circle_profile(1.0, 128, 2);
        FlowConfig cfg;
        cfg.N = 128;
        const double bound = cfl_dt(prof, H, cfg);
        CHECK_THROWS_AS(step(prof, H, 10.0 * bound, cfg), FlowError);
    }
    SUBCASE("non-convex input raises lost convexity") {
        SupportProfile bad;
        bad.N = 128;
        bad.n = 2;
        bad.sigma.resize(128);
        for (int j = 0; j < 128; ++j) {
            bad.sigma[j] = 1.0 + 0.9 * std::cos(2.0 * (2.0 * kPi * j / 128));
        }
        FlowConfig cfg;
        cfg.N = 128;
        CHECK_THROWS_AS(step(bad, H, 1e-6, cfg), ConvexityError);
    }
}

TEST_CASE("circle runs reach the exact extinction time") {
    FlowConfig cfg;
    cfg.N = 256;
    SUBCASE("mean curvature, n = 2") {
        const auto traj = run(circle_profile(1.0, 256, 2), mean_curvature(2), cfg, "circle:1");
        CHECK(std::fabs(traj.T_ext - 0.25) <= 1e-3);
        // sigma tracks sqrt(1 - 4 t) along the whole run
        double worst = 0.0;
        for (size_t k = 0; k < traj.frames.size(); ++k) {
            const double r = std::sqrt(1.0 - 4.0 * traj.frames[k].t);
            for (double s : traj.frames[k].sigma) worst = std::max(worst, std::fabs(s - r));
        }
        CHECK(worst <= 1e-4);
    }
    SUBCASE("P2, n = 2") {
        const auto traj = run(circle_profile(1.0, 256, 2), power_mean(2.0, 2), cfg, "circle:1");
        CHECK(std::fabs(traj.T_ext - 1.0 / (2.0 * std::sqrt(2.0))) <= 1e-3);
    }
    SUBCASE("mean curvature, n = 3") {
        const auto traj = run(circle_profile(1.0, 256, 3), mean_curvature(3), cfg, "circle:1");
        CHECK(std::fabs(traj.T_ext - 1.0 / 6.0) <= 1e-3);
    }
}

TEST_CASE("extinction-time error is bounded by the predicted orders on the circle") {
    for (int N : {64, 128}) {
        FlowConfig cfg;
        cfg.N = N;
        const auto traj = run(circle_profile(1.0, N, 2), mean_curvature(2), cfg, "circle:1");
        const double dtheta = 2.0 * kPi / N;
        const double dt_typ = cfg.cfl * dtheta * dtheta;  // kappa ~ 1 scale
        CHECK(std::fabs(traj.T_ext - 0.25) <= 1.0 * (1.0 / (N * N) + dt_typ * dt_typ));
    }
}

TEST_CASE("the pinching class is enforced at the seed") {
    // an ellipse elongated along the rotation axis has kappa < lambda off the poles
    const auto oblate = ellipse_profile(2.0, 1.0, 128);
    FlowConfig cfg;
    cfg.N = 128;
    CHECK_THROWS_AS(run(oblate, mean_curvature(2), cfg, "ellipse"), FlowError);
    cfg.allow_unpinched = true;
    cfg.stop_area = 10.0;  // stop immediately; only the seed handling is under test
    const auto traj = run(oblate, mean_curvature(2), cfg, "ellipse");
    CHECK(traj.records.size() == 1);
}

TEST_CASE("oval-seeded run satisfies the extinction-time bracket") {
    FlowConfig cfg;
    cfg.N = 256;
    cfg.record_every = 64;
    const auto traj = evolve_from_oval(3.0, mean_curvature(2), cfg);
    const double phi1 = 2.0;
    CHECK(traj.T_ext >= 3.0 / (2.0 * phi1) * (1.0 - std::exp(-3.0)));
    CHECK(traj.T_ext <= 3.0 + std::log(2.0));
    CHECK(traj.oval_seeded());
    // re-indexed record times increase and end near zero
    for (size_t k = 1; k < traj.records.size(); ++k) {
        CHECK(traj.records[k].t > traj.records[k - 1].t);
    }
    CHECK(traj.records.back().t <= 0.0);
    // kappa >= lambda at every record (margin from the pole rule)
    for (const auto& r : traj.records) CHECK(r.min_kappa_minus_lambda >= -1e-8);
    // hl sandwich at the record nearest t = -1
    const DiagnosticsRecord* at = nullptr;
    for (const auto& r : traj.records) {
        if (!at || std::fabs(r.t + 1.0) < std::fabs(at->t + 1.0)) at = &r;
    }
    REQUIRE(at != nullptr);
    const double hl = at->h * at->ell;
    CHECK(hl >= 0.5 * kPi * (-at->t) * 0.98);
    CHECK(hl <= kPi * phi1 * (-at->t) * 1.02);
}

TEST_CASE("rescaled tail of a circle run is the unit circle") {
    FlowConfig cfg;
    cfg.N = 128;
    const auto traj = run(circle_profile(1.0, 128, 2), mean_curvature(2), cfg, "circle:1");
    const auto tail = rescaled_tail(traj, mean_curvature(2), 16);
    REQUIRE(!tail.empty());
    for (const auto& p : tail) {
        for (double s : p.sigma) CHECK(std::fabs(s - 1.0) <= 1e-3);
    }
}

TEST_CASE("approximators converge in R at matched re-indexed times") {
    FlowConfig cfg;
    cfg.N = 160;
    cfg.record_every = 32;
    const auto t2 = evolve_from_oval(2.0, mean_curvature(2), cfg);
    const auto t3 = evolve_from_oval(3.0, mean_curvature(2), cfg);
    const auto t4 = evolve_from_oval(4.0, mean_curvature(2), cfg);
    auto frame_near = [](const Trajectory& tr, double t) {
        size_t best = 0;
        for (size_t k = 0; k < tr.records.size(); ++k) {
            if (std::fabs(tr.records[k].t - t) < std::fabs(tr.records[best].t - t)) best = k;
        }
        return tr.frames[best];
    };
    // sup |sigma_a - sigma_b| is the Hausdorff distance between convex bodies
    auto hausdorff = [&](const Trajectory& a, const Trajectory& b, double t) {
        const auto fa = frame_near(a, t);
        const auto fb = frame_near(b, t);
        double dev = 0.0;
        for (int j = 0; j < fa.N; ++j) dev = std::max(dev, std::fabs(fa.sigma[j] - fb.sigma[j]));
        return dev;
    };
    const double d24 = hausdorff(t2, t4, -0.8);
    const double d34 = hausdorff(t3, t4, -0.8);
    CHECK(d24 <= 0.2);
    // distance to the better approximator shrinks as R grows; the observed
    // rate is recorded here, not asserted against a claimed one
    CHECK(d34 <= d24 * 1.05);
    MESSAGE("approximator distances at t=-0.8: d(R2,R4) = ", d24, ", d(R3,R4) = ", d34);
}

TEST_CASE("area decay rate matches the arc integral of phi between records") {
    FlowConfig cfg;
    cfg.N = 128;
    cfg.record_every = 16;
    const auto traj = run(circle_profile(1.0, 128, 2), mean_curvature(2), cfg, "circle:1");
    // the residual on the exact circle is the RK2 truncation alone; the
    // calibrated tolerance is C (cfl dtheta^2)^2 with C frozen at 30
    const double dtheta = 2.0 * kPi / cfg.N;
    const double tol = 30.0 * std::pow(cfg.cfl * dtheta * dtheta, 2);
    for (size_t k = 1; k + 1 < traj.records.size(); ++k) {
        CHECK(traj.records[k].area_rate_residual <= tol);
    }
    FlowConfig cfg2;
    cfg2.N = 128;
    cfg2.record_every = 16;
    const auto oval = evolve_from_oval(2.0, mean_curvature(2), cfg2);
    double worst128 = 0.0;
    for (const auto& r : oval.records) {
        if (r.t <= -0.3) worst128 = std::max(worst128, r.area_rate_residual);
    }
    FlowConfig cfg3 = cfg2;
    cfg3.N = 256;
    cfg3.record_every = 64;
    const auto oval2 = evolve_from_oval(2.0, mean_curvature(2), cfg3);
    double worst256 = 0.0;
    for (const auto& r : oval2.records) {
        if (r.t <= -0.3) worst256 = std::max(worst256, r.area_rate_residual);
    }
    CHECK(worst256 <= worst128 / 1.8);
}

TEST_CASE("the phi evolution equation residual vanishes under refinement") {
    // residual of phi_t = phi_k k^2 phi_tt - phi_l l^2 tan(theta) phi_t + phi |II|_phi^2
    auto residual = [](int N, double dt, int steps) {
        FlowConfig cfg;
        cfg.N = N;
        cfg.fixed_dt = dt;
        cfg.record_every = 1;
        SupportProfile prof;
        prof.N = N;
        prof.n = 2;
        prof.sigma.resize(N);
        for (int j = 0; j < N; ++j) {
            prof.sigma[j] = 1.0 + 0.02 * std::cos(2.0 * (2.0 * kPi * j / N));
        }
        const auto H = mean_curvature(2);
        const ThetaGrid grid(N);
        const CurvatureOptions opts{};
        double worst = 0.0;
        SupportProfile cur = prof;
        for (int s = 0; s < steps; ++s) {
            const auto next = step(cur, H, dt, cfg);
            const auto cd0 = curvatures_from_support(cur, H, opts);
            const auto cd1 = curvatures_from_support(next, H, opts);
            std::vector<double> phi_mid(N), d1(N), d2(N);
            for (int j = 0; j < N; ++j) phi_mid[j] = 0.5 * (cd0.phi[j] + cd1.phi[j]);
            grid.d1(phi_mid, d1);
            grid.d2(phi_mid, d2);
            for (int j = 0; j < N; ++j) {
                const int p1 = N / 4, p2 = 3 * N / 4;
                auto dist = [N](int a, int b) {
                    int v = std::abs(a - b) % N;
                    return std::min(v, N - v);
                };
                if (std::min(dist(j, p1), dist(j, p2)) <= 7) continue;
                const double k = 0.5 * (cd0.kappa[j] + cd1.kappa[j]);
                const double l = 0.5 * (cd0.lambda[j] + cd1.lambda[j]);
                const auto g = grad_reduced(mean_curvature(2), k, l);
                const double lhs = (cd1.phi[j] - cd0.phi[j]) / dt;
                const double rhs = g.phi_kappa * k * k * d2[j] -
                                   g.phi_lambda * l * l * std::tan(grid.theta(j)) * d1[j] +
                                   phi_mid[j] * (g.phi_kappa * k * k + g.phi_lambda * l * l);
                worst = std::max(worst, std::fabs(lhs - rhs));
            }
            cur = next;
        }
        return worst;
    };
    const double r64 = residual(64, 4e-4, 12);
    const double r128 = residual(128, 1e-4, 12);
    CHECK(r128 <= r64 / 3.0);  // consistent with second order in (N, dt)
}

TEST_CASE("semi-implicit backend is stable and lands on the same extinction time") {
    FlowConfig cfg;
    cfg.N = 128;
    cfg.scheme = Scheme::semi_implicit;
    const auto traj = run(circle_profile(1.0, 128, 2), mean_curvature(2), cfg, "circle:1");
    CHECK(std::fabs(traj.T_ext - 0.25) <= 5e-3);

    FlowConfig cfg2 = cfg;
    cfg2.record_every = 64;
    const auto semi = evolve_from_oval(2.0, mean_curvature(2), cfg2);
    FlowConfig cfg3 = cfg2;
    cfg3.scheme = Scheme::explicit_rk2;
    const auto expl = evolve_from_oval(2.0, mean_curvature(2), cfg3);
    CHECK(std::fabs(semi.T_ext - expl.T_ext) <= 0.02 * expl.T_ext);
}

TEST_CASE("n = 3 oval run keeps kappa >= lambda through extinction") {
    // regression: without the pole-blend term in the CFL coefficient the
    // stronger lambda forcing of n = 3 drove a mesh oscillation at the poles
    FlowConfig cfg;
    cfg.N = 128;
    cfg.record_every = 32;
    const auto H3 = mean_curvature(3);
    const auto traj = evolve_from_oval(2.0, H3, cfg);
    const CurvatureOptions opts{};
    for (const auto& frame : traj.frames) {
        const auto cd = curvatures_from_support(frame, H3, opts);
        double maxk = 0.0, worst = std::numeric_limits<double>::infinity();
        for (int j = 0; j < frame.N; ++j) {
            maxk = std::max(maxk, cd.kappa[j]);
            worst = std::min(worst, cd.kappa[j] - cd.lambda[j]);
        }
        CHECK(worst >= -1e-8 * maxk);
    }
}

TEST_CASE("the phi evolution residual also converges on the oval seed") {
    auto residual = [](int N, double dt, int steps) {
        FlowConfig cfg;
        cfg.N = N;
        cfg.fixed_dt = dt;
        const auto H = mean_curvature(2);
        const ThetaGrid grid(N);
        const CurvatureOptions opts{};
        SupportProfile cur = support_from_turning_angle(angenent_oval(-2.0, N), 0.0, 2);
        double worst = 0.0;
        for (int s = 0; s < steps; ++s) {
            const auto next = step(cur, H, dt, cfg);
            const auto cd0 = curvatures_from_support(cur, H, opts);
            const auto cd1 = curvatures_from_support(next, H, opts);
            std::vector<double> pm(N), d1(N), d2(N);
            for (int j = 0; j < N; ++j) pm[j] = 0.5 * (cd0.phi[j] + cd1.phi[j]);
            grid.d1(pm, d1);
            grid.d2(pm, d2);
            for (int j = 0; j < N; ++j) {
                if (std::fabs(grid.cos_theta(j)) < std::sin(0.2)) continue;
                const double k = 0.5 * (cd0.kappa[j] + cd1.kappa[j]);
                const double l = 0.5 * (cd0.lambda[j] + cd1.lambda[j]);
                const auto g = grad_reduced(H, k, l);
                const double lhs = (cd1.phi[j] - cd0.phi[j]) / dt;
                const double rhs = g.phi_kappa * k * k * d2[j] -
                                   g.phi_lambda * l * l * std::tan(grid.theta(j)) * d1[j] +
                                   pm[j] * (g.phi_kappa * k * k + g.phi_lambda * l * l);
                worst = std::max(worst, std::fabs(lhs - rhs));
            }
            cur = next;
        }
        return worst;
    };
    // dt scales with dtheta^2 so both refinements act together; finer pairs
    // hit the fp noise floor of the discrete time derivative
    const double r96 = residual(96, 2e-4, 10);
    const double r192 = residual(192, 5e-5, 10);
    CHECK(r192 <= r96 / 4.0);
}

TEST_CASE("the spectral backend integrates the circle to the same extinction time") {
    FlowConfig cfg;
    cfg.N = 128;
    cfg.diff_backend = DiffBackend::spectral;
    const auto traj = run(circle_profile(1.0, 128, 2), mean_curvature(2), cfg, "circle:1");
    CHECK(std::fabs(traj.T_ext - 0.25) <= 1e-3);
}

TEST_CASE("run refuses grids that are not multiples of four") {
    FlowConfig cfg;
    cfg.N = 130;
    CHECK_THROWS_AS(run(circle_profile(1.0, 130, 2), mean_curvature(2), cfg, "circle:1"),
                    std::invalid_argument);
}

TEST_CASE("run refuses CFL numbers outside (0, 0.5]") {
    FlowConfig cfg;
    cfg.N = 64;
    cfg.cfl = 0.7;
    CHECK_THROWS_AS(run(circle_profile(1.0, 64, 2), mean_curvature(2), cfg, "circle:1"),
                    std::invalid_argument);
}
