#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "pancake/speeds.hpp"

using namespace pancake;

namespace {

// random point in the open cone with kappa >= lambda > 0
std::pair<double, double> pinched_sample(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(0.05, 3.0);
    double a = dist(rng), b = dist(rng);
    if (a < b) std::swap(a, b);
    return {a, b};
}

}  // namespace

TEST_CASE("reduced evaluation matches hand values") {
    const auto H2 = mean_curvature(2);
    CHECK(eval_reduced(H2, 1.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    const auto P2 = power_mean(2.0, 2);
    CHECK(eval_reduced(P2, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(eval_reduced(P2, 3.0, 4.0) == doctest::Approx(5.0).epsilon(1e-14));
}

TEST_CASE("domain errors on invalid curvature input") {
    const auto H2 = mean_curvature(2);
    CHECK_THROWS_AS(eval_reduced(H2, -1.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(eval_reduced(H2, 0.0, 0.5), std::domain_error);
    CHECK_THROWS_AS(eval_reduced(H2, std::nan(""), 0.5), std::domain_error);
    CHECK_THROWS_AS(eval_reduced(H2, 1.0, -0.1), std::domain_error);
}

TEST_CASE("gradients: closed forms and the Euler identity") {
    const auto H3 = mean_curvature(3);
    const auto g = grad_reduced(H3, 0.7, 1.3);
    CHECK(g.phi_kappa == doctest::Approx(1.0));
    CHECK(g.phi_lambda == doctest::Approx(2.0));
    CHECK_FALSE(g.from_finite_difference);

    const auto P2 = power_mean(2.0, 2);
    const auto gp = grad_reduced(P2, 1.0, 1.0);
    CHECK(gp.phi_kappa == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(gp.phi_lambda == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));

    for (const char* id : {"mean", "pr:2", "pr:3", "mix:mean:1,pr:2:1"}) {
        const auto s = make_speed(id, 2);
        const auto gg = grad_reduced(s, 2.0, 1.0);
        const double phi = eval_reduced(s, 2.0, 1.0);
        CHECK(std::fabs(2.0 * gg.phi_kappa + 1.0 * gg.phi_lambda - phi) <= 1e-8 * phi);
    }
}

TEST_CASE("reduced form agrees with the full form on the diagonal slice") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> dist(0.05, 3.0);
    for (int n : {2, 3, 4}) {
        for (const char* id : {"mean", "pr:2", "pr:3"}) {
            const auto s = make_speed(id, n);
            for (int i = 0; i < 30; ++i) {
                const double k = dist(rng), l = dist(rng);
                std::vector<double> z(n, l);
                z[0] = k;
                const double full = eval_full(s, z);
                const double red = eval_reduced(s, k, l);
                CHECK(std::fabs(full - red) <= 1e-12 * std::max(1.0, std::fabs(full)));
            }
        }
    }
}

TEST_CASE("reduced gradients are nonnegative with phi_kappa positive") {
    std::mt19937_64 rng(29);
    for (const char* id : {"mean", "pr:2", "pr:3", "mix:mean:1,pr:2:1"}) {
        const auto s = make_speed(id, 3);
        for (int i = 0; i < 40; ++i) {
            const auto [k, l] = pinched_sample(rng);
            const auto g = grad_reduced(s, k, l);
            CHECK(g.phi_kappa > 0.0);
            CHECK(g.phi_lambda >= 0.0);
        }
    }
}

TEST_CASE("Euler identity on random cone points") {
    std::mt19937_64 rng(7);
    for (const char* id : {"mean", "pr:2", "pr:3", "mix:mean:1,pr:3:0.5"}) {
        const auto s = make_speed(id, 3);
        for (int i = 0; i < 100; ++i) {
            std::uniform_real_distribution<double> dist(0.05, 3.0);
            const double k = dist(rng), l = dist(rng);
            const double phi = eval_reduced(s, k, l);
            const auto g = grad_reduced(s, k, l);
            CHECK(std::fabs(k * g.phi_kappa + l * g.phi_lambda - phi) <= 1e-8 * phi);
        }
    }
}

TEST_CASE("closed-form gradients agree with central differences") {
    std::mt19937_64 rng(11);
    for (const char* id : {"mean", "pr:2", "pr:3"}) {
        const auto s = make_speed(id, 2);
        SpeedFunction nograd = s;
        nograd.grad_raw = nullptr;
        for (int i = 0; i < 25; ++i) {
            const auto [k, l] = pinched_sample(rng);
            const auto g0 = grad_reduced(s, k, l);
            const auto g1 = grad_reduced(nograd, k, l);
            CHECK(g1.from_finite_difference);
            CHECK(g0.phi_kappa == doctest::Approx(g1.phi_kappa).epsilon(1e-6));
            CHECK(g0.phi_lambda == doctest::Approx(g1.phi_lambda).epsilon(1e-6));
        }
    }
}

TEST_CASE("constants: phi1, phidot1 and the Taylor constant") {
    const auto cH = constants(mean_curvature(2));
    CHECK(cH.phi1 == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(cH.phidot1 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(cH.taylor_C <= 1e-6);  // linear speed

    const auto cP2 = constants(power_mean(2.0, 2));
    CHECK(cP2.phi1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(cP2.phidot1 == doctest::Approx(0.0).epsilon(1e-10));
    // phi_ll(1, xi) = (1 + xi^2)^{-3/2}, sup at xi = 0
    CHECK(cP2.taylor_C == doctest::Approx(1.0).epsilon(1e-3));

    for (int n : {2, 3, 5}) {
        CHECK(constants(power_mean(1.0, n)).phi1 == doctest::Approx(double(n)));
    }
    CHECK(constants(mean_curvature(2)).phi1 >= 1.0);
    CHECK(constants(power_mean(2.0, 2)).phidot1 >= 0.0);

    CHECK_THROWS_WITH_AS(constants(gauss_root(2)), "degenerate speed", std::domain_error);
}

TEST_CASE("normalize") {
    SUBCASE("scales 3H back to unit edge value") {
        auto raw = mean_curvature(2);
        raw.normalization = 3.0;  // 3 * H
        const auto s = normalize(raw);
        CHECK(s.normalization == doctest::Approx(1.0));
        CHECK(eval_reduced(s, 1.0, 0.0) == doctest::Approx(1.0));
    }
    SUBCASE("H is already normalized") {
        const auto s = normalize(mean_curvature(2));
        CHECK(s.normalization == doctest::Approx(1.0));
    }
    SUBCASE("rejects the Gauss root") {
        CHECK_THROWS_AS(normalize(gauss_root(2)), std::domain_error);
        CHECK_THROWS_AS(normalize(gauss_root(4)), std::domain_error);
    }
    SUBCASE("idempotent on samples") {
        auto raw = power_mean(2.0, 2);
        raw.normalization = 1.7;
        const auto once = normalize(raw);
        const auto twice = normalize(once);
        std::mt19937_64 rng(3);
        for (int i = 0; i < 20; ++i) {
            const auto [k, l] = pinched_sample(rng);
            CHECK(eval_reduced(once, k, l) == doctest::Approx(eval_reduced(twice, k, l)));
        }
    }
}

TEST_CASE("combine") {
    SUBCASE("identity") {
        const auto H = mean_curvature(2);
        const SpeedFunction parts[] = {H};
        const double w[] = {1.0};
        const auto c = combine(parts, w);
        CHECK(eval_reduced(c, 2.0, 0.7) == doctest::Approx(eval_reduced(H, 2.0, 0.7)));
    }
    SUBCASE("H + gauss root normalizes with c = 1") {
        const SpeedFunction parts[] = {mean_curvature(2), gauss_root(2)};
        const double w[] = {1.0, 1.0};
        const auto c = combine(parts, w);
        CHECK(c.normalization == doctest::Approx(1.0));  // sum at (1,0) is 1 already
        CHECK(eval_reduced(c, 2.0, 1.0) == doctest::Approx(3.0 + std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("convex combination of identical speeds is the identity") {
        const SpeedFunction parts[] = {power_mean(2.0, 2), power_mean(2.0, 2)};
        const double w[] = {0.5, 0.5};
        const auto c = combine(parts, w);
        std::mt19937_64 rng(5);
        const auto P2 = power_mean(2.0, 2);
        for (int i = 0; i < 20; ++i) {
            const auto [k, l] = pinched_sample(rng);
            CHECK(eval_reduced(c, k, l) == doctest::Approx(eval_reduced(P2, k, l)));
        }
    }
    SUBCASE("mismatched n is rejected") {
        const SpeedFunction parts[] = {mean_curvature(2), mean_curvature(3)};
        const double w[] = {1.0, 1.0};
        CHECK_THROWS_AS(combine(parts, w), std::invalid_argument);
    }
}

TEST_CASE("monotone sandwich kappa <= phi <= phi1 kappa on kappa >= lambda") {
    std::mt19937_64 rng(13);
    for (const char* id : {"mean", "pr:2", "pr:3"}) {
        const auto s = make_speed(id, 2);
        const double phi1 = eval_reduced(s, 1.0, 1.0);
        for (int i = 0; i < 50; ++i) {
            const auto [k, l] = pinched_sample(rng);
            const double phi = eval_reduced(s, k, l);
            CHECK(phi >= k * (1.0 - 1e-12));
            CHECK(phi <= phi1 * k * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("Taylor sandwich with the estimated constant") {
    std::mt19937_64 rng(17);
    for (const char* id : {"mean", "pr:2", "pr:3"}) {
        const auto s = make_speed(id, 2);
        const auto sc = constants(s);
        for (int i = 0; i < 50; ++i) {
            const auto [k, l] = pinched_sample(rng);
            const double phi = eval_reduced(s, k, l);
            CHECK(std::fabs(phi - k - l * sc.phidot1) <= sc.taylor_C * l * l / k + 1e-12);
        }
    }
}

TEST_CASE("admissibility checker") {
    SUBCASE("mean curvature passes all five conditions") {
        const auto rep = check_admissible(mean_curvature(2));
        for (const auto& c : rep.conditions) CHECK(c.pass);
        CHECK(rep.all_pass);
    }
    SUBCASE("pr:2 passes all five conditions") {
        const auto rep = check_admissible(power_mean(2.0, 2));
        CHECK(rep.all_pass);
    }
    SUBCASE("an asymmetric speed fails (a) with a witness") {
        SpeedFunction asym;
        asym.name = "asym";
        asym.n = 2;
        asym.full_raw = [](std::span<const double> z) { return z[0]; };
        asym.reduced_raw = [](double k, double) { return k; };
        const auto rep = check_admissible(asym);
        CHECK_FALSE(rep.condition('a').pass);
        CHECK_FALSE(rep.condition('a').witness.empty());
        CHECK_FALSE(rep.all_pass);
    }
    SUBCASE("gauss root fails non-degeneracy with a witness") {
        const auto rep = check_admissible(gauss_root(2));
        CHECK_FALSE(rep.condition('e').pass);
        CHECK_FALSE(rep.condition('e').witness.empty());
        CHECK(rep.condition('e').detail == "phi(1,0,...,0) = 0");
    }
    SUBCASE("power means with r < 1 fail the C2 probe empirically") {
        // s -> (1 + sqrt(s))^2 has unbounded derivative at 0
        const auto rep = check_admissible(power_mean(0.5, 2));
        CHECK_FALSE(rep.condition('e').pass);
    }
    SUBCASE("pr:3 is admissible") {
        CHECK(check_admissible(power_mean(3.0, 2)).all_pass);
    }
    SUBCASE("the inverse quadratic mean fails inverse-concavity") {
        // 1/phi(1/z) is the Euclidean norm, which is convex
        SpeedFunction ipm;
        ipm.name = "inv-p2";
        ipm.n = 2;
        ipm.full_raw = [](std::span<const double> z) {
            double v = 0.0;
            for (double x : z) v += 1.0 / (x * x);
            return 1.0 / std::sqrt(v);
        };
        ipm.reduced_raw = [](double k, double l) {
            return 1.0 / std::sqrt(1.0 / (k * k) + 1.0 / (l * l));
        };
        const auto rep = check_admissible(ipm);
        CHECK_FALSE(rep.condition('d').pass);
        CHECK_FALSE(rep.condition('d').witness.empty());
    }
    SUBCASE("mixing in the Gauss root keeps admissibility but loses non-degeneracy") {
        // the sqrt(s) term of the Gauss root is not C^2 at s = 0
        const auto rep = check_admissible(make_speed("mix:mean:1,gauss-root:1", 2));
        CHECK(rep.condition('a').pass);
        CHECK(rep.condition('b').pass);
        CHECK(rep.condition('c').pass);
        CHECK_FALSE(rep.condition('e').pass);
    }
    SUBCASE("deterministic for a fixed seed") {
        const auto a = check_admissible(power_mean(2.0, 2));
        const auto b = check_admissible(power_mean(2.0, 2));
        for (int i = 0; i < 5; ++i) {
            CHECK(a.conditions[i].worst_violation == b.conditions[i].worst_violation);
        }
    }
}

TEST_CASE("registry ids") {
    CHECK(make_speed("mean", 2).name == "mean");
    CHECK(eval_reduced(make_speed("pr:2", 2), 3.0, 4.0) == doctest::Approx(5.0));
    CHECK_THROWS_AS(make_speed("nope", 2), std::invalid_argument);
    CHECK_THROWS_AS(make_speed("mean", 1), std::invalid_argument);
    const auto mix = make_speed("mix:mean:1,pr:2:0.5", 2);
    // raw sum at (1,0): 1*1 + 0.5*1 = 1.5, so the normalization is 1/1.5
    CHECK(eval_reduced(mix, 1.0, 0.0) == doctest::Approx(1.0));
    CHECK(eval_reduced(mix, 3.0, 4.0) == doctest::Approx((7.0 + 0.5 * 5.0) / 1.5).epsilon(1e-12));
    CHECK(is_registry_id("gauss-root"));
    CHECK_FALSE(is_registry_id("bogus"));
}
