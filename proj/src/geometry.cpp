#include "pancake/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pancake {

namespace {
constexpr double kPi = std::numbers::pi;

ThetaGrid make_grid(int N, const CurvatureOptions& opts) {
    return ThetaGrid(N, opts.backend, opts.pole_band);
}
}  // namespace

void require_convex(const ThetaGrid& grid, std::span<const double> sigma) {
    const int N = grid.size();
    std::vector<double> dd(N);
    grid.d2(sigma, dd);
    int worst = 0;
    double worst_val = std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; ++j) {
        const double r = dd[j] + sigma[j];
        if (r < worst_val) {
            worst_val = r;
            worst = j;
        }
    }
    if (!(worst_val > 0.0)) {
        throw ConvexityError("lost convexity", worst, worst_val);
    }
}

void curvatures_from_support(const ThetaGrid& grid, std::span<const double> sigma,
                             std::span<double> kappa, std::span<double> lambda) {
    const int N = grid.size();
    std::vector<double> d1(N), d2(N);
    grid.d1(sigma, d1);
    grid.d2(sigma, d2);

    int worst = 0;
    double worst_val = std::numeric_limits<double>::infinity();
    for (int j = 0; j < N; ++j) {
        const double rad = d2[j] + sigma[j];
        if (rad < worst_val) {
            worst_val = rad;
            worst = j;
        }
        kappa[j] = 1.0 / rad;
    }
    if (!(worst_val > 0.0)) {
        throw ConvexityError("lost convexity", worst, worst_val);
    }

    // lambda = -cos(theta)/y from the embedded point, blended to kappa at the
    // poles where numerator and denominator both vanish.
    for (int j = 0; j < N; ++j) {
        const double w = grid.blend_weight(j);
        if (w == 0.0) {
            lambda[j] = kappa[j];
            continue;
        }
        const double y = -sigma[j] * grid.cos_theta(j) + d1[j] * grid.sin_theta(j);
        const double gen = -grid.cos_theta(j) / y;
        lambda[j] = w == 1.0 ? gen : kappa[j] * (1.0 - w) + gen * w;
    }
}

CurvatureData curvatures_from_support(const SupportProfile& profile, const SpeedFunction& speed,
                                      const CurvatureOptions& opts) {
    const ThetaGrid grid = make_grid(profile.N, opts);
    CurvatureData out;
    out.kappa.resize(profile.N);
    out.lambda.resize(profile.N);
    out.phi.resize(profile.N);
    out.pole_mask.resize(profile.N);
    curvatures_from_support(grid, profile.sigma, out.kappa, out.lambda);
    for (int j = 0; j < profile.N; ++j) {
        out.pole_mask[j] = grid.in_pole_band(j) ? 1 : 0;
        out.phi[j] = eval_reduced(speed, out.kappa[j], out.lambda[j]);
    }
    return out;
}

ProfileCurve embed(const SupportProfile& profile, const CurvatureOptions& opts) {
    const ThetaGrid grid = make_grid(profile.N, opts);
    require_convex(grid, profile.sigma);
    const int N = profile.N;
    std::vector<double> d1(N);
    grid.d1(profile.sigma, d1);
    ProfileCurve out;
    out.points.resize(N);
    out.theta.assign(grid.thetas().begin(), grid.thetas().end());
    for (int j = 0; j < N; ++j) {
        // gamma = sigma * nu + sigma_theta * tau with nu = (sin, -cos), tau = (cos, sin)
        const double s = profile.sigma[j], sp = d1[j];
        out.points[j] = {s * grid.sin_theta(j) + sp * grid.cos_theta(j),
                         -s * grid.cos_theta(j) + sp * grid.sin_theta(j)};
    }
    return out;
}

SupportProfile support_from_turning_angle(const ProfileCurve& curve, double t, int n) {
    const int N = static_cast<int>(curve.points.size());
    if (N < 8 || N % 4 != 0) {
        throw std::invalid_argument("curve must be sampled on a grid of size divisible by 4");
    }
    // convexity: cross products of consecutive edges single-signed
    double min_cross = std::numeric_limits<double>::infinity();
    int worst = 0;
    for (int j = 0; j < N; ++j) {
        const auto& a = curve.points[j];
        const auto& b = curve.points[(j + 1) % N];
        const auto& c = curve.points[(j + 2) % N];
        const double cross =
            (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if (cross < min_cross) {
            min_cross = cross;
            worst = j;
        }
    }
    if (!(min_cross > 0.0)) {
        throw ConvexityError("curve is not convex", worst, min_cross);
    }

    SupportProfile out;
    out.N = N;
    out.t = t;
    out.n = n;
    out.sigma.resize(N);
    for (int j = 0; j < N; ++j) {
        const double theta = 2.0 * kPi * j / N;
        out.sigma[j] = curve.points[j][0] * std::sin(theta) - curve.points[j][1] * std::cos(theta);
    }
    return out;
}

Vec2 steiner_point(const SupportProfile& profile) {
    const int N = profile.N;
    const double dth = 2.0 * kPi / N;
    double sx = 0.0, sy = 0.0;
    for (int j = 0; j < N; ++j) {
        const double theta = dth * j;
        sx += profile.sigma[j] * std::sin(theta);
        sy += profile.sigma[j] * -std::cos(theta);
    }
    return {sx * dth / kPi, sy * dth / kPi};
}

SupportProfile steiner_center(const SupportProfile& profile) {
    const Vec2 s = steiner_point(profile);
    SupportProfile out = profile;
    const int N = profile.N;
    const double dth = 2.0 * kPi / N;
    for (int j = 0; j < N; ++j) {
        const double theta = dth * j;
        out.sigma[j] -= s[0] * std::sin(theta) - s[1] * std::cos(theta);
    }
    return out;
}

SupportProfile circle_profile(double r, int N, int n, double t) {
    if (!(r > 0.0)) throw std::invalid_argument("circle radius must be positive");
    SupportProfile out;
    out.N = N;
    out.t = t;
    out.n = n;
    out.sigma.assign(N, r);
    return out;
}

Displacements displacements(const ProfileCurve& curve) {
    Displacements d;
    const int N = static_cast<int>(curve.points.size());
    double h = -std::numeric_limits<double>::infinity();
    double ell = 0.0;
    double area2 = 0.0;
    for (int j = 0; j < N; ++j) {
        const auto& p = curve.points[j];
        const auto& q = curve.points[(j + 1) % N];
        h = std::max(h, p[0]);
        ell = std::max(ell, std::fabs(p[1]));
        area2 += p[0] * q[1] - q[0] * p[1];
    }
    d.h = h;
    d.ell = ell;
    d.A = 0.5 * area2;
    SupportProfile prof = steiner_center(support_from_turning_angle(curve));
    d.rin = *std::min_element(prof.sigma.begin(), prof.sigma.end());
    d.rout = *std::max_element(prof.sigma.begin(), prof.sigma.end());
    return d;
}

Displacements displacements(const SupportProfile& profile, const CurvatureOptions& opts) {
    const ThetaGrid grid = make_grid(profile.N, opts);
    const ProfileCurve curve = embed(profile, opts);
    Displacements d = displacements(curve);
    // support-function area form; must agree with the shoelace value to O(N^-2)
    std::vector<double> d1(profile.N), integrand(profile.N);
    grid.d1(profile.sigma, d1);
    for (int j = 0; j < profile.N; ++j) {
        integrand[j] = profile.sigma[j] * profile.sigma[j] - d1[j] * d1[j];
    }
    d.A = 0.5 * grid.integrate(integrand);
    return d;
}

// ---- exact reference solutions ----------------------------------------

double oval_a2(double t) {
    if (!(t < 0.0)) throw std::domain_error("the oval exists for t < 0 only");
    return 1.0 / std::expm1(-2.0 * t);
}

Vec2 oval_point(double theta, double t) {
    const double a2 = oval_a2(t);
    const double c = std::cos(theta), s = std::sin(theta);
    const double w = std::sqrt(c * c + a2);
    // w - c = a^2/(w + c) avoids the cancellation on the c > 0 half
    const double wmc = c > 0.0 ? a2 / (w + c) : w - c;
    return {std::atan(s / w), -t + std::log(wmc / std::sqrt(a2 + 1.0))};
}

double oval_kappa(double theta, double t) {
    const double c = std::cos(theta);
    return std::sqrt(c * c + oval_a2(t));
}

double oval_lambda(double theta, double t) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    if (std::fabs(s) > 1.0 - 1e-12 || std::fabs(c) < 1e-9) {
        return oval_kappa(theta, t);  // pole rule
    }
    return -c / oval_point(theta, t)[1];
}

double oval_h(double t) { return std::acos(std::exp(t)); }

double oval_ell(double t) {
    const double a2 = oval_a2(t);
    return -t + std::log((std::sqrt(a2 + 1.0) + 1.0) / std::sqrt(a2 + 1.0));
}

ProfileCurve angenent_oval(double t, int N) {
    if (!(t < 0.0)) throw std::domain_error("the oval exists for t < 0 only");
    ProfileCurve out;
    out.points.resize(N);
    out.theta.resize(N);
    for (int j = 0; j < N; ++j) {
        out.theta[j] = 2.0 * kPi * j / N;
        out.points[j] = oval_point(out.theta[j], t);
    }
    return out;
}

std::vector<Vec2> grim_reaper(double t, int N, double margin) {
    std::vector<Vec2> out(N);
    const double lo = -kPi / 2 + margin, hi = kPi / 2 - margin;
    for (int j = 0; j < N; ++j) {
        const double x = lo + (hi - lo) * j / (N - 1);
        out[j] = {x, t - std::log(std::cos(x))};
    }
    return out;
}

double grim_cap_distance(std::span<const Vec2> points, const Vec2& tip, bool tip_is_max_y,
                         double cap_height, int min_nodes) {
    // Normalize: tip at the origin, cap opening upward.
    std::vector<Vec2> cap;
    for (const auto& p : points) {
        const double x = p[0] - tip[0];
        const double y = tip_is_max_y ? tip[1] - p[1] : p[1] - tip[1];
        if (y >= 0.0 && y <= cap_height) cap.push_back({x, y});
    }
    if (static_cast<int>(cap.size()) < min_nodes) {
        throw std::runtime_error("tip cap unresolved: fewer than " + std::to_string(min_nodes) +
                                 " nodes");
    }

    // Reference curve y = -log cos x. Distance per point: coarse scan over the
    // cap's x-range, then a ternary refinement of the squared distance (the
    // distance to a convex graph is unimodal in the foot abscissa).
    const double xmax = std::acos(std::exp(-(cap_height * 1.2)));
    auto dist2_at = [](const Vec2& p, double x) {
        const double dy = -std::log(std::cos(x)) - p[1];
        const double dx = x - p[0];
        return dx * dx + dy * dy;
    };
    constexpr int kCoarse = 512;
    double worst = 0.0;
    for (const auto& p : cap) {
        int best_i = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= kCoarse; ++i) {
            const double x = -xmax + 2.0 * xmax * i / kCoarse;
            const double d = dist2_at(p, x);
            if (d < best) {
                best = d;
                best_i = i;
            }
        }
        double lo = -xmax + 2.0 * xmax * std::max(0, best_i - 1) / kCoarse;
        double hi = -xmax + 2.0 * xmax * std::min(kCoarse, best_i + 1) / kCoarse;
        for (int it = 0; it < 60; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (dist2_at(p, m1) < dist2_at(p, m2)) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        worst = std::max(worst, dist2_at(p, 0.5 * (lo + hi)));
    }
    return std::sqrt(worst);
}

}  // namespace pancake
