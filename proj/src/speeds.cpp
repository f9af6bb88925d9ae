#include "pancake/speeds.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

namespace pancake {

namespace {

void check_domain(double kappa, double lambda) {
    if (std::isnan(kappa) || std::isnan(lambda)) {
        throw std::domain_error("speed evaluated at NaN");
    }
    if (kappa <= 0.0) {
        throw std::domain_error("kappa must be positive");
    }
    if (lambda < 0.0) {
        throw std::domain_error("lambda must be nonnegative");
    }
}

std::vector<double> reduced_point(int n, double kappa, double lambda) {
    std::vector<double> z(n, lambda);
    z[0] = kappa;
    return z;
}

}  // namespace

double eval_reduced(const SpeedFunction& speed, double kappa, double lambda) {
    check_domain(kappa, lambda);
    return speed.normalization * speed.reduced_raw(kappa, lambda);
}

double eval_full(const SpeedFunction& speed, std::span<const double> z) {
    if (static_cast<int>(z.size()) != speed.n) {
        throw std::domain_error("wrong number of curvatures for this speed");
    }
    for (double v : z) {
        if (std::isnan(v) || v <= 0.0) throw std::domain_error("curvatures must be positive");
    }
    return speed.normalization * speed.full_raw(z);
}

GradReduced grad_reduced(const SpeedFunction& speed, double kappa, double lambda) {
    check_domain(kappa, lambda);
    const double c = speed.normalization;
    if (speed.grad_raw) {
        auto g = speed.grad_raw(kappa, lambda);
        return {c * g[0], c * g[1], false};
    }
    const double h = 1e-6 * std::max(1.0, kappa);
    const auto f = [&](double k, double l) { return speed.reduced_raw(k, l); };
    const double fk = (f(kappa + h, lambda) - f(kappa - h, lambda)) / (2.0 * h);
    double fl;
    if (lambda >= h) {
        fl = (f(kappa, lambda + h) - f(kappa, lambda - h)) / (2.0 * h);
    } else {
        // one-sided, second order
        fl = (-3.0 * f(kappa, lambda) + 4.0 * f(kappa, lambda + h) - f(kappa, lambda + 2.0 * h)) /
             (2.0 * h);
    }
    return {c * fk, c * fl, true};
}

SpeedFunction normalize(const SpeedFunction& raw_speed) {
    const double edge = raw_speed.normalization * raw_speed.reduced_raw(1.0, 0.0);
    if (!(edge > 0.0) || std::isnan(edge)) {
        throw std::domain_error("cannot normalize degenerate speed: phi(1,0,...,0) = 0");
    }
    SpeedFunction out = raw_speed;
    out.normalization = raw_speed.normalization / edge;
    return out;
}

SpeedFunction combine(std::span<const SpeedFunction> speeds, std::span<const double> weights) {
    if (speeds.empty() || speeds.size() != weights.size()) {
        throw std::invalid_argument("combine needs matching nonempty speed/weight lists");
    }
    const int n = speeds[0].n;
    for (const auto& s : speeds) {
        if (s.n != n) throw std::invalid_argument("combined speeds must share n");
    }
    for (double w : weights) {
        if (!(w > 0.0)) throw std::invalid_argument("combine weights must be positive");
    }

    struct Member {
        std::function<double(std::span<const double>)> full;
        std::function<double(double, double)> reduced;
        std::function<std::array<double, 2>(double, double)> grad;
        double w;
    };
    auto members = std::make_shared<std::vector<Member>>();
    bool all_have_grad = true;
    std::string name = "mix:";
    for (size_t i = 0; i < speeds.size(); ++i) {
        const auto& s = speeds[i];
        const double w = weights[i] * s.normalization;
        members->push_back({s.full_raw, s.reduced_raw, s.grad_raw, w});
        all_have_grad = all_have_grad && static_cast<bool>(s.grad_raw);
        name += (i ? "," : "") + s.name + ":" + std::to_string(weights[i]);
    }

    SpeedFunction sum;
    sum.name = name;
    sum.n = n;
    sum.normalization = 1.0;
    sum.full_raw = [members](std::span<const double> z) {
        double v = 0.0;
        for (const auto& m : *members) v += m.w * m.full(z);
        return v;
    };
    sum.reduced_raw = [members](double k, double l) {
        double v = 0.0;
        for (const auto& m : *members) v += m.w * m.reduced(k, l);
        return v;
    };
    if (all_have_grad) {
        sum.grad_raw = [members](double k, double l) -> std::array<double, 2> {
            double gk = 0.0, gl = 0.0;
            for (const auto& m : *members) {
                auto g = m.grad(k, l);
                gk += m.w * g[0];
                gl += m.w * g[1];
            }
            return {gk, gl};
        };
    }
    return normalize(sum);
}

// ---- built-ins -----------------------------------------------------------

SpeedFunction mean_curvature(int n) {
    SpeedFunction s;
    s.name = "mean";
    s.n = n;
    s.full_raw = [](std::span<const double> z) {
        double v = 0.0;
        for (double x : z) v += x;
        return v;
    };
    s.reduced_raw = [n](double k, double l) { return k + (n - 1) * l; };
    s.grad_raw = [n](double, double) -> std::array<double, 2> {
        return {1.0, static_cast<double>(n - 1)};
    };
    return s;  // H(1,0,...,0) = 1 already
}

SpeedFunction power_mean(double r, int n) {
    if (!(r > 0.0)) throw std::invalid_argument("power mean exponent must be positive");
    SpeedFunction s;
    s.name = "pr:" + std::to_string(r);
    s.n = n;
    s.full_raw = [r](std::span<const double> z) {
        double v = 0.0;
        for (double x : z) v += std::pow(x, r);
        return std::pow(v, 1.0 / r);
    };
    if (r == 1.0) {
        s.reduced_raw = [n](double k, double l) { return k + (n - 1) * l; };
        s.grad_raw = [n](double, double) -> std::array<double, 2> {
            return {1.0, static_cast<double>(n - 1)};
        };
        return s;
    }
    if (r == 2.0) {  // the quadratic mean dominates the hot loop; avoid pow
        s.reduced_raw = [n](double k, double l) {
            return std::sqrt(k * k + (n - 1) * l * l);
        };
        s.grad_raw = [n](double k, double l) -> std::array<double, 2> {
            const double phi = std::sqrt(k * k + (n - 1) * l * l);
            return {k / phi, (n - 1) * l / phi};
        };
        return s;
    }
    s.reduced_raw = [r, n](double k, double l) {
        return std::pow(std::pow(k, r) + (n - 1) * std::pow(l, r), 1.0 / r);
    };
    s.grad_raw = [r, n](double k, double l) -> std::array<double, 2> {
        const double p = std::pow(k, r) + (n - 1) * std::pow(l, r);
        const double phi = std::pow(p, 1.0 / r);
        const double gk = std::pow(k / phi, r - 1.0);
        double gl;
        if (l == 0.0) {
            gl = r > 1.0 ? 0.0
                 : r == 1.0 ? static_cast<double>(n - 1)
                            : std::numeric_limits<double>::infinity();
        } else {
            gl = (n - 1) * std::pow(l / phi, r - 1.0);
        }
        return {gk, gl};
    };
    return s;  // P_r(1,0,...,0) = 1 already
}

SpeedFunction gauss_root(int n) {
    SpeedFunction s;
    s.name = "gauss-root";
    s.n = n;
    s.full_raw = [n](std::span<const double> z) {
        double v = 1.0;
        for (double x : z) v *= x;
        return std::pow(v, 1.0 / n);
    };
    s.reduced_raw = [n](double k, double l) {
        return std::pow(k * std::pow(l, n - 1), 1.0 / n);
    };
    s.grad_raw = [n](double k, double l) -> std::array<double, 2> {
        if (l == 0.0) return {0.0, std::numeric_limits<double>::infinity()};
        const double phi = std::pow(k * std::pow(l, n - 1), 1.0 / n);
        return {phi / (n * k), (n - 1) * phi / (n * l)};
    };
    return s;  // degenerate at the edge; normalize() would refuse
}

// ---- registry --------------------------------------------------------------

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t next = s.find(sep, pos);
        if (next == std::string::npos) next = s.size();
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

}  // namespace

bool is_registry_id(const std::string& id) {
    return id == "mean" || id == "gauss-root" || id.rfind("pr:", 0) == 0 ||
           id.rfind("mix:", 0) == 0;
}

SpeedFunction make_speed(const std::string& id, int n) {
    if (n < 2) throw std::invalid_argument("speeds need n >= 2");
    if (id == "mean") return mean_curvature(n);
    if (id == "gauss-root") return gauss_root(n);
    if (id.rfind("pr:", 0) == 0) {
        const double r = std::stod(id.substr(3));
        return power_mean(r, n);
    }
    if (id.rfind("mix:", 0) == 0) {
        // mix:<id>:<w>,<id>:<w>  -- the weight follows the last ':' of each part
        std::vector<SpeedFunction> parts;
        std::vector<double> weights;
        for (const auto& item : split(id.substr(4), ',')) {
            const size_t cut = item.rfind(':');
            if (cut == std::string::npos || cut == 0) {
                throw std::invalid_argument("malformed mix component: " + item);
            }
            parts.push_back(make_speed(item.substr(0, cut), n));
            weights.push_back(std::stod(item.substr(cut + 1)));
        }
        auto out = combine(parts, weights);
        out.name = id;
        return out;
    }
    throw std::invalid_argument("unknown speed id: " + id);
}

// ---- constants -------------------------------------------------------------

namespace {

// f(s) = phi(1, s, ..., s), normalized.
double ray_value(const SpeedFunction& speed, double s) {
    return speed.normalization * speed.reduced_raw(1.0, s);
}

// One-sided second-derivative estimates of f at 0 from {0, m, 2m}.
double second_diff(const SpeedFunction& speed, double m) {
    return (ray_value(speed, 0.0) - 2.0 * ray_value(speed, m) + ray_value(speed, 2.0 * m)) /
           (m * m);
}

bool c2_probe_consistent(const SpeedFunction& speed, double tol, double* worst = nullptr) {
    const double h = 1e-4;
    const double q1 = second_diff(speed, h);
    const double q2 = second_diff(speed, 2.0 * h);
    const double q3 = second_diff(speed, 4.0 * h);
    const double scale = std::max({1.0, std::fabs(q1), std::fabs(q2), std::fabs(q3)});
    const double dev = std::max({std::fabs(q1 - q2), std::fabs(q2 - q3), std::fabs(q1 - q3)});
    if (worst) *worst = dev / scale;
    return std::isfinite(dev) && dev <= tol * scale;
}

}  // namespace

SpeedConstants constants(const SpeedFunction& speed) {
    // (c) probe: 1-homogeneity along the diagonal and an off-diagonal ray
    for (double s : {0.5, 2.0}) {
        const double a = eval_reduced(speed, s * 1.0, s * 0.7);
        const double b = s * eval_reduced(speed, 1.0, 0.7);
        if (std::fabs(a - b) > 1e-8 * std::max(1.0, std::fabs(b))) {
            throw std::domain_error("speed is not 1-homogeneous");
        }
    }
    // (e) probe
    if (!(ray_value(speed, 0.0) > 0.0) || !c2_probe_consistent(speed, 2e-2)) {
        throw std::domain_error("degenerate speed");
    }

    SpeedConstants out;
    out.phi1 = eval_reduced(speed, 1.0, 1.0);

    bool have_closed = false;
    if (speed.grad_raw) {
        const double gl = speed.normalization * speed.grad_raw(1.0, 0.0)[1];
        if (std::isfinite(gl)) {
            out.phidot1 = gl;
            have_closed = true;
        }
    }
    if (!have_closed) {
        auto one_sided = [&](double h) {
            return (-3.0 * ray_value(speed, 0.0) + 4.0 * ray_value(speed, h) -
                    ray_value(speed, 2.0 * h)) /
                   (2.0 * h);
        };
        const double d1 = one_sided(1e-4);
        const double d2 = one_sided(5e-5);
        if (std::fabs(d1 - d2) > 1e-4 * std::max(1.0, std::fabs(d2))) {
            throw std::domain_error("degenerate speed");
        }
        out.phidot1 = d2;
    }

    // taylor_C = sup_{xi in [0,1]} |phi_ll(1, xi)| by second differences
    const int M = 1001;
    const double h = 1e-4;
    double sup = 0.0;
    for (int i = 0; i < M; ++i) {
        const double xi = static_cast<double>(i) / (M - 1);
        double fll;
        if (xi < h) {
            fll = second_diff(speed, h);
        } else {
            fll = (ray_value(speed, xi + h) - 2.0 * ray_value(speed, xi) +
                   ray_value(speed, xi - h)) /
                  (h * h);
        }
        sup = std::max(sup, std::fabs(fll));
    }
    out.taylor_C = sup;
    out.taylor_samples = M;
    return out;
}

// ---- admissibility checker --------------------------------------------------

namespace {

std::vector<double> cone_sample(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> dist(0.05, 3.0);
    std::vector<double> z(n);
    for (auto& v : z) v = dist(rng);
    return z;
}

double raw_full(const SpeedFunction& s, std::span<const double> z) {
    return s.normalization * s.full_raw(z);
}

}  // namespace

AdmissibilityReport check_admissible(const SpeedFunction& speed, const ProbeConfig& probe) {
    AdmissibilityReport rep;
    rep.speed = speed.name;
    rep.n = speed.n;
    rep.seed = probe.seed;
    const int n = speed.n;
    std::mt19937_64 rng(probe.seed);

    // (a) symmetry under coordinate permutations
    {
        ConditionReport& c = rep.conditions[0];
        c.name = "symmetry";
        c.pass = true;
        for (int i = 0; i < probe.samples; ++i) {
            auto z = cone_sample(rng, n);
            auto zp = z;
            std::shuffle(zp.begin(), zp.end(), rng);
            const double a = raw_full(speed, z);
            const double b = raw_full(speed, zp);
            const double dev = std::fabs(a - b) / std::max(1.0, std::fabs(a));
            if (dev > c.worst_violation) {
                c.worst_violation = dev;
                c.witness = z;
            }
        }
        c.pass = c.worst_violation <= probe.tol_symmetry;
        if (!c.pass) c.detail = "phi changes under permutation of the curvatures";
    }

    // (b) ellipticity: all partials positive on the cone's unit sphere
    {
        ConditionReport& c = rep.conditions[1];
        c.name = "ellipticity";
        double min_partial = std::numeric_limits<double>::infinity();
        for (int i = 0; i < probe.samples; ++i) {
            auto z = cone_sample(rng, n);
            double norm = 0.0;
            for (double v : z) norm += v * v;
            norm = std::sqrt(norm);
            for (auto& v : z) v /= norm;
            for (int k = 0; k < n; ++k) {
                const double h = 1e-6 * std::max(1.0, z[k]);
                auto zp = z, zm = z;
                zp[k] += h;
                zm[k] = std::max(zm[k] - h, 1e-12);
                const double d = (raw_full(speed, zp) - raw_full(speed, zm)) / (zp[k] - zm[k]);
                if (d < min_partial) {
                    min_partial = d;
                    c.witness = z;
                }
            }
        }
        c.pass = min_partial > probe.tol_ellipticity;
        c.worst_violation = c.pass ? 0.0 : probe.tol_ellipticity - min_partial;
        if (!c.pass) c.detail = "a partial derivative is not positive on the cone";
    }

    // (c) 1-homogeneity under scalings
    {
        ConditionReport& c = rep.conditions[2];
        c.name = "homogeneity";
        for (int i = 0; i < probe.samples; ++i) {
            auto z = cone_sample(rng, n);
            const double f = raw_full(speed, z);
            for (double s : {0.5, 2.0, 10.0}) {
                auto zs = z;
                for (auto& v : zs) v *= s;
                const double dev =
                    std::fabs(raw_full(speed, zs) - s * f) / std::max(1.0, s * std::fabs(f));
                if (dev > c.worst_violation) {
                    c.worst_violation = dev;
                    c.witness = z;
                }
            }
        }
        c.pass = c.worst_violation <= probe.tol_homogeneity;
        if (!c.pass) c.detail = "phi(s z) deviates from s phi(z)";
    }

    // (d) inverse-concavity: Hessian of z -> 1/phi(1/z) negative semidefinite
    {
        ConditionReport& c = rep.conditions[3];
        c.name = "inverse-concavity";
        auto g = [&](std::span<const double> z) {
            std::vector<double> inv(z.size());
            for (size_t k = 0; k < z.size(); ++k) inv[k] = 1.0 / z[k];
            return 1.0 / raw_full(speed, inv);
        };
        const int hess_samples = std::max(8, probe.samples / 8);
        for (int i = 0; i < hess_samples; ++i) {
            auto z = cone_sample(rng, n);
            Eigen::MatrixXd H(n, n);
            for (int a = 0; a < n; ++a) {
                for (int b = a; b < n; ++b) {
                    const double ha = 1e-4 * z[a], hb = 1e-4 * z[b];
                    auto zz = z;
                    auto at = [&](double da, double db) {
                        zz = z;
                        zz[a] += da;
                        zz[b] += db;
                        return g(zz);
                    };
                    double v;
                    if (a == b) {
                        v = (at(ha, 0) - 2.0 * g(z) + at(-ha, 0)) / (ha * ha);
                    } else {
                        v = (at(ha, hb) - at(ha, -hb) - at(-ha, hb) + at(-ha, -hb)) /
                            (4.0 * ha * hb);
                    }
                    H(a, b) = H(b, a) = v;
                }
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
            const double scale = std::max(1e-12, H.norm());
            const double worst = es.eigenvalues().maxCoeff() / scale;
            if (worst > c.worst_violation) {
                c.worst_violation = worst;
                c.witness = z;
            }
        }
        c.pass = c.worst_violation <= probe.tol_inverse_concavity;
        if (!c.pass) c.detail = "1/phi(1/z) has a direction of convexity";
    }

    // (e) non-degeneracy: C^2 regularity of s -> phi(1, s, ..., s) at 0, and
    // phi(1, 0, ..., 0) > 0
    {
        ConditionReport& c = rep.conditions[4];
        c.name = "non-degeneracy";
        const double edge = speed.normalization * speed.reduced_raw(1.0, 0.0);
        if (!(edge > 0.0) || std::isnan(edge)) {
            c.pass = false;
            c.worst_violation = 1.0;
            c.witness = reduced_point(n, 1.0, 0.0);
            c.detail = "phi(1,0,...,0) = 0";
        } else {
            double dev = 0.0;
            c.pass = c2_probe_consistent(speed, probe.tol_nondegenerate, &dev);
            c.worst_violation = dev;
            if (!c.pass) {
                c.witness = reduced_point(n, 1.0, 0.0);
                c.detail = "one-sided second derivative at s = 0 is inconsistent across step sizes";
            }
        }
    }

    rep.all_pass = true;
    for (const auto& c : rep.conditions) rep.all_pass = rep.all_pass && c.pass;
    return rep;
}

}  // namespace pancake
