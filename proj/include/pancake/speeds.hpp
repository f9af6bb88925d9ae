#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pancake {

/// A symmetric 1-homogeneous speed on the positive cone, stored in normalized
/// form (normalization * raw). The reduced two-argument form
/// phi(kappa, lambda) := phi(kappa, lambda, ..., lambda) is the primary
/// interface; the full n-argument form exists for the admissibility checker.
/// Immutable after construction; safe to share between threads.
struct SpeedFunction {
    std::string name;
    int n = 2;  // number of principal curvatures (ambient dimension minus one)
    double normalization = 1.0;
    std::function<double(std::span<const double>)> full_raw;
    std::function<double(double, double)> reduced_raw;
    /// Closed-form gradient of the reduced two-variable function, if known.
    std::function<std::array<double, 2>(double, double)> grad_raw;
};

struct SpeedConstants {
    double phi1 = 0.0;      // phi(1, ..., 1)
    double phidot1 = 0.0;   // d/ds|_{s=0+} phi(1, s, ..., s)
    double taylor_C = 0.0;  // sup_{xi in [0,1]} |phi_ll(1, xi)|, estimated
    int taylor_samples = 0; // sampling density used for taylor_C
};

struct GradReduced {
    double phi_kappa = 0.0;
    double phi_lambda = 0.0;
    bool from_finite_difference = false;
};

struct ProbeConfig {
    int samples = 200;
    std::uint64_t seed = 20260810ull;
    double tol_symmetry = 1e-9;           // relative
    double tol_ellipticity = 1e-7;        // partials must exceed this on samples
    double tol_homogeneity = 1e-9;        // relative
    double tol_inverse_concavity = 1e-6;  // eigenvalue slack, relative to |H|
    double tol_nondegenerate = 2e-2;      // second-derivative consistency, relative
};

struct ConditionReport {
    std::string name;
    bool pass = false;
    double worst_violation = 0.0;
    std::vector<double> witness;  // cone point realizing the worst violation
    std::string detail;
};

struct AdmissibilityReport {
    std::string speed;
    int n = 0;
    std::uint64_t seed = 0;
    std::array<ConditionReport, 5> conditions;  // (a) ... (e)
    bool all_pass = false;

    const ConditionReport& condition(char label) const { return conditions[label - 'a']; }
};

double eval_reduced(const SpeedFunction& speed, double kappa, double lambda);
double eval_full(const SpeedFunction& speed, std::span<const double> z);
GradReduced grad_reduced(const SpeedFunction& speed, double kappa, double lambda);
SpeedConstants constants(const SpeedFunction& speed);

/// Rescale so that phi(1, 0, ..., 0) = 1. Throws if the raw value vanishes
/// there (e.g. the Gauss-curvature root alone).
SpeedFunction normalize(const SpeedFunction& raw_speed);

/// Weighted pointwise sum, then normalized.
SpeedFunction combine(std::span<const SpeedFunction> speeds, std::span<const double> weights);

AdmissibilityReport check_admissible(const SpeedFunction& speed, const ProbeConfig& probe = {});

/// Built-in speeds (already normalized).
SpeedFunction mean_curvature(int n);
SpeedFunction power_mean(double r, int n);
/// n-th root of the Gauss curvature; degenerate, left unnormalized (c = 1).
SpeedFunction gauss_root(int n);

/// Registry: "mean", "pr:<r>", "gauss-root", "mix:<id>:<w>,<id>:<w>".
SpeedFunction make_speed(const std::string& id, int n);
bool is_registry_id(const std::string& id);

}  // namespace pancake
