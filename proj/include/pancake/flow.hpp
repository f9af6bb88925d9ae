#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "pancake/geometry.hpp"

namespace pancake {

enum class Scheme { explicit_rk2, semi_implicit };

struct FlowConfig {
    int N = 512;
    double cfl = 0.2;  // dt = cfl * dtheta^2 / max(phi_k * kappa^2)
    Scheme scheme = Scheme::explicit_rk2;
    bool symmetry_enforce = true;
    double stop_kappa = 1e3;
    double stop_area = 1e-4;
    int record_every = 128;
    DiffBackend diff_backend = DiffBackend::fd4;
    double pole_band = 3.0;
    long max_steps = 4'000'000;
    double fixed_dt = 0.0;        // > 0 overrides the adaptive step (testing)
    bool allow_unpinched = false; // skip the kappa >= lambda seed check
};

/// Scalar diagnostics captured every record_every steps. t is the re-indexed
/// time (extinction at 0); t_sim the raw simulation time. tip_grim_dist is -1
/// when the tip cap is unresolved at that frame.
struct DiagnosticsRecord {
    double t = 0.0;
    double t_sim = 0.0;
    double h = 0.0, ell = 0.0, A = 0.0, rin = 0.0, rout = 0.0;
    double phi_min = 0.0, phi_max = 0.0;
    double min_kappa_minus_lambda = 0.0;
    double max_ratio = 0.0;  // max over nodes of kappa/lambda
    double lambda_integral = 0.0;           // closed integral of lambda ds
    double lambda2_over_kappa_integral = 0.0;
    double tip_grim_dist = -1.0;
    double area_rate_residual = 0.0;  // |dA/dt + closed integral of phi ds|
};

struct Trajectory {
    std::vector<SupportProfile> frames;      // every record_every steps + final
    std::vector<DiagnosticsRecord> records;  // one per frame
    double T_ext = 0.0;                      // extinction-time estimate (sim time)
    std::string speed_id;
    int n = 2;
    FlowConfig config;
    std::string seed_id;
    double oval_R = std::numeric_limits<double>::quiet_NaN();
    long total_steps = 0;

    double reindexed(double t_sim) const { return t_sim - T_ext; }
    bool oval_seeded() const { return !std::isnan(oval_R); }
};

class FlowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One explicit RK2 (midpoint) update of sigma followed by the symmetry
/// projection. dt must respect the CFL bound of the input profile.
SupportProfile step(const SupportProfile& profile, const SpeedFunction& speed, double dt,
                    const FlowConfig& config = {});

/// CFL-bounded time step for the given profile.
double cfl_dt(const SupportProfile& profile, const SpeedFunction& speed, const FlowConfig& config);

/// Integrate to extinction. The initial profile must be convex and satisfy
/// kappa >= lambda pointwise unless config.allow_unpinched is set.
Trajectory run(const SupportProfile& initial, const SpeedFunction& speed,
               const FlowConfig& config = {}, const std::string& seed_id = "custom");

/// Seed run() with the rotated Angenent oval timeslice Gamma_{-R}; the record
/// times are re-indexed so extinction sits at t = 0.
Trajectory evolve_from_oval(double R, const SpeedFunction& speed, const FlowConfig& config = {});

/// Final frames normalized by the round-point radius sqrt(2 phi1 (T_ext - t)),
/// Steiner-centered. Returns the last `count` recorded frames (all if 0).
std::vector<SupportProfile> rescaled_tail(const Trajectory& traj, const SpeedFunction& speed,
                                          int count = 0);

/// Parabolic rescaling: lengths scaled by s, times by s^2, diagnostics
/// recomputed. Used by the scaling-coherence property checks.
Trajectory rescale_trajectory(const Trajectory& traj, const SpeedFunction& speed, double s);

}  // namespace pancake
