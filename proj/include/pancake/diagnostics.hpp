#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "pancake/flow.hpp"

namespace pancake {

/// Outcome of one inequality monitor. Margins are signed with positive meaning
/// the bound is satisfied; pass <=> worst_margin >= -slack_used. `applicable`
/// is false when the monitor does not apply to the trajectory (e.g. the
/// lambda-integral bound on a run that is not slab-confined).
struct BoundReport {
    std::string name;
    int frames_checked = 0;
    double worst_margin = 0.0;
    double witness_time = 0.0;
    bool pass = false;
    double slack_used = 0.0;
    bool applicable = true;
    std::string note;
    std::vector<std::array<double, 2>> margin_series;  // (t, margin) for plots
};

struct AsymptoticFit {
    std::string model;
    std::array<double, 2> window{0.0, 0.0};
    std::vector<double> coefficients;
    std::vector<double> stderrs;
    std::string target;  // the constant being estimated
    double residual_norm = 0.0;
    std::string note;
};

/// Static measurement of the geometry pipeline's discretization scale on
/// exact oval slices: the O(N^-2) term entering every monitor slack.
double geometry_fidelity(int N, const CurvatureOptions& opts = {});

// ---- flow-invariant monitors -------------------------------------------
BoundReport monitor_kappa_ge_lambda(const Trajectory& traj);              // kappa >= lambda
BoundReport monitor_pinching(const Trajectory& traj);           // kappa/lambda <= C preserved
BoundReport monitor_lambda_monotone(const Trajectory& traj);    // lambda nondecreasing on [pi/2, pi]

// ---- displacement and speed bounds --------------------------------------
BoundReport monitor_ell_ge_h(const Trajectory& traj);
BoundReport monitor_hl_sandwich(const Trajectory& traj, const SpeedFunction& speed);
BoundReport monitor_tr_bounds(const Trajectory& traj, const SpeedFunction& speed);
BoundReport monitor_phi_min(const Trajectory& traj, const SpeedFunction& speed);
BoundReport monitor_h_lower(const Trajectory& traj, const SpeedFunction& speed, double R);
BoundReport monitor_ell_upper(const Trajectory& traj, const SpeedFunction& speed, double R);
/// Runs the h lower and ell upper bounds together (records t <= -0.5).
std::array<BoundReport, 2> monitor_displacement_bounds(const Trajectory& traj,
                                                       const SpeedFunction& speed, double R);
BoundReport monitor_chou(const Trajectory& traj, const SpeedFunction& speed,
                         std::array<double, 2> window);
BoundReport monitor_barrier_cos(const Trajectory& traj, const SpeedFunction& speed);
BoundReport monitor_taylor_sandwich(const Trajectory& traj, const SpeedFunction& speed);
BoundReport monitor_lambda_integrals(const Trajectory& traj);
BoundReport monitor_phi_min_decay(const Trajectory& traj, const SpeedFunction& speed);
BoundReport monitor_crude_area_decay(const Trajectory& traj);
BoundReport monitor_slab_convergence(const Trajectory& traj);   // pi/2 - h shrinking into the past
BoundReport monitor_tip_grim(const Trajectory& traj, std::span<const double> sample_times);

// ---- asymptotic fits -----------------------------------------------------
/// Least squares A(t)/(2 pi) + t = a log(-t) + b over the window; a estimates
/// phidot1, b the constant C. Throws if fewer than 10 records fall inside.
AsymptoticFit fit_area_asymptotics(const Trajectory& traj, std::array<double, 2> window);
/// ell(t) + t - phidot1 log(-t): reports the constant and its drift.
AsymptoticFit fit_ell_asymptotics(const Trajectory& traj, double phidot1,
                                  std::array<double, 2> window);
/// m(t) = (-t) (min over non-pole nodes of phi/|cos theta| - 1) -> phidot1.
AsymptoticFit monitor_improved_speed(const Trajectory& traj, const SpeedFunction& speed,
                                     std::array<double, 2> window);

/// Distance of the tip cap to the Grim reaper at the record nearest t.
double tip_grim_distance(const Trajectory& traj, double t);

struct MonitorSuite {
    std::vector<BoundReport> bounds;
    std::vector<AsymptoticFit> fits;
    bool all_pass = true;  // over applicable bound monitors
};

/// Every monitor that applies to the trajectory, in a fixed order.
MonitorSuite run_all_monitors(const Trajectory& traj, const SpeedFunction& speed);

/// Recompute a DiagnosticsRecord from a frame (pure; used by monitors and the
/// scaling-coherence checks).
DiagnosticsRecord record_from_frame(const SupportProfile& frame, const SpeedFunction& speed,
                                    const CurvatureOptions& opts, double t_reindexed);

/// Closed arc-length integral of phi over the profile curve (= -dA/dt).
double phi_arc_integral(const SupportProfile& frame, const SpeedFunction& speed,
                        const CurvatureOptions& opts);

}  // namespace pancake
