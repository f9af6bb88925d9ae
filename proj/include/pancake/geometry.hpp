#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "pancake/grid.hpp"
#include "pancake/speeds.hpp"

namespace pancake {

using Vec2 = std::array<double, 2>;

/// Raised when a profile fails the discrete convexity test sigma_tt + sigma > 0.
class ConvexityError : public std::runtime_error {
public:
    ConvexityError(std::string msg, int node, double value)
        : std::runtime_error(std::move(msg)), worst_node(node), worst_value(value) {}
    int worst_node;
    double worst_value;
};

/// Support function of the profile curve sampled at theta_j = 2*pi*j/N.
/// theta is the turning angle of the counterclockwise curve; the outward
/// normal at theta is (sin theta, -cos theta). The rotation axis is e1.
struct SupportProfile {
    std::vector<double> sigma;
    int N = 0;
    double t = 0.0;  // simulation time
    int n = 2;       // principal curvature count of the rotated hypersurface
};

struct CurvatureData {
    std::vector<double> kappa;   // profile curvature 1/(sigma_tt + sigma)
    std::vector<double> lambda;  // rotational curvature, pole rule in the band
    std::vector<double> phi;     // reduced speed at (kappa, lambda)
    std::vector<std::uint8_t> pole_mask;  // 1 where the pole rule contributed
};

struct ProfileCurve {
    std::vector<Vec2> points;
    std::vector<double> theta;  // uniform turning-angle grid
};

struct Displacements {
    double h = 0.0;    // max extent along the rotation axis e1
    double ell = 0.0;  // max extent orthogonal to the axis
    double A = 0.0;    // enclosed area of the profile curve
    double rin = 0.0;  // min of sigma after Steiner centering
    double rout = 0.0; // max of sigma after Steiner centering
};

struct CurvatureOptions {
    DiffBackend backend = DiffBackend::fd4;
    double pole_band = 3.0;  // band half-width in grid spacings
};

CurvatureData curvatures_from_support(const SupportProfile& profile, const SpeedFunction& speed,
                                      const CurvatureOptions& opts = {});
/// kappa/lambda only (no speed evaluation); grid must match profile.N.
void curvatures_from_support(const ThetaGrid& grid, std::span<const double> sigma,
                             std::span<double> kappa, std::span<double> lambda);

ProfileCurve embed(const SupportProfile& profile, const CurvatureOptions& opts = {});
SupportProfile support_from_turning_angle(const ProfileCurve& curve, double t = 0.0, int n = 2);

Displacements displacements(const SupportProfile& profile, const CurvatureOptions& opts = {});
Displacements displacements(const ProfileCurve& curve);

/// Steiner point s = (1/pi) * integral sigma(theta) nu(theta) dtheta.
Vec2 steiner_point(const SupportProfile& profile);
/// Profile re-centered so its Steiner point sits at the origin.
SupportProfile steiner_center(const SupportProfile& profile);

SupportProfile circle_profile(double r, int N, int n = 2, double t = 0.0);

/// Checks sigma_tt + sigma > 0 at every node; throws ConvexityError otherwise.
void require_convex(const ThetaGrid& grid, std::span<const double> sigma);

// ---- exact reference solutions ----------------------------------------

/// Timeslice of the Angenent oval, cos x = e^t cosh y, sampled on the
/// turning-angle grid. t < 0.
ProfileCurve angenent_oval(double t, int N);

/// Closed forms for the oval (turning angle theta, time t < 0).
double oval_a2(double t);                      // a^2 = 1/(e^{-2t} - 1)
Vec2 oval_point(double theta, double t);       // (x, y)
double oval_kappa(double theta, double t);     // sqrt(cos^2 theta + a^2)
double oval_lambda(double theta, double t);    // -cos(theta)/y, = kappa at poles
double oval_h(double t);                       // arccos(e^t)
double oval_ell(double t);                     // y(pi, t)

/// Grim reaper profile y = t + log(sec x) over x in (-pi/2 + margin, pi/2 - margin).
/// Open curve; translating the output by (0, s) equals the output at t + s.
std::vector<Vec2> grim_reaper(double t, int N, double margin = 0.05);

/// One-sided Hausdorff distance from the cap of a profile (height `cap_height`
/// below/above the tip) to the alpha = 1 Grim reaper, both normalized with the
/// tip at the origin and the cap opening upward. `tip_is_max_y` selects the
/// orientation of the input. Throws if fewer than 16 nodes land in the cap.
double grim_cap_distance(std::span<const Vec2> points, const Vec2& tip, bool tip_is_max_y,
                         double cap_height = 1.0, int min_nodes = 16);

}  // namespace pancake
