#pragma once

#include <span>
#include <vector>

namespace pancake {

enum class DiffBackend { fd4, spectral };

/// Uniform periodic grid theta_j = 2*pi*j/N (turning angle, counterclockwise).
/// Holds trigonometric tables, the pole blend weights and the symmetry index
/// maps used by the flow and geometry pipelines. N must be a multiple of 4 so
/// the poles theta = pi/2, 3*pi/2 land on nodes.
class ThetaGrid {
public:
    explicit ThetaGrid(int N, DiffBackend backend = DiffBackend::fd4,
                       double pole_band_spacings = 3.0);
    ~ThetaGrid();

    ThetaGrid(const ThetaGrid&) = delete;
    ThetaGrid& operator=(const ThetaGrid&) = delete;
    ThetaGrid(ThetaGrid&&) noexcept;
    ThetaGrid& operator=(ThetaGrid&&) noexcept;

    int size() const { return n_; }
    double dtheta() const { return dtheta_; }
    DiffBackend backend() const { return backend_; }
    double pole_band() const { return pole_band_; }

    double theta(int j) const { return theta_[j]; }
    double sin_theta(int j) const { return sin_[j]; }
    double cos_theta(int j) const { return cos_[j]; }
    std::span<const double> thetas() const { return theta_; }

    /// Linear blend weight for the pole rule: 0 at the pole nodes, 1 outside
    /// the band of `pole_band_spacings` grid spacings around theta = pi/2, 3pi/2.
    double blend_weight(int j) const { return blend_[j]; }
    bool in_pole_band(int j) const { return blend_[j] < 1.0; }
    int pole_lo() const { return n_ / 4; }
    int pole_hi() const { return 3 * n_ / 4; }

    /// First/second periodic derivative. out must not alias in.
    void d1(std::span<const double> in, std::span<double> out) const;
    void d2(std::span<const double> in, std::span<double> out) const;

    /// Group-average of sigma over the enforced reflections
    /// sigma(theta) = sigma(-theta) = sigma(pi - theta). In place.
    void symmetrize(std::span<double> sigma) const;

    /// Periodic trapezoid rule (exact weights: dtheta * sum).
    double integrate(std::span<const double> f) const;

private:
    void fd4_d1(std::span<const double> in, std::span<double> out) const;
    void fd4_d2(std::span<const double> in, std::span<double> out) const;
    void spectral_deriv(std::span<const double> in, std::span<double> out, int order) const;

    int n_ = 0;
    double dtheta_ = 0.0;
    double pole_band_ = 3.0;
    DiffBackend backend_ = DiffBackend::fd4;
    std::vector<double> theta_, sin_, cos_, blend_;
    struct Fft;
    mutable Fft* fft_ = nullptr;  // lazily created for the spectral backend
};

}  // namespace pancake
