#include "pancake/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pancake {

namespace {
// FFTW's planner is not thread-safe; executions on distinct plans are.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct ThetaGrid::Fft {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
    double* real = nullptr;
    fftw_complex* spec = nullptr;
    int n = 0;

    explicit Fft(int n_) : n(n_) {
        std::lock_guard lock(planner_mutex());
        real = fftw_alloc_real(n);
        spec = fftw_alloc_complex(n / 2 + 1);
        fwd = fftw_plan_dft_r2c_1d(n, real, spec, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(n, spec, real, FFTW_ESTIMATE);
    }
    ~Fft() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(real);
        fftw_free(spec);
    }
};

ThetaGrid::ThetaGrid(int N, DiffBackend backend, double pole_band_spacings)
    : n_(N), pole_band_(pole_band_spacings), backend_(backend) {
    if (N < 8 || N % 4 != 0) {
        throw std::invalid_argument("grid size must be a multiple of 4 and at least 8");
    }
    dtheta_ = 2.0 * std::numbers::pi / N;
    theta_.resize(N);
    sin_.resize(N);
    cos_.resize(N);
    blend_.resize(N);
    const int p1 = N / 4, p2 = 3 * N / 4;
    for (int j = 0; j < N; ++j) {
        theta_[j] = dtheta_ * j;
        sin_[j] = std::sin(theta_[j]);
        cos_[j] = std::cos(theta_[j]);
        auto ring_dist = [N](int a, int b) {
            int d = std::abs(a - b) % N;
            return std::min(d, N - d);
        };
        const int d = std::min(ring_dist(j, p1), ring_dist(j, p2));
        blend_[j] = std::clamp(d / pole_band_, 0.0, 1.0);
    }
}

ThetaGrid::~ThetaGrid() { delete fft_; }

ThetaGrid::ThetaGrid(ThetaGrid&& other) noexcept { *this = std::move(other); }

ThetaGrid& ThetaGrid::operator=(ThetaGrid&& other) noexcept {
    if (this != &other) {
        delete fft_;
        n_ = other.n_;
        dtheta_ = other.dtheta_;
        pole_band_ = other.pole_band_;
        backend_ = other.backend_;
        theta_ = std::move(other.theta_);
        sin_ = std::move(other.sin_);
        cos_ = std::move(other.cos_);
        blend_ = std::move(other.blend_);
        fft_ = other.fft_;
        other.fft_ = nullptr;
    }
    return *this;
}

void ThetaGrid::fd4_d1(std::span<const double> f, std::span<double> out) const {
    const int N = n_;
    const double c = 1.0 / (12.0 * dtheta_);
    auto stencil = [&](int m2, int m1, int p1, int p2) {
        return c * (8.0 * (f[p1] - f[m1]) - (f[p2] - f[m2]));
    };
    for (int j = 2; j < N - 2; ++j) out[j] = stencil(j - 2, j - 1, j + 1, j + 2);
    out[0] = stencil(N - 2, N - 1, 1, 2);
    out[1] = stencil(N - 1, 0, 2, 3);
    out[N - 2] = stencil(N - 4, N - 3, N - 1, 0);
    out[N - 1] = stencil(N - 3, N - 2, 0, 1);
}

void ThetaGrid::fd4_d2(std::span<const double> f, std::span<double> out) const {
    const int N = n_;
    const double c = 1.0 / (12.0 * dtheta_ * dtheta_);
    auto stencil = [&](int m2, int m1, int j, int p1, int p2) {
        return c * (-(f[p2] + f[m2]) + 16.0 * (f[p1] + f[m1]) - 30.0 * f[j]);
    };
    for (int j = 2; j < N - 2; ++j) out[j] = stencil(j - 2, j - 1, j, j + 1, j + 2);
    out[0] = stencil(N - 2, N - 1, 0, 1, 2);
    out[1] = stencil(N - 1, 0, 1, 2, 3);
    out[N - 2] = stencil(N - 4, N - 3, N - 2, N - 1, 0);
    out[N - 1] = stencil(N - 3, N - 2, N - 1, 0, 1);
}

void ThetaGrid::spectral_deriv(std::span<const double> f, std::span<double> out, int order) const {
    if (!fft_) fft_ = new Fft(n_);
    const int N = n_;
    std::copy(f.begin(), f.end(), fft_->real);
    fftw_execute(fft_->fwd);
    const double scale = 1.0 / N;
    const int half = N / 2;
    for (int k = 0; k <= half; ++k) {
        double re = fft_->spec[k][0] * scale;
        double im = fft_->spec[k][1] * scale;
        if (order == 1) {
            // (d/dtheta) -> i k; the Nyquist mode of an odd derivative is dropped
            const double kk = (k == half) ? 0.0 : static_cast<double>(k);
            fft_->spec[k][0] = -kk * im;
            fft_->spec[k][1] = kk * re;
        } else {
            const double k2 = static_cast<double>(k) * k;
            fft_->spec[k][0] = -k2 * re;
            fft_->spec[k][1] = -k2 * im;
        }
    }
    fftw_execute(fft_->bwd);
    std::copy(fft_->real, fft_->real + N, out.begin());
}

void ThetaGrid::d1(std::span<const double> in, std::span<double> out) const {
    backend_ == DiffBackend::fd4 ? fd4_d1(in, out) : spectral_deriv(in, out, 1);
}

void ThetaGrid::d2(std::span<const double> in, std::span<double> out) const {
    backend_ == DiffBackend::fd4 ? fd4_d2(in, out) : spectral_deriv(in, out, 2);
}

void ThetaGrid::symmetrize(std::span<double> sigma) const {
    const int N = n_;
    // Orbit of j under theta -> -theta and theta -> pi - theta.
    for (int j = 0; j < N; ++j) {
        const int a = (N - j) % N;
        const int b = ((N / 2 - j) % N + N) % N;
        const int c = (j + N / 2) % N;
        if (j > a || j > b || j > c) continue;  // handle each orbit once
        const double avg = 0.25 * (sigma[j] + sigma[a] + sigma[b] + sigma[c]);
        sigma[j] = sigma[a] = sigma[b] = sigma[c] = avg;
    }
}

double ThetaGrid::integrate(std::span<const double> f) const {
    double s = 0.0;
    for (double v : f) s += v;
    return s * dtheta_;
}

}  // namespace pancake
