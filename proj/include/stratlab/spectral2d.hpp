// Pseudo-spectral 2-D incompressible Euler on the unit torus, in
// vorticity-streamfunction form: dw/dt + U.grad w = 0, U = curl(Lap^-1 w).
// Classical RK4 in time, 2/3-rule dealiasing on the advection product.
#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "stratlab/mesh.hpp"

namespace stratlab {

namespace detail {

// Thin RAII wrapper around FFTW r2c/c2r plans for one N x N real grid.
class Fft2d {
public:
    explicit Fft2d(int n) : n_(n), nk_(n / 2 + 1) {
        real_ = fftw_alloc_real(std::size_t(n_) * n_);
        spec_ = fftw_alloc_complex(std::size_t(n_) * nk_);
        fwd_ = fftw_plan_dft_r2c_2d(n_, n_, real_, spec_, FFTW_MEASURE);
        bwd_ = fftw_plan_dft_c2r_2d(n_, n_, spec_, real_, FFTW_MEASURE);
        if (!fwd_ || !bwd_) throw std::runtime_error("Fft2d: plan creation failed");
    }
    ~Fft2d() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(real_);
        fftw_free(spec_);
    }
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    int n() const { return n_; }
    int nk() const { return nk_; }

    // real (n*n) -> unnormalized coefficients (n*nk)
    void forward(const std::vector<double>& in, std::vector<std::complex<double>>& out) {
        for (std::size_t i = 0; i < in.size(); ++i) real_[i] = in[i];
        fftw_execute(fwd_);
        out.resize(std::size_t(n_) * nk_);
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = {spec_[i][0], spec_[i][1]};
    }
    // coefficients -> real, including the 1/n^2 normalization
    void backward(const std::vector<std::complex<double>>& in, std::vector<double>& out) {
        for (std::size_t i = 0; i < in.size(); ++i) {
            spec_[i][0] = in[i].real();
            spec_[i][1] = in[i].imag();
        }
        fftw_execute(bwd_);
        out.resize(std::size_t(n_) * n_);
        const double scale = 1.0 / (double(n_) * double(n_));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = real_[i] * scale;
    }

private:
    int n_, nk_;
    double* real_;
    fftw_complex* spec_;
    fftw_plan fwd_, bwd_;
};

}  // namespace detail

// Vorticity field on an N x N unit torus; x is the fastest index, sampled at
// the collocation points x_i = i/N, y_j = j/N.
class VorticityField {
public:
    explicit VorticityField(int n) : n_(n), omega_(std::size_t(n) * n, 0.0) {}

    int n() const { return n_; }
    double time = 0.0;
    std::vector<double>& omega() { return omega_; }
    const std::vector<double>& omega() const { return omega_; }
    double& at(int i, int j) { return omega_[std::size_t(j) * n_ + i]; }
    double at(int i, int j) const { return omega_[std::size_t(j) * n_ + i]; }
    double x(int i) const { return double(i) / n_; }
    double y(int j) const { return double(j) / n_; }

    double mean() const {
        double s = 0.0;
        for (double v : omega_) s += v;
        return s / omega_.size();
    }

    template <class F>
    void fill(F&& f) {
        for (int j = 0; j < n_; ++j)
            for (int i = 0; i < n_; ++i) at(i, j) = f(x(i), y(j));
    }

private:
    int n_;
    std::vector<double> omega_;
};

struct VelocityField2d {
    int n = 0;
    std::vector<double> ux, uy;
    double at_ux(int i, int j) const { return ux[std::size_t(j) * n + i]; }
    double at_uy(int i, int j) const { return uy[std::size_t(j) * n + i]; }
};

class SpectralEuler2d {
public:
    explicit SpectralEuler2d(int n) : fft_(n), n_(n), nk_(n / 2 + 1) {}

    int n() const { return n_; }

    // U = grad^perp Lap^-1 w = (-d_y psi, d_x psi), psi the zero-mean
    // streamfunction with Lap psi = w.  Rejects nonzero-mean vorticity.
    VelocityField2d velocity_from_vorticity(const VorticityField& w) {
        if (std::abs(w.mean()) > 1e-10)
            throw std::invalid_argument("velocity_from_vorticity: vorticity must have zero mean");
        std::vector<std::complex<double>> wh;
        fft_.forward(w.omega(), wh);
        std::vector<std::complex<double>> uxh(wh.size()), uyh(wh.size());
        const std::complex<double> I(0.0, 1.0);
        for (int j = 0; j < n_; ++j) {
            const double ky = 2.0 * M_PI * wavenumber(j);
            for (int i = 0; i < nk_; ++i) {
                const double kx = 2.0 * M_PI * i;
                const std::size_t idx = std::size_t(j) * nk_ + i;
                const double k2 = kx * kx + ky * ky;
                if (k2 == 0.0) {
                    uxh[idx] = uyh[idx] = 0.0;
                    continue;
                }
                const std::complex<double> psih = -wh[idx] / k2;
                uxh[idx] = -I * ky * psih;
                uyh[idx] = I * kx * psih;
            }
        }
        VelocityField2d u;
        u.n = n_;
        fft_.backward(uxh, u.ux);
        fft_.backward(uyh, u.uy);
        return u;
    }

    // Mean-zero pressure from -Lap Pi = div(U . grad U), solved spectrally.
    std::vector<double> pressure_from_velocity(const VelocityField2d& u) {
        // div(U.grad U) = d_x(U.grad ux) + d_y(U.grad uy) for div-free U
        std::vector<double> ax = advect(u, u.ux);
        std::vector<double> ay = advect(u, u.uy);
        std::vector<std::complex<double>> axh, ayh;
        fft_.forward(ax, axh);
        fft_.forward(ay, ayh);
        std::vector<std::complex<double>> pih(axh.size());
        const std::complex<double> I(0.0, 1.0);
        for (int j = 0; j < n_; ++j) {
            const double ky = 2.0 * M_PI * wavenumber(j);
            for (int i = 0; i < nk_; ++i) {
                const double kx = 2.0 * M_PI * i;
                const std::size_t idx = std::size_t(j) * nk_ + i;
                const double k2 = kx * kx + ky * ky;
                if (k2 == 0.0) {
                    pih[idx] = 0.0;  // mean-zero normalization
                    continue;
                }
                const std::complex<double> divadv = I * kx * axh[idx] + I * ky * ayh[idx];
                pih[idx] = divadv / k2;  // -Lap Pi = div adv  =>  Pi_hat = div_hat / k2
            }
        }
        std::vector<double> pi;
        fft_.backward(pih, pi);
        return pi;
    }

    // One RK4 step of dw/dt = -U.grad w with 2/3 dealiasing.
    VorticityField euler_step(const VorticityField& w, double dt) {
        auto rhs = [this](const VorticityField& field) {
            VelocityField2d u = velocity_from_vorticity(field);
            std::vector<double> adv = advect(u, field.omega());
            for (double& v : adv) v = -v;
            return adv;
        };
        const std::size_t nc = w.omega().size();
        std::vector<double> k1 = rhs(w);
        VorticityField tmp(n_);
        auto shift = [&](const std::vector<double>& k, double a) {
            for (std::size_t c = 0; c < nc; ++c) tmp.omega()[c] = w.omega()[c] + a * k[c];
        };
        shift(k1, 0.5 * dt);
        std::vector<double> k2 = rhs(tmp);
        shift(k2, 0.5 * dt);
        std::vector<double> k3 = rhs(tmp);
        shift(k3, dt);
        std::vector<double> k4 = rhs(tmp);
        VorticityField out = w;
        for (std::size_t c = 0; c < nc; ++c)
            out.omega()[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        out.time = w.time + dt;
        return out;
    }

    double kinetic_energy(const VelocityField2d& u) const {
        double s = 0.0;
        for (std::size_t c = 0; c < u.ux.size(); ++c)
            s += u.ux[c] * u.ux[c] + u.uy[c] * u.uy[c];
        return 0.5 * s / (double(n_) * n_);
    }
    double enstrophy(const VorticityField& w) const {
        double s = 0.0;
        for (double v : w.omega()) s += v * v;
        return 0.5 * s / (double(n_) * n_);
    }

    // Spectral divergence of a velocity field (max modulus over modes).
    double max_spectral_divergence(const VelocityField2d& u) {
        std::vector<std::complex<double>> uxh, uyh;
        fft_.forward(u.ux, uxh);
        fft_.forward(u.uy, uyh);
        const std::complex<double> I(0.0, 1.0);
        double worst = 0.0;
        for (int j = 0; j < n_; ++j) {
            const double ky = 2.0 * M_PI * wavenumber(j);
            for (int i = 0; i < nk_; ++i) {
                const double kx = 2.0 * M_PI * i;
                const std::size_t idx = std::size_t(j) * nk_ + i;
                worst = std::max(worst,
                                 std::abs(I * kx * uxh[idx] + I * ky * uyh[idx]) /
                                     (double(n_) * n_));
            }
        }
        return worst;
    }

    // U.grad f, computed pseudo-spectrally with 2/3 dealiasing.
    std::vector<double> advect(const VelocityField2d& u, const std::vector<double>& f) {
        std::vector<std::complex<double>> fh;
        fft_.forward(f, fh);
        std::vector<std::complex<double>> fxh(fh.size()), fyh(fh.size());
        const std::complex<double> I(0.0, 1.0);
        for (int j = 0; j < n_; ++j) {
            const double ky = 2.0 * M_PI * wavenumber(j);
            for (int i = 0; i < nk_; ++i) {
                const double kx = 2.0 * M_PI * i;
                const std::size_t idx = std::size_t(j) * nk_ + i;
                fxh[idx] = I * kx * fh[idx];
                fyh[idx] = I * ky * fh[idx];
            }
        }
        std::vector<double> fx, fy;
        fft_.backward(fxh, fx);
        fft_.backward(fyh, fy);
        std::vector<double> prod(f.size());
        for (std::size_t c = 0; c < f.size(); ++c)
            prod[c] = u.ux[c] * fx[c] + u.uy[c] * fy[c];
        dealias(prod);
        return prod;
    }

private:
    detail::Fft2d fft_;
    int n_, nk_;

    int wavenumber(int j) const { return j <= n_ / 2 ? j : j - n_; }

    // Zero all modes with |k| beyond 2/3 of the Nyquist range.
    void dealias(std::vector<double>& f) {
        std::vector<std::complex<double>> fh;
        fft_.forward(f, fh);
        const int cut = n_ / 3;
        for (int j = 0; j < n_; ++j) {
            const int kyj = std::abs(wavenumber(j));
            for (int i = 0; i < nk_; ++i) {
                if (i > cut || kyj > cut) fh[std::size_t(j) * nk_ + i] = 0.0;
            }
        }
        fft_.backward(fh, f);
    }
};

// Limit-solution container: horizontal velocity snapshots and mean-zero
// pressure on the torus, produced by the spectral solver.
struct LimitSolution {
    int n = 0;
    std::vector<double> times;
    std::vector<VelocityField2d> velocity;
    std::vector<std::vector<double>> pressure;  // mean-zero Pi per snapshot
};

inline LimitSolution integrate_limit_solution(SpectralEuler2d& solver, VorticityField w,
                                              double t_end, double dt, double snapshot_dt) {
    LimitSolution out;
    out.n = solver.n();
    auto push = [&](const VorticityField& field) {
        VelocityField2d u = solver.velocity_from_vorticity(field);
        out.pressure.push_back(solver.pressure_from_velocity(u));
        out.velocity.push_back(std::move(u));
        out.times.push_back(field.time);
    };
    push(w);
    double next_snap = w.time + (snapshot_dt > 0 ? snapshot_dt : 1e300);
    while (w.time < t_end - 1e-12) {
        const double step = std::min(dt, t_end - w.time);
        w = solver.euler_step(w, step);
        if (w.time >= next_snap - 1e-12) {
            push(w);
            next_snap += snapshot_dt;
        }
    }
    if (out.times.back() < w.time - 1e-12) push(w);
    return out;
}

}  // namespace stratlab
