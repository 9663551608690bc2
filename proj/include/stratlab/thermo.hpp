// Perfect-gas thermodynamics: p = rho*theta, e_int = c_v*rho*theta,
// s = log(theta^c_v / rho), plus the concave bounded entropy cutoffs Z.
#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "stratlab/mesh.hpp"

namespace stratlab {

struct GasParams {
    double c_v = 1.5;  // specific heat at constant volume, > 0

    GasParams() = default;
    explicit GasParams(double cv) : c_v(cv) {
        if (!(c_v > 0.0)) throw std::invalid_argument("GasParams: c_v must be positive");
    }
    double gamma() const { return 1.0 + 1.0 / c_v; }
};

// Density below this is treated as vacuum; momentum is forced to zero there.
inline constexpr double kVacuumFloor = 1e-12;

struct PrimitiveState {
    double rho = 0.0;
    double theta = 0.0;  // undefined (left 0) in vacuum cells
    Vec3 u{0.0, 0.0, 0.0};
    bool vacuum() const { return rho < kVacuumFloor; }
};

struct ConservedState {
    double rho = 0.0;
    Vec3 m{0.0, 0.0, 0.0};
    double E = 0.0;  // total energy density E_kin + E_int

    double e_kin() const { return rho < kVacuumFloor ? 0.0 : 0.5 * norm2(m) / rho; }
    double e_int() const { return E - e_kin(); }
};

inline double pressure(double rho, double theta) {
    if (rho < 0.0 || theta <= 0.0)
        throw std::domain_error("pressure: need rho >= 0, theta > 0");
    return rho * theta;
}

inline double internal_energy(double rho, double theta, const GasParams& gas) {
    if (rho < 0.0 || theta <= 0.0)
        throw std::domain_error("internal_energy: need rho >= 0, theta > 0");
    return gas.c_v * rho * theta;
}

// Specific entropy; undefined in vacuum.
inline double entropy(double rho, double theta, const GasParams& gas) {
    if (!(rho > 0.0) || !(theta > 0.0))
        throw std::domain_error("entropy: need rho > 0, theta > 0");
    return gas.c_v * std::log(theta) - std::log(rho);
}

// Specific entropy from (rho, E_int):  theta = E_int / (c_v rho).
inline double entropy_from_eint(double rho, double e_int, const GasParams& gas) {
    if (!(rho > 0.0) || !(e_int > 0.0))
        throw std::domain_error("entropy_from_eint: need rho > 0, E_int > 0");
    return gas.c_v * std::log(e_int / (gas.c_v * rho)) - std::log(rho);
}

// Central finite-difference residual of the Gibbs relation
//   theta*Ds - De - p*D(1/rho) = 0
// probed in both the rho and theta directions.  Returns the larger of the two
// component magnitudes; O(h^2) for the closed-form perfect gas functions.
inline double gibbs_residual(double rho, double theta, const GasParams& gas,
                             double step_scale = 1e-5) {
    if (!(rho > 0.0) || !(theta > 0.0))
        throw std::domain_error("gibbs_residual: need rho > 0, theta > 0");
    if (!(step_scale > 0.0)) throw std::invalid_argument("gibbs_residual: step must be positive");
    auto e = [&](double, double t) { return gas.c_v * t; };          // specific internal energy
    auto sf = [&](double r, double t) { return entropy(r, t, gas); };
    auto vol = [](double r, double) { return 1.0 / r; };

    const double p = pressure(rho, theta);
    const double hr = step_scale * std::max(1.0, std::abs(rho));
    const double ht = step_scale * std::max(1.0, std::abs(theta));

    auto central = [](auto f, double a, double b, double ha, bool in_first) {
        return in_first ? (f(a + ha, b) - f(a - ha, b)) / (2.0 * ha)
                        : (f(a, b + ha) - f(a, b - ha)) / (2.0 * ha);
    };

    const double r_rho = theta * central(sf, rho, theta, hr, true)
                         - central(e, rho, theta, hr, true)
                         - p * central(vol, rho, theta, hr, true);
    const double r_theta = theta * central(sf, rho, theta, ht, false)
                           - central(e, rho, theta, ht, false);
    return std::max(std::abs(r_rho), std::abs(r_theta));
}

inline PrimitiveState cons_to_prim(const ConservedState& c, const GasParams& gas) {
    PrimitiveState p;
    if (c.rho < 0.0) throw std::domain_error("cons_to_prim: negative density");
    if (c.rho < kVacuumFloor) {
        p.rho = 0.0;  // vacuum: momentum ignored, theta undefined
        return p;
    }
    p.rho = c.rho;
    p.u = {c.m[0] / c.rho, c.m[1] / c.rho, c.m[2] / c.rho};
    const double e_int = c.E - 0.5 * norm2(c.m) / c.rho;
    if (e_int < 0.0) throw std::domain_error("cons_to_prim: negative internal energy");
    p.theta = e_int / (gas.c_v * c.rho);
    return p;
}

inline ConservedState prim_to_cons(const PrimitiveState& p, const GasParams& gas) {
    ConservedState c;
    if (p.rho < 0.0) throw std::domain_error("prim_to_cons: negative density");
    if (p.vacuum()) return c;
    c.rho = p.rho;
    c.m = {p.rho * p.u[0], p.rho * p.u[1], p.rho * p.u[2]};
    c.E = 0.5 * p.rho * norm2(p.u) + internal_energy(p.rho, p.theta, gas);
    return c;
}

// Admissible renormalization Z: identity below s0, a C^2 concave quintic
// blend on [s0, s0+beta], constant Z_inf = s0 + beta/2 above.  With
// `zero_above` the whole graph is shifted down by Z_inf, which yields the
// negative-tail cutoff (Z < 0 below s0+beta, Z = 0 above) used for entropy
// support bounds.
struct CutoffSpec {
    double s0 = 0.0;
    double beta = 1.0;
    bool zero_above = false;

    CutoffSpec() = default;
    CutoffSpec(double s0_, double beta_, bool zero_above_ = false)
        : s0(s0_), beta(beta_), zero_above(zero_above_) {
        if (!(beta > 0.0)) throw std::invalid_argument("CutoffSpec: beta must be positive");
    }

    double z_inf() const { return zero_above ? 0.0 : s0 + 0.5 * beta; }

    double operator()(double s) const {
        const double shift = zero_above ? (s0 + 0.5 * beta) : 0.0;
        if (s <= s0) return s - shift;
        if (s >= s0 + beta) return s0 + 0.5 * beta - shift;
        const double u = (s - s0) / beta;
        // q(u) = u - u^3 + u^4/2:  q'(u) = (1-u)^2 (1+2u) >= 0, q''= 6u(u-1) <= 0.
        const double q = u - u * u * u + 0.5 * u * u * u * u;
        return s0 + beta * q - shift;
    }

    double derivative(double s) const {
        if (s <= s0) return 1.0;
        if (s >= s0 + beta) return 0.0;
        const double u = (s - s0) / beta;
        return (1.0 - u) * (1.0 - u) * (1.0 + 2.0 * u);
    }
};

inline double apply_cutoff(const CutoffSpec& z, double s) { return z(s); }

}  // namespace stratlab
