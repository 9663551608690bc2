// First-order finite-volume solver for the eps-scaled full Euler system on
// the slab: Rusanov or HLL fluxes, SSP-RK2 in time, hydrostatic-reconstruction
// well-balancing for the isothermal static state, mirror walls in z.
//
// The evolved energy variable is E = |m|^2/(2 rho) + eps^-2 E_int, so the
// system is a standard Euler system with effective pressure
// q = eps^-2 p = (E - E_kin)/c_v and sound speed sqrt((1+1/c_v) theta)/eps.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "stratlab/field.hpp"
#include "stratlab/mesh.hpp"
#include "stratlab/static_state.hpp"
#include "stratlab/thermo.hpp"

namespace stratlab {

enum class FluxKind { Rusanov, Hll };
enum class TimeScheme { ForwardEuler, SspRk2 };

struct SolverConfig {
    double epsilon = 1.0;
    double cfl = 0.4;
    FluxKind flux = FluxKind::Rusanov;
    TimeScheme time_scheme = TimeScheme::SspRk2;
    bool well_balanced = true;
    double theta_bar = 1.0;          // equilibrium temperature used by the reconstruction
    PotentialField potential = PotentialField::minus_z();
    GasParams gas{};
    double t_end = 1.0;
    double snapshot_dt = 0.05;       // <= 0: only first and last snapshots
    long max_steps = 50'000'000;
    double rho_floor = kVacuumFloor;
};

struct SolverAbort : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Working state of one cell in evolved (scaled) variables.
struct CellU {
    double rho;
    Vec3 m;
    double E;  // scaled total energy
};

struct Flux5 {
    double rho = 0.0;
    Vec3 m{0.0, 0.0, 0.0};
    double E = 0.0;
};

inline double effective_pressure(const CellU& u, const GasParams& gas) {
    const double ek = 0.5 * norm2(u.m) / u.rho;
    return (u.E - ek) / gas.c_v;
}

inline Flux5 physical_flux(const CellU& u, const Vec3& n, const GasParams& gas) {
    const double q = effective_pressure(u, gas);
    const double un = dot(u.m, n) / u.rho;
    Flux5 f;
    f.rho = dot(u.m, n);
    for (int d = 0; d < 3; ++d) f.m[d] = u.m[d] * un + q * n[d];
    f.E = (u.E + q) * un;
    return f;
}

inline double max_signal(const CellU& u, const Vec3& n, const GasParams& gas) {
    const double q = effective_pressure(u, gas);
    const double c = std::sqrt(gas.gamma() * q / u.rho);
    return std::abs(dot(u.m, n) / u.rho) + c;
}

inline Flux5 rusanov(const CellU& l, const CellU& r, const Vec3& n, const GasParams& gas) {
    const Flux5 fl = physical_flux(l, n, gas);
    const Flux5 fr = physical_flux(r, n, gas);
    const double a = std::max(max_signal(l, n, gas), max_signal(r, n, gas));
    Flux5 f;
    f.rho = 0.5 * (fl.rho + fr.rho) - 0.5 * a * (r.rho - l.rho);
    for (int d = 0; d < 3; ++d)
        f.m[d] = 0.5 * (fl.m[d] + fr.m[d]) - 0.5 * a * (r.m[d] - l.m[d]);
    f.E = 0.5 * (fl.E + fr.E) - 0.5 * a * (r.E - l.E);
    return f;
}

inline Flux5 hll(const CellU& l, const CellU& r, const Vec3& n, const GasParams& gas) {
    const double ql = effective_pressure(l, gas), qr = effective_pressure(r, gas);
    const double cl = std::sqrt(gas.gamma() * ql / l.rho);
    const double cr = std::sqrt(gas.gamma() * qr / r.rho);
    const double unl = dot(l.m, n) / l.rho, unr = dot(r.m, n) / r.rho;
    const double sl = std::min(unl - cl, unr - cr);
    const double sr = std::max(unl + cl, unr + cr);
    const Flux5 fl = physical_flux(l, n, gas);
    const Flux5 fr = physical_flux(r, n, gas);
    if (sl >= 0.0) return fl;
    if (sr <= 0.0) return fr;
    const double inv = 1.0 / (sr - sl);
    Flux5 f;
    f.rho = (sr * fl.rho - sl * fr.rho + sl * sr * (r.rho - l.rho)) * inv;
    for (int d = 0; d < 3; ++d)
        f.m[d] = (sr * fl.m[d] - sl * fr.m[d] + sl * sr * (r.m[d] - l.m[d])) * inv;
    f.E = (sr * fl.E - sl * fr.E + sl * sr * (r.E - l.E)) * inv;
    return f;
}

inline Flux5 face_flux(const CellU& l, const CellU& r, const Vec3& n, FluxKind kind,
                       const GasParams& gas) {
    return kind == FluxKind::Rusanov ? rusanov(l, r, n, gas) : hll(l, r, n, gas);
}

// Hydrostatic extrapolation of a cell state to a face: for the isothermal
// profile rho ~ exp(Phi/Theta_bar) the whole conserved state scales by
// exp((Phi(z_f) - Phi(z_c))/Theta_bar), leaving velocity and temperature
// unchanged.
inline CellU scale_state(const CellU& u, double factor) {
    return {u.rho * factor, {u.m[0] * factor, u.m[1] * factor, u.m[2] * factor}, u.E * factor};
}

}  // namespace detail

// Spec-level numerical flux on unscaled conservative states: mass flux m.n,
// momentum flux (m (x) m / rho + eps^-2 p I).n and scaled energy flux
// (E_kin + eps^-2 (E_int + p)) u.n.  `axis` in [0,3), `sign` = +-1.
struct FluxVector {
    double mass;
    Vec3 momentum;
    double energy;
};

inline FluxVector numerical_flux(const ConservedState& left, const ConservedState& right,
                                 int axis, int sign, double epsilon, const GasParams& gas,
                                 FluxKind kind = FluxKind::Rusanov) {
    if (!(left.rho > 0.0) || !(right.rho > 0.0))
        throw std::domain_error("numerical_flux: vacuum state");
    if (!(left.e_int() > 0.0) || !(right.e_int() > 0.0))
        throw std::domain_error("numerical_flux: nonpositive internal energy");
    const double inv_eps2 = 1.0 / (epsilon * epsilon);
    detail::CellU l{left.rho, left.m, left.e_kin() + inv_eps2 * left.e_int()};
    detail::CellU r{right.rho, right.m, right.e_kin() + inv_eps2 * right.e_int()};
    Vec3 n{0.0, 0.0, 0.0};
    n[axis] = static_cast<double>(sign);
    const detail::Flux5 f = detail::face_flux(l, r, n, kind, gas);
    return {f.rho, f.m, f.E};
}

// Gravity source of the scaled system for one cell: (0, eps^-2 rho grad Phi,
// eps^-2 grad Phi . m).  In well-balanced mode the momentum component is the
// face-consistent difference eps^-2 rho Theta_bar (e^{dPhi+/Th} - e^{dPhi-/Th})/dz,
// which cancels the reconstructed pressure fluxes on the discrete static state.
struct SourceVector {
    Vec3 momentum{0.0, 0.0, 0.0};
    double energy = 0.0;
};

inline SourceVector gravity_source(double rho, const Vec3& m, double z_center, double dz,
                                   const PotentialField& pot, double epsilon,
                                   const GasParams& /*gas*/, bool well_balanced,
                                   double theta_bar) {
    SourceVector s;
    const double inv_eps2 = 1.0 / (epsilon * epsilon);
    const int vert = 2;  // vertical slot of Vec3
    if (pot.is_zero) return s;
    if (well_balanced) {
        const double phi_c = pot.phi(z_center);
        const double fp = std::exp((pot.phi(z_center + 0.5 * dz) - phi_c) / theta_bar);
        const double fm = std::exp((pot.phi(z_center - 0.5 * dz) - phi_c) / theta_bar);
        s.momentum[vert] = inv_eps2 * rho * theta_bar * (fp - fm) / dz;
    } else {
        s.momentum[vert] = inv_eps2 * rho * pot.dphi_dz(z_center);
    }
    s.energy = inv_eps2 * pot.dphi_dz(z_center) * m[vert];
    return s;
}

class CompressibleSolver {
public:
    CompressibleSolver(const Mesh& mesh, const SolverConfig& cfg) : mesh_(mesh), cfg_(cfg) {
        if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("SolverConfig: epsilon > 0 required");
        if (!(cfg.cfl > 0.0 && cfg.cfl < 1.0))
            throw std::invalid_argument("SolverConfig: cfl in (0,1) required");
        precompute_reconstruction();
    }

    const Mesh& mesh() const { return mesh_; }
    const SolverConfig& config() const { return cfg_; }

    double cfl_dt(const FieldState& u) const {
        const int ndim = mesh_.ndim();
        double max_rate = 0.0;
        for (std::size_t c = 0; c < mesh_.cell_count(); ++c) {
            const double rho = u.rho()[c];
            const double q = (u.E()[c] - u.e_kin(c)) / cfg_.gas.c_v;
            const double cs = std::sqrt(cfg_.gas.gamma() * q / rho);
            double rate = 0.0;
            for (int ax = 0; ax < ndim; ++ax) {
                const int slot = (ax == ndim - 1) ? vert_slot() : ax;
                const double uax = std::abs(u.m(slot)[c]) / rho;
                rate += (uax + cs) / mesh_.spacing(ax);
            }
            max_rate = std::max(max_rate, rate);
        }
        return cfg_.cfl / max_rate;
    }

    // One time step (dt <= 0 means compute from CFL); returns the advanced state.
    FieldState step(const FieldState& u, double dt = 0.0) const {
        if (dt <= 0.0) dt = cfl_dt(u);
        FieldState out = u;
        if (cfg_.time_scheme == TimeScheme::ForwardEuler) {
            Rhs rhs = rhs_of(u);
            apply(out, u, rhs, dt);
        } else {
            Rhs k1 = rhs_of(u);
            FieldState u1 = u;
            apply(u1, u, k1, dt);
            Rhs k2 = rhs_of(u1);
            // u2 = 1/2 u + 1/2 (u1 + dt k2)
            combine_rk2(out, u, u1, k2, dt);
        }
        out.time = u.time + dt;
        check_admissible(out);
        return out;
    }

    struct RunResult {
        Trajectory trajectory;
        std::vector<double> series_t, series_mass, series_energy, series_entropy;
        long steps = 0;
    };

    using Observer = std::function<void(const FieldState&)>;

    RunResult run_to_time(const FieldState& initial, Observer observer = nullptr) const {
        RunResult res;
        FieldState u = initial;
        record(res, u, observer);
        res.trajectory.snapshots.push_back(u);
        double next_snap = cfg_.snapshot_dt > 0 ? u.time + cfg_.snapshot_dt
                                                : std::numeric_limits<double>::infinity();
        try {
            while (u.time < cfg_.t_end - 1e-14 && res.steps < cfg_.max_steps) {
                double dt = cfl_dt(u);
                dt = std::min(dt, cfg_.t_end - u.time);
                // land exactly on snapshot times so trajectories are uniform
                if (u.time + dt > next_snap - 1e-14) dt = next_snap - u.time;
                u = step(u, dt);
                ++res.steps;
                if (u.time >= next_snap - 1e-12) {
                    res.trajectory.snapshots.push_back(u);
                    record(res, u, observer);
                    next_snap += cfg_.snapshot_dt;
                }
            }
        } catch (const SolverAbort& e) {
            res.trajectory.aborted = true;
            res.trajectory.abort_reason = e.what();
            return res;
        }
        if (res.trajectory.snapshots.back().time < u.time - 1e-14) {
            res.trajectory.snapshots.push_back(u);
            record(res, u, observer);
        }
        return res;
    }

    // Discrete residual of d_t(rho s) + div(rho s u) between two consecutive
    // states; the entropy flux is the central flux of the average state, which
    // makes the result exactly antisymmetric under genuine time reversal.
    std::vector<double> entropy_production(const FieldState& before, const FieldState& after,
                                           double dt) const {
        const std::size_t nc = mesh_.cell_count();
        std::vector<double> prod(nc, 0.0);
        std::vector<double> rs_b(nc), rs_a(nc), s_avg(nc);
        std::array<std::vector<double>, 3> m_avg;
        for (int d = 0; d < 3; ++d) m_avg[d].assign(nc, 0.0);
        for (std::size_t c = 0; c < nc; ++c) {
            if (before.rho()[c] < cfg_.rho_floor || after.rho()[c] < cfg_.rho_floor) {
                rs_b[c] = rs_a[c] = s_avg[c] = 0.0;
                continue;  // vacuum cells excluded
            }
            rs_b[c] = before.rho()[c] *
                      entropy_from_eint(before.rho()[c], before.e_int(c), cfg_.gas);
            rs_a[c] = after.rho()[c] * entropy_from_eint(after.rho()[c], after.e_int(c), cfg_.gas);
            const double rho = 0.5 * (before.rho()[c] + after.rho()[c]);
            const double ei = 0.5 * (before.e_int(c) + after.e_int(c));
            s_avg[c] = entropy_from_eint(rho, ei, cfg_.gas);
            for (int d = 0; d < 3; ++d)
                m_avg[d][c] = 0.5 * (before.m(d)[c] + after.m(d)[c]);
        }
        for (std::size_t c = 0; c < nc; ++c) prod[c] = (rs_a[c] - rs_b[c]) / dt;

        const int ndim = mesh_.ndim();
        for (int ax = 0; ax < ndim; ++ax) {
            const int slot = (ax == ndim - 1) ? vert_slot() : ax;
            const double inv_h = 1.0 / mesh_.spacing(ax);
            for_each_interior_face(ax, [&](std::size_t cl, std::size_t cr) {
                const double f =
                    0.5 * (m_avg[slot][cl] * s_avg[cl] + m_avg[slot][cr] * s_avg[cr]);
                prod[cl] += f * inv_h;
                prod[cr] -= f * inv_h;
            });
            // wall faces carry zero entropy flux (m.n = 0 there)
        }
        return prod;
    }

    double total_entropy_production(const FieldState& before, const FieldState& after,
                                    double dt) const {
        const auto prod = entropy_production(before, after, dt);
        double tot = 0.0;
        for (double p : prod) tot += p;
        return tot * mesh_.cell_volume() * dt;
    }

private:
    struct Rhs {
        std::vector<double> rho;
        std::array<std::vector<double>, 3> m;
        std::vector<double> E;
    };

    Mesh mesh_;
    SolverConfig cfg_;
    // Per-vertical-cell reconstruction factors toward the upper/lower face.
    std::vector<double> factor_up_, factor_dn_;

    int vert_slot() const { return mesh_.ndim() == 2 ? 1 : 2; }

    void precompute_reconstruction() {
        const int nz = mesh_.nz();
        factor_up_.assign(nz, 1.0);
        factor_dn_.assign(nz, 1.0);
        if (!cfg_.well_balanced || cfg_.potential.is_zero) return;
        const double th = cfg_.theta_bar;
        for (int k = 0; k < nz; ++k) {
            const double zc = mesh_.zc(k);
            const double phi_c = cfg_.potential.phi(zc);
            factor_up_[k] = std::exp((cfg_.potential.phi(zc + 0.5 * mesh_.hz()) - phi_c) / th);
            factor_dn_[k] = std::exp((cfg_.potential.phi(zc - 0.5 * mesh_.hz()) - phi_c) / th);
        }
    }

    template <class F>
    void for_each_interior_face(int axis, F&& fn) const {
        const int nx = mesh_.nx(), ny = mesh_.ny(), nz = mesh_.nz();
        if (axis == 0) {
            for (int k = 0; k < nz; ++k)
                for (int j = 0; j < ny; ++j)
                    for (int i = 0; i < nx; ++i) {
                        const int in = (i + 1) % nx;
                        fn(mesh_.index(i, j, k), mesh_.index(in, j, k));
                    }
        } else if (axis == 1 && mesh_.ndim() == 3) {
            for (int k = 0; k < nz; ++k)
                for (int j = 0; j < ny; ++j)
                    for (int i = 0; i < nx; ++i) {
                        const int jn = (j + 1) % ny;
                        fn(mesh_.index(i, j, k), mesh_.index(i, jn, k));
                    }
        } else {  // vertical
            const int kmax = mesh_.vertical_periodic() ? nz : nz - 1;
            for (int k = 0; k < kmax; ++k)
                for (int j = 0; j < ny; ++j)
                    for (int i = 0; i < nx; ++i) {
                        const int kn = (k + 1) % nz;
                        fn(mesh_.index(i, j, k), mesh_.index(i, j, kn));
                    }
        }
    }

    detail::CellU load(const FieldState& u, std::size_t c) const {
        return {u.rho()[c], {u.m(0)[c], u.m(1)[c], u.m(2)[c]}, u.E()[c]};
    }

    Rhs rhs_of(const FieldState& u) const {
        const std::size_t nc = mesh_.cell_count();
        Rhs rhs;
        rhs.rho.assign(nc, 0.0);
        rhs.E.assign(nc, 0.0);
        for (int d = 0; d < 3; ++d) rhs.m[d].assign(nc, 0.0);

        const int ndim = mesh_.ndim();
        const int vslot = vert_slot();
        const GasParams& gas = cfg_.gas;

        for (int ax = 0; ax < ndim; ++ax) {
            const bool vertical = (ax == ndim - 1);
            const double inv_h = 1.0 / mesh_.spacing(ax);
            Vec3 n{0.0, 0.0, 0.0};
            n[vertical ? vslot : ax] = 1.0;

            auto add_face = [&](std::size_t cl, std::size_t cr, const detail::CellU& l,
                                const detail::CellU& r) {
                const detail::Flux5 f = detail::face_flux(l, r, n, cfg_.flux, gas);
                rhs.rho[cl] -= f.rho * inv_h;
                rhs.rho[cr] += f.rho * inv_h;
                for (int d = 0; d < 3; ++d) {
                    rhs.m[d][cl] -= f.m[d] * inv_h;
                    rhs.m[d][cr] += f.m[d] * inv_h;
                }
                rhs.E[cl] -= f.E * inv_h;
                rhs.E[cr] += f.E * inv_h;
            };

            if (!vertical || mesh_.vertical_periodic()) {
                for_each_interior_face(ax, [&](std::size_t cl, std::size_t cr) {
                    add_face(cl, cr, load(u, cl), load(u, cr));
                });
            } else {
                const int nx = mesh_.nx(), ny = mesh_.ny(), nz = mesh_.nz();
                // interior vertical faces with hydrostatic reconstruction
                for (int k = 0; k + 1 < nz; ++k)
                    for (int j = 0; j < ny; ++j)
                        for (int i = 0; i < nx; ++i) {
                            const std::size_t cl = mesh_.index(i, j, k);
                            const std::size_t cr = mesh_.index(i, j, k + 1);
                            const detail::CellU l =
                                detail::scale_state(load(u, cl), factor_up_[k]);
                            const detail::CellU r =
                                detail::scale_state(load(u, cr), factor_dn_[k + 1]);
                            add_face(cl, cr, l, r);
                        }
                // walls: mirror the reconstructed interior state, so the mass
                // and energy components vanish identically
                for (int j = 0; j < ny; ++j)
                    for (int i = 0; i < nx; ++i) {
                        {  // bottom face of cell (i,j,0): interior is on the + side
                            const std::size_t c0 = mesh_.index(i, j, 0);
                            detail::CellU r = detail::scale_state(load(u, c0), factor_dn_[0]);
                            detail::CellU l = r;
                            l.m[vslot] = -l.m[vslot];
                            const detail::Flux5 f = detail::face_flux(l, r, n, cfg_.flux, gas);
                            rhs.rho[c0] += f.rho * inv_h;
                            for (int d = 0; d < 3; ++d) rhs.m[d][c0] += f.m[d] * inv_h;
                            rhs.E[c0] += f.E * inv_h;
                        }
                        {  // top face of cell (i,j,nz-1)
                            const std::size_t c1 = mesh_.index(i, j, nz - 1);
                            detail::CellU l = detail::scale_state(load(u, c1), factor_up_[nz - 1]);
                            detail::CellU r = l;
                            r.m[vslot] = -r.m[vslot];
                            const detail::Flux5 f = detail::face_flux(l, r, n, cfg_.flux, gas);
                            rhs.rho[c1] -= f.rho * inv_h;
                            for (int d = 0; d < 3; ++d) rhs.m[d][c1] -= f.m[d] * inv_h;
                            rhs.E[c1] -= f.E * inv_h;
                        }
                    }
            }
        }

        // gravity sources
        if (!cfg_.potential.is_zero) {
            const int nx = mesh_.nx(), ny = mesh_.ny(), nz = mesh_.nz();
            for (int k = 0; k < nz; ++k) {
                for (int j = 0; j < ny; ++j)
                    for (int i = 0; i < nx; ++i) {
                        const std::size_t c = mesh_.index(i, j, k);
                        const SourceVector s = gravity_source(
                            u.rho()[c], {u.m(0)[c], u.m(1)[c], u.m(2)[c]}, mesh_.zc(k),
                            mesh_.hz(), cfg_.potential, cfg_.epsilon, gas, cfg_.well_balanced,
                            cfg_.theta_bar);
                        rhs.m[vslot][c] += s.momentum[2];
                        rhs.E[c] += s.energy;
                    }
            }
        }
        return rhs;
    }

    static void apply(FieldState& out, const FieldState& u, const Rhs& rhs, double dt) {
        const std::size_t nc = u.rho().size();
        for (std::size_t c = 0; c < nc; ++c) {
            out.rho()[c] = u.rho()[c] + dt * rhs.rho[c];
            for (int d = 0; d < 3; ++d) out.m(d)[c] = u.m(d)[c] + dt * rhs.m[d][c];
            out.E()[c] = u.E()[c] + dt * rhs.E[c];
        }
    }

    static void combine_rk2(FieldState& out, const FieldState& u, const FieldState& u1,
                            const Rhs& k2, double dt) {
        const std::size_t nc = u.rho().size();
        for (std::size_t c = 0; c < nc; ++c) {
            out.rho()[c] = 0.5 * u.rho()[c] + 0.5 * (u1.rho()[c] + dt * k2.rho[c]);
            for (int d = 0; d < 3; ++d)
                out.m(d)[c] = 0.5 * u.m(d)[c] + 0.5 * (u1.m(d)[c] + dt * k2.m[d][c]);
            out.E()[c] = 0.5 * u.E()[c] + 0.5 * (u1.E()[c] + dt * k2.E[c]);
        }
    }

    void check_admissible(const FieldState& u) const {
        for (std::size_t c = 0; c < mesh_.cell_count(); ++c) {
            if (!(u.rho()[c] > cfg_.rho_floor))
                throw SolverAbort("positivity loss: rho <= floor at cell " + std::to_string(c) +
                                  ", t = " + std::to_string(u.time));
            if (!(u.E()[c] - u.e_kin(c) > 0.0))
                throw SolverAbort("positivity loss: internal energy <= 0 at cell " +
                                  std::to_string(c) + ", t = " + std::to_string(u.time));
        }
    }

    void record(RunResult& res, const FieldState& u, const Observer& obs) const {
        res.series_t.push_back(u.time);
        res.series_mass.push_back(u.total_mass());
        res.series_energy.push_back(u.total_energy());
        res.series_entropy.push_back(u.total_entropy(cfg_.gas));
        if (obs) obs(u);
    }
};

// Initialize a field from the static state (theta = Theta_bar, u = 0).
inline FieldState static_field(const Mesh& mesh, const StaticState& s, const GasParams& gas,
                               double epsilon = 1.0) {
    FieldState u(mesh, epsilon);
    for (int k = 0; k < mesh.nz(); ++k)
        for (int j = 0; j < mesh.ny(); ++j)
            for (int i = 0; i < mesh.nx(); ++i)
                u.set_prim(mesh.index(i, j, k), s.rho_s[k], {0, 0, 0}, s.theta_bar, gas);
    return u;
}

}  // namespace stratlab
