// Grid fields in conservative variables and snapshot trajectories.
//
// FieldState stores the variables actually evolved by the scaled system:
// (rho, m, E) with E = |m|^2/(2 rho) + eps^-2 * E_int.  For eps = 1 this is
// the plain total energy density.  E_int is recovered via eps^2 (E - E_kin).
#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "stratlab/mesh.hpp"
#include "stratlab/thermo.hpp"

namespace stratlab {

class FieldState {
public:
    FieldState() = default;
    FieldState(const Mesh& mesh, double epsilon = 1.0)
        : mesh_(mesh), epsilon_(epsilon), rho_(mesh.cell_count(), 0.0),
          E_(mesh.cell_count(), 0.0) {
        for (int d = 0; d < 3; ++d) m_[d].assign(mesh.cell_count(), 0.0);
    }

    const Mesh& mesh() const { return mesh_; }
    double epsilon() const { return epsilon_; }
    double time = 0.0;

    std::vector<double>& rho() { return rho_; }
    const std::vector<double>& rho() const { return rho_; }
    std::vector<double>& m(int d) { return m_[d]; }
    const std::vector<double>& m(int d) const { return m_[d]; }
    std::vector<double>& E() { return E_; }
    const std::vector<double>& E() const { return E_; }

    double e_kin(std::size_t c) const {
        if (rho_[c] < kVacuumFloor) return 0.0;
        const double mm = m_[0][c] * m_[0][c] + m_[1][c] * m_[1][c] + m_[2][c] * m_[2][c];
        return 0.5 * mm / rho_[c];
    }
    double e_int(std::size_t c) const {
        return epsilon_ * epsilon_ * (E_[c] - e_kin(c));
    }
    Vec3 momentum(std::size_t c) const { return {m_[0][c], m_[1][c], m_[2][c]}; }

    // Unscaled conservative state of a cell (E = E_kin + E_int).
    ConservedState cons(std::size_t c) const {
        ConservedState u;
        u.rho = rho_[c];
        u.m = momentum(c);
        u.E = e_kin(c) + e_int(c);
        return u;
    }

    // Assign a cell from primitive variables.
    void set_prim(std::size_t c, double rho, const Vec3& u, double theta, const GasParams& gas) {
        rho_[c] = rho;
        if (rho < kVacuumFloor) {
            m_[0][c] = m_[1][c] = m_[2][c] = 0.0;
            E_[c] = 0.0;
            return;
        }
        for (int d = 0; d < 3; ++d) m_[d][c] = rho * u[d];
        const double ek = 0.5 * rho * norm2(u);
        E_[c] = ek + internal_energy(rho, theta, gas) / (epsilon_ * epsilon_);
    }

    double total_mass() const {
        double tot = 0.0;
        for (double r : rho_) tot += r;
        return tot * mesh_.cell_volume();
    }
    double total_energy() const {
        double tot = 0.0;
        for (double e : E_) tot += e;
        return tot * mesh_.cell_volume();
    }
    // Integral of rho * Z(s); Z = nullptr means Z(s) = s.
    double total_entropy(const GasParams& gas, const CutoffSpec* z = nullptr) const {
        double tot = 0.0;
        for (std::size_t c = 0; c < rho_.size(); ++c) {
            if (rho_[c] < kVacuumFloor) continue;
            const double s = entropy_from_eint(rho_[c], e_int(c), gas);
            tot += rho_[c] * (z ? (*z)(s) : s);
        }
        return tot * mesh_.cell_volume();
    }

private:
    Mesh mesh_;
    double epsilon_ = 1.0;
    std::vector<double> rho_;
    std::array<std::vector<double>, 3> m_;
    std::vector<double> E_;
};

// A time-ordered sequence of snapshots on one mesh.
struct Trajectory {
    std::vector<FieldState> snapshots;
    bool aborted = false;          // positivity loss mid-run
    std::string abort_reason;

    const Mesh& mesh() const { return snapshots.front().mesh(); }
    double epsilon() const { return snapshots.front().epsilon(); }
    double t_begin() const { return snapshots.front().time; }
    double t_end() const { return snapshots.back().time; }
    std::size_t size() const { return snapshots.size(); }

    // Time reversal (t -> T - t together with m -> -m), which maps solution
    // candidates to solution candidates of the reversed dynamics.
    Trajectory reversed() const {
        Trajectory r;
        r.aborted = aborted;
        const double t0 = t_begin(), t1 = t_end();
        for (auto it = snapshots.rbegin(); it != snapshots.rend(); ++it) {
            FieldState s = *it;
            s.time = t0 + (t1 - s.time);
            for (int d = 0; d < 3; ++d)
                for (double& v : s.m(d)) v = -v;
            r.snapshots.push_back(std::move(s));
        }
        return r;
    }
};

}  // namespace stratlab
