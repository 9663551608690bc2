// Isothermal hydrostatic equilibrium rho_s(z) = c0 * exp(-z/Theta_bar) on the
// slab, normalized by total mass.
#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stratlab/mesh.hpp"
#include "stratlab/thermo.hpp"

namespace stratlab {

// Gradient-type external potential Phi(z).  The canonical case Phi(z) = -z
// carries an analytic tag so downstream code can use exact gradients.
struct PotentialField {
    std::function<double(double)> phi;       // Phi(z)
    std::function<double(double)> dphi_dz;   // Phi'(z)
    bool is_canonical_minus_z = false;
    bool is_zero = false;

    static PotentialField minus_z() {
        PotentialField p;
        p.phi = [](double z) { return -z; };
        p.dphi_dz = [](double) { return -1.0; };
        p.is_canonical_minus_z = true;
        return p;
    }
    static PotentialField zero() {
        PotentialField p;
        p.phi = [](double) { return 0.0; };
        p.dphi_dz = [](double) { return 0.0; };
        p.is_zero = true;
        return p;
    }
};

struct StaticState {
    double theta_bar = 1.0;
    double c0 = 1.0;
    double total_mass = 1.0;
    std::vector<double> rho_s;   // sampled at vertical cell centers
    std::vector<double> z;       // the sample points
    double rho_at(double zv) const { return c0 * std::exp(-zv / theta_bar); }
    double min_rho() const { return rho_at(1.0); }
    double max_rho() const { return rho_at(0.0); }
};

// c0 = M / (|T^2| * Theta_bar * (1 - exp(-1/Theta_bar))), from integrating the
// exponential profile over the unit-height slab.
inline double static_normalization(double theta_bar, double total_mass,
                                   double horizontal_area = 1.0) {
    if (!(theta_bar > 0.0) || !(total_mass > 0.0) || !(horizontal_area > 0.0))
        throw std::invalid_argument("static_normalization: inputs must be positive");
    return total_mass / (horizontal_area * theta_bar * (-std::expm1(-1.0 / theta_bar)));
}

inline StaticState build_static(double theta_bar, double total_mass, const Mesh& mesh) {
    StaticState s;
    s.theta_bar = theta_bar;
    s.total_mass = total_mass;
    s.c0 = static_normalization(theta_bar, total_mass);
    const int nz = mesh.nz();
    s.rho_s.resize(nz);
    s.z.resize(nz);
    for (int k = 0; k < nz; ++k) {
        s.z[k] = mesh.zc(k);
        s.rho_s[k] = s.rho_at(s.z[k]);
    }
    return s;
}

// Discrete residual of grad(rho_s * Theta_bar) - rho_s * grad(Phi) per
// vertical sample.  With analytic gradients the exponential profile balances
// exactly; with centered differences the residual is O(h^2) in the interior.
// Boundary samples are skipped in the centered mode (set to zero).
inline std::vector<double> hydrostatic_residual(const StaticState& s, const PotentialField& pot,
                                                bool centered_differences = false) {
    const int nz = static_cast<int>(s.rho_s.size());
    std::vector<double> res(nz, 0.0);
    if (!centered_differences) {
        for (int k = 0; k < nz; ++k) {
            const double drho_dz = -s.rho_s[k] / s.theta_bar;
            res[k] = s.theta_bar * drho_dz - s.rho_s[k] * pot.dphi_dz(s.z[k]);
        }
        return res;
    }
    for (int k = 1; k + 1 < nz; ++k) {
        const double h = s.z[k + 1] - s.z[k];
        const double drho_dz = (s.rho_s[k + 1] - s.rho_s[k - 1]) / (2.0 * h);
        res[k] = s.theta_bar * drho_dz - s.rho_s[k] * pot.dphi_dz(s.z[k]);
    }
    return res;
}

// Same residual for an arbitrary sampled profile (used to show that perturbed
// profiles are detected); centered differences in the interior.
inline std::vector<double> hydrostatic_residual_profile(const std::vector<double>& rho,
                                                        const std::vector<double>& z,
                                                        double theta_bar,
                                                        const PotentialField& pot) {
    if (rho.size() != z.size())
        throw std::invalid_argument("hydrostatic_residual_profile: mismatched grids");
    const int nz = static_cast<int>(rho.size());
    std::vector<double> res(nz, 0.0);
    for (int k = 1; k + 1 < nz; ++k) {
        const double h = z[k + 1] - z[k];
        const double drho_dz = (rho[k + 1] - rho[k - 1]) / (2.0 * h);
        res[k] = theta_bar * drho_dz - rho[k] * pot.dphi_dz(z[k]);
    }
    return res;
}

inline void export_profile_csv(const StaticState& s, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_profile_csv: cannot open " + path);
    out << "# schema-version: 1 (z, rho_s)\n";
    out << "z,rho_s\n";
    out.precision(17);
    for (std::size_t k = 0; k < s.rho_s.size(); ++k)
        out << s.z[k] << "," << s.rho_s[k] << "\n";
}

}  // namespace stratlab
