#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "stratlab/relative_energy.hpp"
#include "stratlab/solver.hpp"

using namespace stratlab;

TEST_CASE("ballistic free energy: direct formula and convexity") {
    const GasParams gas(1.5);
    // s(1,1) = 0, so H = c_v rho theta = 1.5
    REQUIRE(ballistic_free_energy(1.0, 1.0, 1.0, gas) == Catch::Approx(1.5).epsilon(1e-15));

    // convexity in rho at fixed theta = Theta (grid scan oracle)
    const double h = 1e-3;
    for (double rho = 0.3; rho < 3.0; rho += 0.1) {
        const double second = ballistic_free_energy(rho + h, 1.0, 1.0, gas) -
                              2.0 * ballistic_free_energy(rho, 1.0, 1.0, gas) +
                              ballistic_free_energy(rho - h, 1.0, 1.0, gas);
        REQUIRE(second > 0.0);
    }
    REQUIRE_THROWS_AS(ballistic_free_energy(0.0, 1.0, 1.0, gas), std::domain_error);
}

TEST_CASE("relative energy density vanishes exactly at the matching reference") {
    const GasParams gas(1.5);
    for (double eps : {1.0, 0.1, 0.01}) {
        const double r = 1.3, th = 0.8;
        const Vec3 u{0.4, -0.2, 0.1};
        const Vec3 m{r * u[0], r * u[1], r * u[2]};
        const double e_int = internal_energy(r, th, gas);
        const RelEnergyValue v = rel_energy_density(r, e_int, m, r, th, u, eps, nullptr, gas);
        REQUIRE(std::abs(v.total) < 1e-12 / (eps * eps));
        REQUIRE(v.kinetic == 0.0);
    }
}

TEST_CASE("kinetic term isolation: U perturbed by delta") {
    const GasParams gas(1.5);
    const double rho = 1.7, th = 1.1, delta = 0.3;
    const double e_int = internal_energy(rho, th, gas);
    const Vec3 m{0.0, 0.0, 0.0};
    const RelEnergyValue v =
        rel_energy_density(rho, e_int, m, rho, th, {delta, 0.0, 0.0}, 1.0, nullptr, gas);
    REQUIRE(v.kinetic == Catch::Approx(0.5 * rho * delta * delta).epsilon(1e-14));
    REQUIRE(std::abs(v.internal) < 1e-13);
}

TEST_CASE("closed-form oracle for a density-perturbed state") {
    const GasParams gas(1.5);
    // state (rho=1.1, theta=1, m=0) against (r=1, Theta=1, U=0), eps=1
    const double rho = 1.1;
    const double e_int = internal_energy(rho, 1.0, gas);
    // independent high-precision evaluation of the closed form:
    // E = E_int - Theta rho s(rho,theta) - dH(1,1)(rho-1) - H(1,1)
    const double s = 1.5 * std::log(1.0) - std::log(rho);
    const double h11 = 1.5;                    // c_v, since s(1,1) = 0
    const double dh11 = 1.0 * (1.5 + 1.0 - 0.0);
    const double oracle = e_int - rho * s - dh11 * (rho - 1.0) - h11;
    const RelEnergyValue v =
        rel_energy_density(rho, e_int, {0, 0, 0}, 1.0, 1.0, {0, 0, 0}, 1.0, nullptr, gas);
    REQUIRE(v.total == Catch::Approx(oracle).epsilon(1e-13));
    REQUIRE(v.total > 0.0);
}

TEST_CASE("nonnegativity on a grid scan, equality only at the reference") {
    const GasParams gas(1.5);
    const CutoffSpec z(10.0, 1.0);  // identity on the scanned s-range
    for (double rho = 0.4; rho <= 2.4; rho += 0.25)
        for (double th = 0.4; th <= 2.4; th += 0.25) {
            const double e_int = internal_energy(rho, th, gas);
            const RelEnergyValue v = rel_energy_density(rho, e_int, {0.3 * rho, 0, 0}, 1.0, 1.0,
                                                        {0, 0, 0}, 1.0, &z, gas);
            REQUIRE(v.total >= -1e-12);
            const bool matches = std::abs(rho - 1.0) < 1e-9 && std::abs(th - 1.0) < 1e-9;
            if (!matches) REQUIRE(v.total > 1e-4 * std::min(1.0, std::pow(rho - 1.0, 2) +
                                                                     std::pow(th - 1.0, 2)));
        }
}

TEST_CASE("Z = identity reproduces the un-truncated variant") {
    const GasParams gas(1.5);
    const CutoffSpec z(50.0, 1.0);  // blend zone far above any sampled s
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> d(0.3, 3.0);
    for (int n = 0; n < 200; ++n) {
        const double rho = d(rng), th = d(rng);
        const double e_int = internal_energy(rho, th, gas);
        const Vec3 m{d(rng), 0.0, d(rng)};
        const RelEnergyValue a =
            rel_energy_density(rho, e_int, m, 1.0, 1.0, {0, 0, 0}, 0.5, &z, gas);
        const RelEnergyValue b =
            rel_energy_density(rho, e_int, m, 1.0, 1.0, {0, 0, 0}, 0.5, nullptr, gas);
        REQUIRE(a.total == b.total);
    }
}

TEST_CASE("eps scaling: internal part scales exactly as 1/eps^2, kinetic is unchanged") {
    const GasParams gas(1.5);
    const double rho = 1.4, th = 0.9;
    const double e_int = internal_energy(rho, th, gas);
    const Vec3 m{0.7, 0.0, -0.2};
    const RelEnergyValue v1 =
        rel_energy_density(rho, e_int, m, 1.0, 1.0, {0.1, 0, 0}, 1.0, nullptr, gas);
    const RelEnergyValue v01 =
        rel_energy_density(rho, e_int, m, 1.0, 1.0, {0.1, 0, 0}, 0.1, nullptr, gas);
    REQUIRE(v01.kinetic == v1.kinetic);
    REQUIRE(v01.internal == Catch::Approx(100.0 * v1.internal).epsilon(1e-12));
}

TEST_CASE("essential/residual split is a partition of unity") {
    const GasParams gas(1.5);
    EssResSplit split;
    split.rho_lo = 0.5;
    split.rho_hi = 2.0;
    split.th_lo = 0.5;
    split.th_hi = 2.0;
    split.gas = gas;

    // inside K-tilde: residual part vanishes
    const double ei_in = internal_energy(1.0, 1.0, gas);
    const EssResValue in = ess_res_split(3.7, 1.0, ei_in, split);
    REQUIRE(in.ess == 3.7);
    REQUIRE(in.res == 0.0);

    // far outside: essential part vanishes
    const double ei_out = internal_energy(10.0, 10.0, gas);
    const EssResValue out = ess_res_split(3.7, 10.0, ei_out, split);
    REQUIRE(out.ess == 0.0);
    REQUIRE(out.res == 3.7);

    // partition of unity for random states
    std::mt19937 rng(19);
    std::uniform_real_distribution<double> d(0.05, 5.0);
    for (int n = 0; n < 500; ++n) {
        const double rho = d(rng), th = d(rng);
        const double g = d(rng);
        const EssResValue v = ess_res_split(g, rho, internal_energy(rho, th, gas), split);
        REQUIRE(v.ess + v.res == Catch::Approx(g).epsilon(1e-14));
        REQUIRE(v.ess >= -1e-15);
        REQUIRE(v.res >= -1e-15);
    }
}

TEST_CASE("coercivity: zero at the static state, positive ratio nearby and on scans") {
    const GasParams gas(1.5);
    const Mesh mesh = Mesh::slab2d(4, 16);
    const StaticState stat = build_static(1.0, 1.0, mesh);
    const EssResSplit split = EssResSplit::around_static(stat, gas);

    const double zs = 0.4;
    const double rho_s = stat.rho_at(zs);

    SECTION("exact equilibrium gives lhs = rhs = 0") {
        const CoercivityValue v = coercivity_check(
            rho_s, internal_energy(rho_s, stat.theta_bar, gas), {0, 0, 0}, rho_s,
            stat.theta_bar, 1.0, split, gas);
        REQUIRE(std::abs(v.lhs) < 1e-13);
        REQUIRE(std::abs(v.rhs) < 1e-13);
    }

    SECTION("small essential perturbations keep the ratio bounded below (Taylor oracle)") {
        for (double eps : {1.0, 0.1, 0.01}) {
            double prev_ratio = -1.0;
            for (double delta : {1e-1, 1e-2, 1e-3}) {
                const double rho = rho_s * (1.0 + eps * delta);
                const CoercivityValue v =
                    coercivity_check(rho, internal_energy(rho, stat.theta_bar, gas), {0, 0, 0},
                                     rho_s, stat.theta_bar, eps, split, gas);
                REQUIRE(v.ratio > 0.05);
                if (prev_ratio > 0.0) REQUIRE(v.ratio == Catch::Approx(prev_ratio).epsilon(0.5));
                prev_ratio = v.ratio;
            }
        }
    }

    SECTION("random-state scan has a strictly positive minimum ratio, stable in eps") {
        std::mt19937 rng(29);
        std::uniform_real_distribution<double> dr(0.1, 3.0);
        std::uniform_real_distribution<double> dt(0.1, 3.0);
        std::uniform_real_distribution<double> dm(-2.0, 2.0);
        double min_ratio[3] = {1e300, 1e300, 1e300};
        const double eps_list[3] = {1.0, 0.1, 0.01};
        for (int n = 0; n < 10000; ++n) {
            const double rho = dr(rng), th = dt(rng);
            const Vec3 m{dm(rng), dm(rng), 0.0};
            const double ei = internal_energy(rho, th, gas);
            for (int e = 0; e < 3; ++e) {
                const CoercivityValue v =
                    coercivity_check(rho, ei, m, rho_s, stat.theta_bar, eps_list[e], split, gas);
                if (v.rhs > 1e-12) min_ratio[e] = std::min(min_ratio[e], v.ratio);
            }
        }
        for (int e = 0; e < 3; ++e) REQUIRE(min_ratio[e] > 0.0);
        // structural constant: stable within a factor 2 across eps
        REQUIRE(min_ratio[0] / min_ratio[1] < 2.0);
        REQUIRE(min_ratio[1] / min_ratio[0] < 2.0);
        REQUIRE(min_ratio[1] / min_ratio[2] < 2.0);
        REQUIRE(min_ratio[2] / min_ratio[1] < 2.0);
    }
}

TEST_CASE("field-level relative energy of the static state against its reference") {
    const GasParams gas(1.5);
    const Mesh mesh = Mesh::slab2d(8, 32);
    const StaticState stat = build_static(1.0, 1.0, mesh);
    const ReferenceTriple ref = ReferenceTriple::static_reference(stat, mesh.ndim());
    const FieldState f = static_field(mesh, stat, gas);
    const RelEnergyReport rep = rel_energy_integral(f, ref, 1.0, nullptr, gas);
    REQUIRE(std::abs(rep.total) < 1e-12);
    REQUIRE(std::abs(rep.kinetic) < 1e-15);
    REQUIRE_FALSE(rep.vacuum_flagged);
    REQUIRE(rep.total == Catch::Approx(rep.kinetic + rep.internal).margin(1e-12));
}
