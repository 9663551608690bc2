#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "stratlab/thermo.hpp"

using namespace stratlab;

TEST_CASE("pressure follows the perfect-gas law") {
    REQUIRE(pressure(1.0, 1.0) == 1.0);
    REQUIRE(pressure(2.0, 3.0) == 6.0);
    REQUIRE(pressure(0.0, 5.0) == 0.0);
    REQUIRE_THROWS_AS(pressure(-1.0, 1.0), std::domain_error);
    REQUIRE_THROWS_AS(pressure(1.0, 0.0), std::domain_error);
}

TEST_CASE("internal energy is c_v rho theta") {
    REQUIRE(internal_energy(1.0, 1.0, GasParams(1.5)) == 1.5);
    REQUIRE(internal_energy(0.0, 1.0, GasParams(1.5)) == 0.0);
    // direct formula evaluation oracle
    const double oracle = 2.5 * 2.0 * 0.5;
    REQUIRE(internal_energy(2.0, 0.5, GasParams(2.5)) == Catch::Approx(oracle).epsilon(1e-15));
}

TEST_CASE("entropy is log(theta^c_v / rho)") {
    REQUIRE(entropy(1.0, 1.0, GasParams(1.5)) == 0.0);
    REQUIRE(entropy(1.0, 1.0, GasParams(0.7)) == 0.0);
    REQUIRE(entropy(2.0, 1.0, GasParams(1.5)) == Catch::Approx(-std::log(2.0)).epsilon(1e-14));
    REQUIRE(entropy(1.0, std::exp(1.0), GasParams(1.0)) == Catch::Approx(1.0).epsilon(1e-14));
    REQUIRE_THROWS_AS(entropy(0.0, 1.0, GasParams(1.5)), std::domain_error);
}

TEST_CASE("closed forms agree with high-precision evaluation on random states") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> d(0.1, 10.0);
    const GasParams gas(1.5);
    for (int n = 0; n < 1000; ++n) {
        const double rho = d(rng), theta = d(rng);
        REQUIRE(pressure(rho, theta) == Catch::Approx(rho * theta).epsilon(1e-14));
        REQUIRE(internal_energy(rho, theta, gas) ==
                Catch::Approx(gas.c_v * rho * theta).epsilon(1e-14));
        REQUIRE(entropy(rho, theta, gas) ==
                Catch::Approx(gas.c_v * std::log(theta) - std::log(rho)).epsilon(1e-14));
    }
}

TEST_CASE("Gibbs residual vanishes with analytic partial derivatives") {
    // exact closure identity: theta ds - de - p d(1/rho) with closed-form partials
    const GasParams gas(1.5);
    const double rho = 1.0, theta = 1.0;
    const double p = pressure(rho, theta);
    const double ds_drho = -1.0 / rho;
    const double de_drho = 0.0;
    const double dv_drho = -1.0 / (rho * rho);
    REQUIRE(theta * ds_drho - de_drho - p * dv_drho == 0.0);
    const double ds_dtheta = gas.c_v / theta;
    const double de_dtheta = gas.c_v;
    REQUIRE(theta * ds_dtheta - de_dtheta == 0.0);
}

TEST_CASE("Gibbs residual is small and second order in the step") {
    const GasParams gas(1.5);
    REQUIRE(gibbs_residual(1.0, 1.0, gas, 1e-4) < 1e-8);
    REQUIRE(gibbs_residual(2.0, 3.0, gas, 1e-4) < 1e-8);

    std::mt19937 rng(11);
    std::uniform_real_distribution<double> d(0.2, 5.0);
    double order_sum = 0.0;
    int counted = 0;
    for (int n = 0; n < 100; ++n) {
        const double rho = d(rng), theta = d(rng);
        const double r1 = gibbs_residual(rho, theta, gas, 1e-2);
        const double r2 = gibbs_residual(rho, theta, gas, 0.5e-2);
        if (r1 > 1e-12 && r2 > 1e-12) {
            order_sum += std::log2(r1 / r2);
            ++counted;
        }
    }
    REQUIRE(counted > 50);
    const double mean_order = order_sum / counted;
    REQUIRE(mean_order > 1.8);
    REQUIRE(mean_order < 2.2);
}

TEST_CASE("conservative/primitive conversions invert each other") {
    const GasParams gas(1.5);

    PrimitiveState p;
    p.rho = 1.0;
    p.theta = 1.0;
    p.u = {0.0, 0.0, 0.0};
    ConservedState c = prim_to_cons(p, gas);
    REQUIRE(c.rho == 1.0);
    REQUIRE(c.m[0] == 0.0);
    REQUIRE(c.E == gas.c_v);

    // algebraic inversion oracle
    ConservedState c2;
    c2.rho = 2.0;
    c2.m = {2.0, 0.0, 0.0};
    c2.E = 2.0 * gas.c_v * 1.0 + 1.0;
    PrimitiveState p2 = cons_to_prim(c2, gas);
    REQUIRE(p2.rho == 2.0);
    REQUIRE(p2.theta == Catch::Approx(1.0).epsilon(1e-14));
    REQUIRE(p2.u[0] == Catch::Approx(1.0).epsilon(1e-14));

    std::mt19937 rng(3);
    std::uniform_real_distribution<double> d(0.1, 4.0);
    std::uniform_real_distribution<double> v(-2.0, 2.0);
    for (int n = 0; n < 500; ++n) {
        PrimitiveState q;
        q.rho = d(rng);
        q.theta = d(rng);
        q.u = {v(rng), v(rng), v(rng)};
        PrimitiveState back = cons_to_prim(prim_to_cons(q, gas), gas);
        REQUIRE(back.rho == Catch::Approx(q.rho).epsilon(1e-12));
        REQUIRE(back.theta == Catch::Approx(q.theta).epsilon(1e-12));
        for (int dcomp = 0; dcomp < 3; ++dcomp)
            REQUIRE(back.u[dcomp] == Catch::Approx(q.u[dcomp]).margin(1e-12));
    }

    ConservedState bad;
    bad.rho = 1.0;
    bad.m = {10.0, 0.0, 0.0};
    bad.E = 1.0;  // kinetic alone is 50
    REQUIRE_THROWS_AS(cons_to_prim(bad, gas), std::domain_error);

    ConservedState vac;
    vac.rho = 0.0;
    PrimitiveState pv = cons_to_prim(vac, gas);
    REQUIRE(pv.vacuum());
    REQUIRE(pv.rho == 0.0);
}

TEST_CASE("entropy cutoffs are monotone, concave, and bounded") {
    CutoffSpec z(0.0, 1.0);
    REQUIRE(z(-1.0) == -1.0);                 // identity below the blend zone
    REQUIRE(z(5.0) == z.z_inf());             // saturation
    REQUIRE(z.z_inf() == 0.5);

    // grid scan oracle: monotone, concave, bounded on 1000 samples
    double prev = z(-3.0);
    double prev_slope = 0.0;
    bool first = true;
    for (int i = 1; i <= 1000; ++i) {
        const double s = -3.0 + 6.0 * i / 1000.0;
        const double v = z(s);
        REQUIRE(v >= prev - 1e-12);
        REQUIRE(v <= z.z_inf() + 1e-12);
        const double slope = (v - prev) * 1000.0 / 6.0;
        if (!first) REQUIRE(slope <= prev_slope + 1e-9);
        prev = v;
        prev_slope = slope;
        first = false;
    }

    // C^2 join: derivative continuous at both ends of the blend
    REQUIRE(z.derivative(0.0) == Catch::Approx(1.0));
    REQUIRE(z.derivative(1.0) == Catch::Approx(0.0).margin(1e-12));

    // negative-tail variant: zero above, negative below
    CutoffSpec neg(0.0, 1.0, true);
    REQUIRE(neg(2.0) == 0.0);
    REQUIRE(neg(-1.0) < 0.0);
    REQUIRE(neg.z_inf() == 0.0);
}
