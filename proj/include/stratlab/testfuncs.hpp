// Smooth space-time test functions with closed-form antiderivatives: tensor
// products of trigonometric modes, polynomials in z, and cosine/polynomial
// time factors.  Residual quadrature pairs piecewise-constant-in-space,
// piecewise-linear-in-time grid fields against exact per-cell integrals, so
// exact solutions representable on the grid sit at the floating-point floor.
#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "stratlab/mesh.hpp"

namespace stratlab {

struct Factor1d {
    enum class Kind { Trig, Poly } kind = Kind::Trig;
    // Trig: amp * cos(2 pi k x + phase); Poly: sum coef[j] x^j on [0,1].
    double amp = 1.0;
    int k = 0;
    double phase = 0.0;
    std::vector<double> coef;

    static Factor1d constant() { return Factor1d{Kind::Trig, 1.0, 0, 0.0, {}}; }
    static Factor1d cosine(int k, double phase = 0.0) {
        return Factor1d{Kind::Trig, 1.0, k, phase, {}};
    }
    static Factor1d sine(int k) { return cosine(k, -M_PI / 2.0); }
    static Factor1d poly(std::vector<double> c) {
        return Factor1d{Kind::Poly, 1.0, 0, 0.0, std::move(c)};
    }

    double value(double x) const {
        if (kind == Kind::Trig) return amp * std::cos(2.0 * M_PI * k * x + phase);
        double p = 0.0;
        for (std::size_t j = coef.size(); j-- > 0;) p = p * x + coef[j];
        return p;
    }
    double derivative(double x) const {
        if (kind == Kind::Trig) return -amp * 2.0 * M_PI * k * std::sin(2.0 * M_PI * k * x + phase);
        double p = 0.0;
        for (std::size_t j = coef.size(); j-- > 1;) p = p * x + coef[j] * double(j);
        return p;
    }
    double integral(double a, double b) const {
        if (kind == Kind::Trig) {
            if (k == 0) return amp * std::cos(phase) * (b - a);
            const double w = 2.0 * M_PI * k;
            return amp / w * (std::sin(w * b + phase) - std::sin(w * a + phase));
        }
        double pa = 0.0, pb = 0.0;
        for (std::size_t j = coef.size(); j-- > 0;) {
            pa = pa * a + coef[j] / double(j + 1);
            pb = pb * b + coef[j] / double(j + 1);
        }
        return pb * b - pa * a;
    }
    double sup_abs() const {
        if (kind == Kind::Trig) return std::abs(amp);
        double m = 0.0;
        for (int i = 0; i <= 256; ++i) m = std::max(m, std::abs(value(i / 256.0)));
        return m;
    }
    double sup_abs_derivative() const {
        if (kind == Kind::Trig) return std::abs(amp) * 2.0 * M_PI * k;
        double m = 0.0;
        for (int i = 0; i <= 256; ++i) m = std::max(m, std::abs(derivative(i / 256.0)));
        return m;
    }
};

// Multiply a polynomial factor by w(z) = 4 z (1 - z) (used to enforce a
// vanishing normal trace at the z-walls on vector components).
inline Factor1d wall_tangent(const Factor1d& f) {
    std::vector<double> c = f.kind == Factor1d::Kind::Poly
                                ? f.coef
                                : std::vector<double>{f.amp * std::cos(f.phase)};
    if (f.kind == Factor1d::Kind::Trig && f.k != 0)
        throw std::invalid_argument("wall_tangent: expected a polynomial or constant z-factor");
    std::vector<double> out(c.size() + 2, 0.0);
    for (std::size_t j = 0; j < c.size(); ++j) {
        out[j + 1] += 4.0 * c[j];
        out[j + 2] -= 4.0 * c[j];
    }
    return Factor1d::poly(std::move(out));
}

struct TimeFactor {
    enum class Kind { Cosine, Poly } kind = Kind::Cosine;
    double omega = 0.0, phase = 0.0;       // cos(omega t + phase)
    std::vector<double> coef;              // or polynomial in t

    static TimeFactor cosine(double omega, double phase = 0.0) {
        return TimeFactor{Kind::Cosine, omega, phase, {}};
    }
    static TimeFactor one() { return cosine(0.0); }
    static TimeFactor poly(std::vector<double> c) {
        return TimeFactor{Kind::Poly, 0.0, 0.0, std::move(c)};
    }

    double value(double t) const {
        if (kind == Kind::Cosine) return std::cos(omega * t + phase);
        double p = 0.0;
        for (std::size_t j = coef.size(); j-- > 0;) p = p * t + coef[j];
        return p;
    }
    double derivative(double t) const {
        if (kind == Kind::Cosine) return -omega * std::sin(omega * t + phase);
        double p = 0.0;
        for (std::size_t j = coef.size(); j-- > 1;) p = p * t + coef[j] * double(j);
        return p;
    }
    double integral(double a, double b) const {  // int T dt
        if (kind == Kind::Cosine) {
            if (omega == 0.0) return std::cos(phase) * (b - a);
            return (std::sin(omega * b + phase) - std::sin(omega * a + phase)) / omega;
        }
        double pa = 0.0, pb = 0.0;
        for (std::size_t j = coef.size(); j-- > 0;) {
            pa = pa * a + coef[j] / double(j + 1);
            pb = pb * b + coef[j] / double(j + 1);
        }
        return pb * b - pa * a;
    }
    double moment_integral(double a, double b) const {  // int t T(t) dt
        if (kind == Kind::Cosine) {
            if (omega == 0.0) return std::cos(phase) * 0.5 * (b * b - a * a);
            const double w = omega;
            auto anti = [&](double t) {
                return std::cos(w * t + phase) / (w * w) + t * std::sin(w * t + phase) / w;
            };
            return anti(b) - anti(a);
        }
        double pa = 0.0, pb = 0.0;
        for (std::size_t j = coef.size(); j-- > 0;) {
            pa = pa * a + coef[j] / double(j + 2);
            pb = pb * b + coef[j] / double(j + 2);
        }
        return pb * b * b - pa * a * a;
    }
    double sup_abs(double t_end) const {
        double m = 0.0;
        for (int i = 0; i <= 256; ++i) m = std::max(m, std::abs(value(t_end * i / 256.0)));
        return m;
    }
    double sup_abs_derivative(double t_end) const {
        double m = 0.0;
        for (int i = 0; i <= 256; ++i) m = std::max(m, std::abs(derivative(t_end * i / 256.0)));
        return m;
    }
};

// One product term coef * T(t) * prod_d F_d(x_d); `component` selects the unit
// direction for vector-valued functions (-1 for scalar).
struct ProductTerm {
    double coef = 1.0;
    TimeFactor time;
    std::vector<Factor1d> space;  // one factor per logical axis
    int component = -1;
};

struct TestFunction {
    std::string id;
    std::vector<ProductTerm> terms;
    bool vector_valued = false;
    bool nonnegative = false;  // entropy-inequality class

    double value(double t, const std::vector<double>& x, int component = -1) const {
        double v = 0.0;
        for (const auto& term : terms) {
            if (term.component != component) continue;
            double p = term.coef * term.time.value(t);
            for (std::size_t d = 0; d < term.space.size(); ++d) p *= term.space[d].value(x[d]);
            v += p;
        }
        return v;
    }

    // Upper bound for the C^1 norm over [0,T] x domain (normalization only).
    double c1_norm(double t_end) const {
        double total = 0.0;
        for (const auto& term : terms) {
            const double ts = term.time.sup_abs(t_end);
            const double tds = term.time.sup_abs_derivative(t_end);
            double prod = 1.0, dsum = 0.0;
            for (const auto& f : term.space) prod *= f.sup_abs();
            for (std::size_t d = 0; d < term.space.size(); ++d) {
                double g = f_sup_deriv(term.space, d);
                dsum += g;
            }
            total += std::abs(term.coef) * (ts * prod + tds * prod + ts * dsum);
        }
        return total;
    }

private:
    static double f_sup_deriv(const std::vector<Factor1d>& fs, std::size_t d) {
        double p = 1.0;
        for (std::size_t e = 0; e < fs.size(); ++e)
            p *= (e == d) ? fs[e].sup_abs_derivative() : fs[e].sup_abs();
        return p;
    }
};

struct BasisSpec {
    int n_time = 3;
    int n_horizontal = 8;
    int n_vertical = 4;
    int n_random = 8;
    unsigned seed = 20240901;
};

namespace detail {

inline std::vector<Factor1d> horizontal_modes(int n) {
    std::vector<Factor1d> out;
    out.push_back(Factor1d::constant());
    for (int k = 1; static_cast<int>(out.size()) < n; ++k) {
        out.push_back(Factor1d::cosine(k));
        if (static_cast<int>(out.size()) < n) out.push_back(Factor1d::sine(k));
    }
    return out;
}

inline std::vector<Factor1d> vertical_modes(int n) {
    // shifted Legendre polynomials on [0,1]
    static const std::vector<std::vector<double>> legendre = {
        {1.0}, {-1.0, 2.0}, {1.0, -6.0, 6.0}, {-1.0, 12.0, -30.0, 20.0}};
    std::vector<Factor1d> out;
    for (int j = 0; j < n && j < 4; ++j) out.push_back(Factor1d::poly(legendre[j]));
    return out;
}

// Time modes vanishing at t = T (compact support in [0,T)).
inline std::vector<TimeFactor> time_modes(int n, double t_end) {
    std::vector<TimeFactor> out;
    for (int j = 0; j < n; ++j)
        out.push_back(TimeFactor::cosine((2 * j + 1) * M_PI / (2.0 * t_end)));
    return out;
}

inline Factor1d random_trig(std::mt19937& rng) {
    std::uniform_int_distribution<int> kd(1, 3);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * M_PI);
    return Factor1d::cosine(kd(rng), ph(rng));
}

inline Factor1d random_poly(std::mt19937& rng) {
    std::uniform_real_distribution<double> cd(-1.0, 1.0);
    return Factor1d::poly({cd(rng), cd(rng), cd(rng), cd(rng)});
}

}  // namespace detail

// Domain descriptor for basis construction: which axes are periodic (trig
// modes) versus the wall-bounded vertical axis (polynomials).
struct BasisDomain {
    int ndim = 2;
    bool vertical_periodic = false;  // fully periodic test torus
    double t_end = 1.0;

    static BasisDomain of(const Mesh& mesh, double t_end) {
        return {mesh.ndim(), mesh.vertical_periodic(), t_end};
    }
};

inline std::vector<TestFunction> make_scalar_basis(const BasisDomain& dom,
                                                   const BasisSpec& spec = {}) {
    std::vector<TestFunction> basis;
    const auto tmodes = detail::time_modes(spec.n_time, dom.t_end);
    const auto hmodes = detail::horizontal_modes(spec.n_horizontal);
    const auto vmodes = dom.vertical_periodic
                            ? detail::horizontal_modes(spec.n_vertical)
                            : detail::vertical_modes(spec.n_vertical);
    int id = 0;
    for (std::size_t it = 0; it < tmodes.size(); ++it)
        for (std::size_t ih = 0; ih < hmodes.size(); ++ih)
            for (std::size_t iv = 0; iv < vmodes.size(); ++iv) {
                ProductTerm term;
                term.time = tmodes[it];
                term.space.assign(std::size_t(dom.ndim), Factor1d::constant());
                term.space[0] = hmodes[ih];
                if (dom.ndim == 3) term.space[1] = hmodes[(ih + iv) % hmodes.size()];
                term.space[dom.ndim - 1] = vmodes[iv];
                TestFunction f;
                f.id = "s" + std::to_string(id++);
                f.terms.push_back(std::move(term));
                basis.push_back(std::move(f));
            }
    std::mt19937 rng(spec.seed);
    for (int r = 0; r < spec.n_random; ++r) {
        ProductTerm term;
        term.time = tmodes[r % tmodes.size()];
        term.space.clear();
        for (int d = 0; d < dom.ndim; ++d) {
            const bool periodic_axis = (d < dom.ndim - 1) || dom.vertical_periodic;
            term.space.push_back(periodic_axis ? detail::random_trig(rng)
                                               : detail::random_poly(rng));
        }
        TestFunction f;
        f.id = "rnd" + std::to_string(r);
        f.terms.push_back(std::move(term));
        basis.push_back(std::move(f));
    }
    return basis;
}

// Vector basis: the scalar set with components assigned round-robin; vertical
// components get the 4z(1-z) factor when `tangent` (phi.n = 0 at the walls).
inline std::vector<TestFunction> make_vector_basis(const BasisDomain& dom, bool tangent,
                                                   const BasisSpec& spec = {}) {
    std::vector<TestFunction> scalars = make_scalar_basis(dom, spec);
    std::vector<TestFunction> basis;
    int id = 0;
    for (std::size_t i = 0; i < scalars.size(); ++i) {
        TestFunction f = std::move(scalars[i]);
        const int comp = int(i % std::size_t(dom.ndim));
        f.vector_valued = true;
        f.id = "v" + std::to_string(id++);
        for (auto& term : f.terms) {
            term.component = comp;
            if (comp == dom.ndim - 1 && tangent && !dom.vertical_periodic)
                term.space[dom.ndim - 1] = wall_tangent(term.space[dom.ndim - 1]);
        }
        basis.push_back(std::move(f));
    }
    return basis;
}

// Nonnegative test functions for the entropy inequality: T(t) (1 + a Xi(x))
// with |a Xi| <= 0.9 and T = cos(pi t / 2T) >= 0 on [0, T].
inline std::vector<TestFunction> make_nonnegative_basis(const BasisDomain& dom,
                                                        const BasisSpec& spec = {}) {
    std::vector<TestFunction> shapes = make_scalar_basis(dom, spec);
    std::vector<TestFunction> basis;
    const TimeFactor thalf = TimeFactor::cosine(M_PI / (2.0 * dom.t_end));
    int id = 0;
    for (auto& s : shapes) {
        TestFunction f;
        f.id = "nn" + std::to_string(id++);
        f.nonnegative = true;
        ProductTerm base;
        base.time = thalf;
        base.space.assign(std::size_t(dom.ndim), Factor1d::constant());
        f.terms.push_back(base);
        ProductTerm mod = s.terms.front();
        mod.time = thalf;
        double sup = 1.0;
        for (const auto& fac : mod.space) sup *= fac.sup_abs();
        mod.coef = 0.9 / std::max(sup, 1e-30);
        f.terms.push_back(std::move(mod));
        basis.push_back(std::move(f));
    }
    return basis;
}

// C^1([0,T]) time factors for the measure-valued identities (no vanishing
// requirement at t = T).
inline std::vector<TimeFactor> mv_time_factors(double t_end) {
    return {TimeFactor::one(), TimeFactor::poly({0.0, 1.0 / t_end}),
            TimeFactor::cosine(M_PI / t_end)};
}

}  // namespace stratlab
