#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "delaunay/jacobi.hpp"
#include "support.hpp"

using namespace delaunay;

TEST_CASE("phi1: zero at the max phase, periodic, vanishes at ubar") {
    auto orbit = solve_orbit(4, 0.5);
    auto f1 = phi1(orbit);
    REQUIRE(std::abs(f1.value(0.0)) < 1e-12);
    for (double t : linspace(0.0, orbit.T, 33))
        REQUIRE(std::abs(f1.value(t + orbit.T) - f1.value(t)) < 1e-9);
    REQUIRE(f1.growth == GrowthClass::periodic);

    auto eq = solve_orbit(4, equilibrium_ubar(4));
    auto f1eq = phi1(eq);
    for (double t : {0.0, 1.0, 5.0}) REQUIRE(f1eq.value(t) == 0.0);
}

TEST_CASE("phi2: turning-point values and the 1/eps identity") {
    const double eps = 0.5;
    auto orbit = solve_orbit(4, eps);
    auto f2 = phi2(orbit);

    // max-phase value: phi2(0) = u_max'(eps)/u_max; for n = 4 that is
    // -eps/(1 - eps^2) from u_max = sqrt(1 - eps^2)
    const double expect0 = -eps / (1.0 - eps * eps);
    REQUIRE(f2.value(0.0) == Catch::Approx(expect0).epsilon(1e-9));

    // the minimum is also a critical point, so phi2(T/2) = 1/eps exactly
    REQUIRE(f2.value(orbit.T / 2) == Catch::Approx(1.0 / eps).epsilon(1e-9));
    REQUIRE(f2.growth == GrowthClass::linear);
}

TEST_CASE("phi2: finite-difference oracle across a window") {
    const double eps = 0.45, h = 1e-5;
    auto orbit = solve_orbit(4, eps);
    auto op = solve_orbit(4, eps + h);
    auto om = solve_orbit(4, eps - h);
    auto f2 = phi2(orbit);
    for (double t : linspace(0.0, 2.0 * orbit.T, 41)) {
        const double fd = (op.u(t) / orbit.u(t) - om.u(t) / orbit.u(t)) / (2.0 * h);
        REQUIRE(f2.value(t) == Catch::Approx(fd).margin(1e-4).epsilon(1e-4));
    }
}

TEST_CASE("phi2: equilibrium branch closed form") {
    auto eq = solve_orbit(5, equilibrium_ubar(5));
    auto f2 = phi2(eq);
    REQUIRE(f2.value(0.0) == Catch::Approx(1.0 / equilibrium_ubar(5)).epsilon(1e-12));
    REQUIRE(f2.growth == GrowthClass::periodic);
    // solves the constant-coefficient mode-0 equation
    REQUIRE(jacobi_residual_sup(f2, 0.0, 2.0 * eq.T) < 1e-10);
}

TEST_CASE("drift relation: phi2(t+T) - phi2(t) = -phi1(t) T'(eps)") {
    for (double eps : {0.3, 0.5, 0.62}) {
        auto orbit = solve_orbit(4, eps);
        auto f2 = phi2(orbit);
        const double Tp_field = phi2_drift_coefficient(f2);
        const double Tp_fd = period_T_derivative_fd(4, eps);
        REQUIRE(Tp_field == Catch::Approx(Tp_fd).epsilon(1e-4));
    }
}

TEST_CASE("phi3/phi4: structure and exactness") {
    auto orbit = solve_orbit(4, 0.5);
    auto f3 = phi3(orbit), f4 = phi4(orbit);

    // e^{-t} phi3 is T-periodic
    for (double t : linspace(0.0, orbit.T, 17)) {
        const double g1 = std::exp(-t) * f3.value(t);
        const double g2 = std::exp(-(t + orbit.T)) * f3.value(t + orbit.T);
        REQUIRE(std::abs(g1 - g2) < 1e-9);
    }

    REQUIRE(jacobi_residual_sup(f3, 0.0, 2.0 * orbit.T) < 1e-7);
    REQUIRE(jacobi_residual_sup(f4, 0.0, 2.0 * orbit.T) < 1e-7);
    REQUIRE(f3.growth == GrowthClass::exp_plus);
    REQUIRE(f4.growth == GrowthClass::exp_minus);

    // at ubar: phi3 = ((n-2)/2) e^t exactly
    auto eq = solve_orbit(4, equilibrium_ubar(4));
    auto f3eq = phi3(eq);
    for (double t : {0.0, 0.7, 2.0})
        REQUIRE(f3eq.value(t) == Catch::Approx(std::exp(t)).epsilon(1e-13));
}

TEST_CASE("mode-0 residuals of phi1 and phi2") {
    for (int n : {3, 5}) {
        auto orbit = solve_orbit(n, 0.55 * equilibrium_ubar(n));
        REQUIRE(jacobi_residual_sup(phi1(orbit), 0.0, 2.0 * orbit.T) < 1e-7);
        REQUIRE(jacobi_residual_sup(phi2(orbit), 0.0, 2.0 * orbit.T) < 1e-7);
    }
}

TEST_CASE("weighted Wronskian: Abel constancy and antisymmetry") {
    auto orbit = solve_orbit(4, 0.5);
    auto f1 = phi1(orbit);
    auto f2 = phi2(orbit);

    auto w12 = wronskian_pairing(f1, f2, 0.0, 2.0 * orbit.T);
    auto [mean12, dev12] = constancy(w12);
    REQUIRE(std::abs(mean12) > 1e-6);              // nonzero for eps < ubar
    REQUIRE(dev12 / std::abs(mean12) < 1e-8);      // constant in t

    auto w11 = wronskian_pairing(f1, f1, 0.0, orbit.T);
    for (double v : w11.values) REQUIRE(std::abs(v) < 1e-14);

    auto w34 = wronskian_pairing(phi3(orbit), phi4(orbit), 0.0, 2.0 * orbit.T);
    auto [mean34, dev34] = constancy(w34);
    REQUIRE(std::abs(mean34) > 1e-6);
    REQUIRE(dev34 / std::abs(mean34) < 1e-8);

    REQUIRE_THROWS_AS(wronskian_pairing(f1, phi3(orbit), 0.0, orbit.T),
                      validation_error);
}

TEST_CASE("deficiency extraction: exact combinations") {
    auto orbit = solve_orbit(4, 0.5);
    auto f1 = phi1(orbit);
    auto f2 = phi2(orbit);
    const double lo = 5.0 * orbit.T, hi = 9.0 * orbit.T;
    const std::size_t m = static_cast<std::size_t>(64.0 * (hi - lo) / orbit.T);

    auto sample_combo = [&](double a, double b) {
        CylinderFunction w;
        w.coord = Coordinate::cylinder_t;
        w.grid = linspace(lo, hi, m);
        for (double t : w.grid) w.values.push_back(a * f1.value(t) + b * f2.value(t));
        return w;
    };

    auto fit1 = extract_deficiency_coefficients(sample_combo(1.0, 0.0), orbit);
    REQUIRE(fit1.a == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(fit1.b == Catch::Approx(0.0).margin(1e-8));

    auto fit2 = extract_deficiency_coefficients(sample_combo(2.0, -3.0), orbit);
    REQUIRE(fit2.a == Catch::Approx(2.0).margin(1e-8));
    REQUIRE(fit2.b == Catch::Approx(-3.0).margin(1e-8));

    // round trip on random coefficients in [-10, 10]^2
    for (int rep = 0; rep < 10; ++rep) {
        const double a = testcfg::uniform(-10, 10), b = testcfg::uniform(-10, 10);
        auto fit = extract_deficiency_coefficients(sample_combo(a, b), orbit);
        REQUIRE(fit.a == Catch::Approx(a).margin(1e-6));
        REQUIRE(fit.b == Catch::Approx(b).margin(1e-6));
        REQUIRE(fit.residual_norm < 1e-8);
    }
}

TEST_CASE("deficiency extraction: decaying contamination and error paths") {
    auto orbit = solve_orbit(4, 0.5);
    auto f2 = phi2(orbit, {.t_lo_periods = -1.0, .t_hi_periods = 10.0});
    const double lo = 5.0 * orbit.T, hi = 9.0 * orbit.T;
    CylinderFunction w;
    w.coord = Coordinate::cylinder_t;
    w.grid = linspace(lo, hi, 256);
    for (double t : w.grid)
        w.values.push_back(f2.value(t) +
                           std::exp(-t) * std::sin(2.0 * std::numbers::pi * t / orbit.T));
    auto fit = extract_deficiency_coefficients(w, orbit);
    REQUIRE(fit.a == Catch::Approx(0.0).margin(1e-5));
    REQUIRE(fit.b == Catch::Approx(1.0).margin(1e-5));

    // window shorter than two periods is refused
    CylinderFunction small;
    small.coord = Coordinate::cylinder_t;
    small.grid = linspace(0.0, 1.2 * orbit.T, 64);
    small.values.assign(64, 1.0);
    REQUIRE_THROWS_AS(extract_deficiency_coefficients(small, orbit), fit_error);
}

TEST_CASE("symplectic form: evaluation, antisymmetry, length mismatch") {
    DeficiencyCoefficients c1{{1.0, 1.0}, {0.0, 0.0}};
    DeficiencyCoefficients c2{{0.0, 0.0}, {1.0, 1.0}};
    REQUIRE(std::abs(symplectic_form(c1, c2)) == Catch::Approx(2.0));
    REQUIRE(symplectic_form(c1, c1) == 0.0);
    for (int rep = 0; rep < 10; ++rep) {
        DeficiencyCoefficients x{{testcfg::uniform(-5, 5), testcfg::uniform(-5, 5)},
                                 {testcfg::uniform(-5, 5), testcfg::uniform(-5, 5)}};
        DeficiencyCoefficients y{{testcfg::uniform(-5, 5), testcfg::uniform(-5, 5)},
                                 {testcfg::uniform(-5, 5), testcfg::uniform(-5, 5)}};
        REQUIRE(symplectic_form(x, y) == Catch::Approx(-symplectic_form(y, x)).margin(1e-14));
    }
    DeficiencyCoefficients c3{{1.0}, {0.0}};
    REQUIRE_THROWS_AS(symplectic_form(c1, c3), validation_error);
}

TEST_CASE("computed k=2 coefficient subspace is isotropic (Lagrangian image)") {
    // The bounded nullspace for the two-ended Delaunay metric is spanned by
    // phi1 and phi2. Expand each on both ends (end 2 carries the reflected
    // coordinate t2 = -t) and check the symplectic form vanishes on the span.
    auto orbit = solve_orbit(4, 0.5);
    auto f1 = phi1(orbit);
    auto f2 = phi2(orbit);
    const double lo = 5.0 * orbit.T, hi = 9.0 * orbit.T;
    auto grid = linspace(lo, hi, 320);

    auto coeffs_of = [&](const JacobiField& f) {
        CylinderFunction end1, end2;
        end1.grid = grid;
        end2.grid = grid;
        for (double t : grid) {
            end1.values.push_back(f.value(t));
            end2.values.push_back(f.value(-t));  // restriction to end 2 in t2
        }
        auto fit1 = extract_deficiency_coefficients(end1, orbit);
        auto fit2 = extract_deficiency_coefficients(end2, orbit);
        return DeficiencyCoefficients{{fit1.a, fit2.a}, {fit1.b, fit2.b}};
    };

    const auto c1 = coeffs_of(f1);
    const auto c2 = coeffs_of(f2);
    // phi1 is odd, phi2 even: expansions are (1,0 | -1,0) and (0,1 | 0,1)
    REQUIRE(c1.a[0] == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(c1.a[1] == Catch::Approx(-1.0).margin(1e-8));
    REQUIRE(c2.b[0] == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(c2.b[1] == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(std::abs(symplectic_form(c1, c2)) < 1e-10);
    REQUIRE(std::abs(symplectic_form(c1, c1)) < 1e-14);
}
