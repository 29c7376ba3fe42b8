#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "delaunay/pohozaev.hpp"
#include "support.hpp"

using namespace delaunay;
using std::numbers::pi;

namespace {

std::vector<double> random_unit_vector(int d) {
    std::vector<double> v(d);
    double nrm = 0;
    for (auto& x : v) { x = testcfg::uniform(-1, 1); }
    for (double x : v) nrm += x * x;
    nrm = std::sqrt(nrm);
    for (auto& x : v) x /= nrm;
    return v;
}

std::vector<std::vector<double>> sample_sphere_points(int d, int count) {
    std::vector<std::vector<double>> pts;
    while (static_cast<int>(pts.size()) < count) {
        auto q = random_unit_vector(d);
        if (q[d - 1] > -0.8) pts.push_back(q);  // stay away from the chart pole
    }
    return pts;
}

/// Givens rotation of R^{d} in the (a, b) plane.
std::vector<double> givens(int d, int a, int b, double angle) {
    std::vector<double> Q(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < d; ++i) Q[i * d + i] = 1.0;
    Q[a * d + a] = std::cos(angle);
    Q[b * d + b] = std::cos(angle);
    Q[a * d + b] = -std::sin(angle);
    Q[b * d + a] = std::sin(angle);
    return Q;
}

}  // namespace

TEST_CASE("sphere_area: known values") {
    REQUIRE(sphere_area(1) == Catch::Approx(2.0 * pi).epsilon(1e-14));
    REQUIRE(sphere_area(2) == Catch::Approx(4.0 * pi).epsilon(1e-14));
    REQUIRE(sphere_area(3) == Catch::Approx(2.0 * pi * pi).epsilon(1e-14));
}

TEST_CASE("tracefree_ricci: trace-free, isotropic, R(g) = n(n-1)") {
    for (int n : {3, 4, 5, 6}) {
        auto orbit = solve_orbit(n, 0.5 * equilibrium_ubar(n));
        for (double t : linspace(0.0, orbit.T, 9)) {
            auto sec = tracefree_ricci(orbit, t);
            REQUIRE(std::abs(sec.trace) < 1e-10);
            REQUIRE(sec.scalar == Catch::Approx(n * (n - 1.0)).margin(1e-8));
        }
    }
    // generic interior point: n = 4, eps = 0.5, t = 0.3
    auto orbit4 = solve_orbit(4, 0.5);
    REQUIRE(tracefree_ricci(orbit4, 0.3).scalar == Catch::Approx(12.0).margin(1e-8));
}

TEST_CASE("tracefree_ricci: cylinder and round-sphere limits") {
    // eps = ubar: constant product form, trace still zero, R = n(n-1)
    for (int n : {4, 5}) {
        auto eq = solve_orbit(n, equilibrium_ubar(n));
        auto sec = tracefree_ricci(eq, 1.3);
        REQUIRE(std::abs(sec.trace) < 1e-12);
        REQUIRE(sec.scalar == Catch::Approx(n * (n - 1.0)).margin(1e-9));
        REQUIRE(std::abs(sec.T00) > 1e-3);  // cylinder is not Einstein
    }
    // homoclinic (round metric) is Einstein: T vanishes identically
    for (int n : {3, 4, 6})
        for (double t : {-1.0, 0.0, 0.8, 2.5}) {
            auto sec = tracefree_ricci_homoclinic(n, t);
            REQUIRE(std::abs(sec.T00) < 1e-8);
            REQUIRE(std::abs(sec.Taa) < 1e-8);
            REQUIRE(sec.scalar == Catch::Approx(n * (n - 1.0)).margin(1e-8));
        }
}

TEST_CASE("centered_dilation_field: tangency and special cases") {
    auto q = random_unit_vector(5);
    auto Xq = centered_dilation_field(q, q);
    for (double x : Xq) REQUIRE(std::abs(x) < 1e-14);  // v = q gives zero

    for (int rep = 0; rep < 20; ++rep) {
        auto qq = random_unit_vector(5);
        auto v = random_unit_vector(5);
        auto X = centered_dilation_field(v, qq);
        double dot = 0;
        for (int i = 0; i < 5; ++i) dot += X[i] * qq[i];
        REQUIRE(std::abs(dot) < 1e-12);  // tangency
    }
    REQUIRE_THROWS_AS(centered_dilation_field({1, 0, 0}, {2, 0, 0}), validation_error);
}

TEST_CASE("verify_conformal_killing: genuine fields pass, bump fails") {
    const int n = 4;
    auto pts = sample_sphere_points(n + 1, 40);

    // dilation fixing +-p1, i.e. the t-translation on the cylinder
    REQUIRE(verify_conformal_killing(axis_dilation(n), n, pts) < 1e-9);

    // random centered dilation
    auto v = random_unit_vector(n + 1);
    REQUIRE(verify_conformal_killing(ConformalKillingField::centered_dilation(v), n,
                                     pts) < 1e-8);

    // rotations are Killing, in particular conformal Killing
    REQUIRE(verify_conformal_killing(ConformalKillingField::rotation(n + 1, 0, 2), n,
                                     pts) < 1e-8);

    // negative control: add a bump to the field
    auto bumped = [&](const std::vector<double>& q) {
        auto X = axis_dilation(n).at(q);
        X[0] += 0.05 * std::exp(-3.0 * (q[1] - 0.3) * (q[1] - 0.3));
        // project back to the tangent space to keep it a sphere field
        double dot = 0;
        for (int i = 0; i <= n; ++i) dot += X[i] * q[i];
        for (int i = 0; i <= n; ++i) X[i] -= dot * q[i];
        return X;
    };
    REQUIRE(verify_conformal_killing(bumped, n, pts) > 1e-4);
}

TEST_CASE("invariant: section independence and parity") {
    auto orbit = solve_orbit(4, 0.5);
    const auto Xd = axis_dilation(4);
    const double ref = invariant(orbit, Xd, 0.0);
    for (double t : {0.2 * orbit.T, 0.37 * orbit.T, 0.55 * orbit.T, 0.8 * orbit.T})
        REQUIRE(invariant(orbit, Xd, t) == Catch::Approx(ref).margin(1e-8));

    // perpendicular centered dilation: parity kills the invariant
    std::vector<double> vperp(5, 0.0);
    vperp[1] = 1.0;
    auto Xp = ConformalKillingField::centered_dilation(vperp);
    for (double t : {0.0, 0.3 * orbit.T})
        REQUIRE(std::abs(invariant(orbit, Xp, t)) < 1e-10);

    // rotations contribute nothing for exact Delaunay metrics
    REQUIRE(std::abs(invariant(orbit, ConformalKillingField::rotation(5, 0, 4), 0.1)) <
            1e-10);

    // linearity in the field
    std::vector<double> v3(5, 0.0);
    v3[4] = 3.5;
    REQUIRE(invariant(orbit, ConformalKillingField::centered_dilation(v3), 0.0) ==
            Catch::Approx(3.5 * ref).margin(1e-10));
}

TEST_CASE("invariant: homoclinic limit vanishes") {
    // D -> 0 as eps -> 0 tracks H -> 0 (round-sphere limit)
    OrbitOptions opts;
    opts.min_eps = 1e-5;
    double prev = 1e9;
    for (double eps : {0.3, 0.1, 0.02}) {
        auto orbit = solve_orbit(4, eps, {}, opts);
        const double D = std::abs(dilational_invariant(orbit, 0.25 * orbit.T));
        REQUIRE(D < prev);
        prev = D;
    }
}

TEST_CASE("calibrate_cn: ratio constancy and the derived closed form") {
    for (int n : {3, 4, 5}) {
        auto cal = calibrate_cn(n);
        REQUIRE(cal.max_relative_deviation < 1e-6);
        REQUIRE(cal.c_n != 0.0);
        // conformal-change computation gives c_n = 4 (n-1) omega_{n-1}/(n-2)
        REQUIRE(cal.c_n == Catch::Approx(cn_closed_form(n)).epsilon(1e-8));
    }
    REQUIRE(cn_closed_form(4) == Catch::Approx(12.0 * pi * pi).epsilon(1e-12));
}

TEST_CASE("dilational invariant: sign matches H") {
    for (double eps : {0.2, 0.5, 0.69}) {
        auto orbit = solve_orbit(4, eps);
        const double D = dilational_invariant(orbit, 0.4 * orbit.T);
        REQUIRE(D < 0.0);  // c_n > 0 and H < 0 below ubar
        REQUIRE(D / orbit.H == Catch::Approx(cn_closed_form(4)).epsilon(1e-7));
    }
}

TEST_CASE("balancing: two ends cancel") {
    auto orbit = solve_orbit(4, 0.5);
    REQUIRE(balancing_check(orbit, axis_dilation(4), 0.6 * orbit.T) < 1e-8);
    // perpendicular field: both ends vanish individually
    std::vector<double> vperp(5, 0.0);
    vperp[2] = 1.0;
    auto Xp = ConformalKillingField::centered_dilation(vperp);
    REQUIRE(std::abs(invariant(orbit, Xp, 0.6 * orbit.T, +1)) < 1e-10);
    REQUIRE(std::abs(invariant(orbit, Xp, -0.6 * orbit.T, -1)) < 1e-10);
    REQUIRE(balancing_check(orbit, Xp, 0.6 * orbit.T) < 1e-10);
}

TEST_CASE("killing_form: signature and basic values") {
    // translations: B((0,w),(0,w^)) = w . w^
    std::vector<double> w1(5, 0.0), w2(5, 0.0);
    w1[0] = 2.0;
    w2[0] = 0.5;
    w2[3] = 1.0;
    REQUIRE(killing_form(ConformalKillingField::centered_dilation(w1),
                         ConformalKillingField::centered_dilation(w2)) ==
            Catch::Approx(1.0).epsilon(1e-14));

    // rotations: B negative definite
    auto R02 = ConformalKillingField::rotation(5, 0, 2);
    REQUIRE(killing_form(R02, R02) == Catch::Approx(-1.0).epsilon(1e-14));
}

TEST_CASE("invariant norm: value and adjoint invariance") {
    auto orbit = solve_orbit(4, 0.5);
    auto P = invariant_functional(orbit, 0.3 * orbit.T);
    const double norm2 = invariant_norm_squared(P);
    const double D = P.dilational;
    REQUIRE(norm2 == Catch::Approx(D * D).epsilon(1e-9));

    // rotate the configuration: the squared norm is unchanged
    for (double angle : {0.3, 1.1}) {
        auto Q = givens(5, 1, 4, angle);  // moves the axis
        auto Prot = invariant_functional(orbit, 0.3 * orbit.T, +1, &Q);
        REQUIRE(invariant_norm_squared(Prot) == Catch::Approx(norm2).margin(1e-9 * std::abs(norm2) + 1e-12));
        // the functional itself transforms (components move off-axis)
        REQUIRE(std::abs(Prot.dilational - P.dilational) > 1e-6 * std::abs(D));
    }
}
