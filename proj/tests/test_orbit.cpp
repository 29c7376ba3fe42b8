#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "delaunay/orbit.hpp"
#include "support.hpp"

using namespace delaunay;
using std::numbers::pi;

TEST_CASE("equilibrium_ubar: closed-form values") {
    REQUIRE(equilibrium_ubar(4) == Catch::Approx(std::sqrt(0.5)).epsilon(1e-15));
    REQUIRE(equilibrium_ubar(3) ==
            Catch::Approx(0.75983568565159254733).epsilon(1e-14));
    REQUIRE(equilibrium_ubar(6) == Catch::Approx(2.0 / 3.0).epsilon(1e-15));
    REQUIRE_THROWS_AS(equilibrium_ubar(2), validation_error);
}

TEST_CASE("hamiltonian: frozen values") {
    REQUIRE(hamiltonian(4, std::sqrt(0.5), 0.0) == Catch::Approx(-0.125).margin(1e-15));
    for (int n : {3, 4, 5, 6})
        REQUIRE(hamiltonian(n, 1.0, 0.0) == Catch::Approx(0.0).margin(1e-15));
    // recomputed once symbolically: 0.1^2/2 + (1/2)(0.3^4 - 0.3^2) = -0.03595
    REQUIRE(hamiltonian(4, 0.3, 0.1) == Catch::Approx(-0.03595).margin(1e-15));
    REQUIRE_THROWS_AS(hamiltonian(4, -1.0, 0.0), validation_error);
}

TEST_CASE("homoclinic_u0: values and level-set membership") {
    for (int n : {3, 4, 5, 6}) REQUIRE(homoclinic_u0(n, 0.0) == 1.0);
    REQUIRE(homoclinic_u0(4, 1.0) ==
            Catch::Approx(1.0 / std::cosh(1.0)).epsilon(1e-14));
    for (int n : {3, 4, 5, 6})
        for (double t : {0.5, 1.3, 2.7})
            REQUIRE(std::abs(hamiltonian(n, homoclinic_u0(n, t),
                                         homoclinic_u0_prime(n, t))) < 1e-12);
}

TEST_CASE("solve_orbit: validation and degenerate branch") {
    REQUIRE_THROWS_AS(solve_orbit(4, 2.0), validation_error);
    REQUIRE_THROWS_AS(solve_orbit(4, 1e-9), validation_error);
    auto eq = solve_orbit(5, equilibrium_ubar(5));
    REQUIRE(eq.equilibrium);
    REQUIRE(eq.T == Catch::Approx(2.0 * pi / std::sqrt(3.0)).epsilon(1e-14));
    REQUIRE(eq.R == Catch::Approx(2.0 * pi / std::sqrt(5.0)).epsilon(1e-14));
    REQUIRE(eq.u(3.7) == Catch::Approx(equilibrium_ubar(5)).epsilon(1e-14));
}

TEST_CASE("solve_orbit: n=4 period and oracle agreement") {
    auto orbit = solve_orbit(4, 0.5);
    REQUIRE(std::abs(orbit.R - pi) < 1e-8);  // R == pi identically for n = 4
    const double T_or = period_T_oracle(4, 0.5);
    const double R_or = period_R_oracle(4, 0.5);
    REQUIRE(std::abs(orbit.T - T_or) < 1e-8);
    REQUIRE(std::abs(orbit.R - R_or) < 1e-8);
    REQUIRE(orbit.u_max == Catch::Approx(std::sqrt(1.0 - 0.25)).epsilon(1e-12));
}

TEST_CASE("solve_orbit: near-equilibrium period limit") {
    const double ub = equilibrium_ubar(5);
    auto orbit = solve_orbit(5, ub * (1.0 - 1e-3));
    REQUIRE(std::abs(orbit.T - 2.0 * pi / std::sqrt(3.0)) < 1e-2);
}

TEST_CASE("period oracles: limits from the paper") {
    REQUIRE(std::abs(period_R_oracle(4, 0.2) - pi) < 1e-8);
    REQUIRE(std::abs(period_R_oracle(4, 1e-3) - pi) < 5e-2);
    const double ub5 = equilibrium_ubar(5);
    REQUIRE(std::abs(period_R_oracle(5, ub5 * (1.0 - 1e-4)) -
                     2.0 * pi / std::sqrt(5.0)) < 1e-2);
}

TEST_CASE("orbit invariants: energy, turning points, sign structure") {
    for (int n : {3, 5}) {
        const double ub = equilibrium_ubar(n);
        auto orbit = solve_orbit(n, 0.4 * ub);
        // energy conservation along dense samples
        REQUIRE(orbit.h_drift < 1e-9);
        // u range [eps, u_max], v sign pattern: one max, one min per period
        double umin = 1e9, umax = -1e9;
        int sign_changes = 0;
        double prev_v = orbit.v(1e-3);
        for (double t : linspace(1e-3, orbit.T - 1e-3, 2048)) {
            umin = std::min(umin, orbit.u(t));
            umax = std::max(umax, orbit.u(t));
            const double vv = orbit.v(t);
            if (vv * prev_v < 0) ++sign_changes;
            prev_v = vv;
        }
        REQUIRE(std::abs(orbit.u(orbit.T / 2) - orbit.eps) < 1e-9);
        REQUIRE(std::abs(umin - orbit.eps) < 1e-6);   // grid-sampled extrema
        REQUIRE(std::abs(umax - orbit.u_max) < 1e-6);
        REQUIRE(sign_changes == 1);  // interior crossing at T/2 only
        REQUIRE(orbit.u_max < 1.0);
        REQUIRE(orbit.H < 0.0);
        // even phase: u(t) == u(-t)
        for (double t : {0.3, 1.1, 2.2})
            REQUIRE(orbit.u(t) == Catch::Approx(orbit.u(-t)).margin(1e-9));
    }
}

TEST_CASE("orbit oracle agreement across the eps grid") {
    for (int n : {3, 4, 5, 6}) {
        const double ub = equilibrium_ubar(n);
        for (double f : {0.15, 0.5, 0.85}) {
            auto orbit = solve_orbit(n, f * ub);
            REQUIRE(std::abs(orbit.T - period_T_oracle(n, f * ub)) < 1e-8);
            REQUIRE(std::abs(orbit.R - period_R_oracle(n, f * ub)) < 1e-8);
        }
    }
}

TEST_CASE("monotone energy and period limits on tails") {
    for (int n : {3, 4}) {
        const double ub = equilibrium_ubar(n);
        double prevH = 1.0;
        for (double f : {0.1, 0.3, 0.5, 0.7, 0.9}) {
            const double Hf = potential(n, f * ub);
            REQUIRE(Hf < prevH);
            prevH = Hf;
        }
        // T grows without bound toward eps -> 0
        OrbitOptions opts;
        opts.min_eps = 1e-7;
        auto small = solve_orbit(n, 1e-4, {}, opts);
        REQUIRE(small.T > 10.0);
    }
}

TEST_CASE("closed_form_n4: minimum and endpoints") {
    REQUIRE(closed_form_n4(0.37, pi / 2) == Catch::Approx(0.37).epsilon(1e-14));
    REQUIRE(closed_form_n4(0.37, 0.0) ==
            Catch::Approx(std::sqrt(1.0 - 0.37 * 0.37)).epsilon(1e-14));
    REQUIRE_THROWS_AS(closed_form_n4(0.9, 0.0), validation_error);
}

TEST_CASE("closed_form_n4: ODE orbit resampled in r matches pointwise") {
    auto orbit = solve_orbit(4, 0.4);
    for (double r : linspace(0.0, 2.0 * pi, 41)) {
        const double t = orbit.t_of_r(r);
        REQUIRE(std::abs(orbit.u(t) - closed_form_n4(0.4, r)) < 1e-7);
    }
}

TEST_CASE("nonlinear_residual: zero perturbation and Delaunay quotients") {
    auto orbit = solve_orbit(4, 0.5);
    auto grid = linspace(0.0, 2.0 * orbit.T, 128);

    auto zero = nonlinear_residual(
        orbit, [](double) { return ScalarJet2{0, 0, 0}; }, 0.0, grid);
    for (double rv : zero.values) REQUIRE(std::abs(rv) < 1e-12);

    // translation family Phi_1: v = u(t + eta)/u(t) - 1 is an exact solution
    const double eta = 0.1;
    auto quotient_jet = [&](const PeriodicOrbit& top, double shift) {
        return [&top, &orbit, shift](double t) {
            const double A = top.u(t + shift), Ap = top.v(t + shift);
            const double App = flow_acceleration(top.n, A);
            const double B = orbit.u(t), Bp = orbit.v(t);
            const double Bpp = flow_acceleration(orbit.n, B);
            const double q = A / B;
            const double qp = (Ap * B - A * Bp) / (B * B);
            const double qpp =
                (App * B - A * Bpp) / (B * B) - 2.0 * Bp * (Ap * B - A * Bp) / (B * B * B);
            return ScalarJet2{q - 1.0, qp, qpp};
        };
    };
    auto res1 = nonlinear_residual(orbit, quotient_jet(orbit, eta), 0.0, grid);
    double sup1 = 0;
    for (double rv : res1.values) sup1 = std::max(sup1, std::abs(rv));
    REQUIRE(sup1 < 1e-7);

    // parameter family Phi_2: v = u_{eps+h}(t)/u_eps(t) - 1
    auto orbit2 = solve_orbit(4, 0.55);
    auto res2 = nonlinear_residual(orbit, quotient_jet(orbit2, 0.0), 0.0, grid);
    double sup2 = 0;
    for (double rv : res2.values) sup2 = std::max(sup2, std::abs(rv));
    REQUIRE(sup2 < 1e-7);

    REQUIRE_THROWS_AS(
        nonlinear_residual(orbit, [](double) { return ScalarJet2{-1.5, 0, 0}; }, 0.0,
                           grid),
        validation_error);
}

TEST_CASE("to_ball: formula, round trip, homoclinic closed form") {
    auto rho_grid = linspace(0.05, 1.0, 39);

    auto flat = to_ball([](double) { return 1.0; }, 4, rho_grid);
    for (std::size_t i = 0; i < rho_grid.size(); ++i)
        REQUIRE(flat.values[i] ==
                Catch::Approx(std::pow(rho_grid[i], -1.0)).epsilon(1e-14));

    auto orbit = solve_orbit(4, 0.5);
    auto ball = to_ball(orbit, rho_grid);
    for (std::size_t i = 0; i < rho_grid.size(); ++i) {
        const double back = from_ball_value(ball.values[i], rho_grid[i], 4);
        REQUIRE(std::abs(back - orbit.u(-std::log(rho_grid[i]))) < 1e-12);
    }

    // homoclinic transforms to ((1+rho^2)/2)^{(2-n)/2}
    for (int n : {3, 4, 6}) {
        auto hb = to_ball([n](double t) { return homoclinic_u0(n, t); }, n, rho_grid);
        for (std::size_t i = 0; i < rho_grid.size(); ++i) {
            const double rho = rho_grid[i];
            const double expect = std::pow((1.0 + rho * rho) / 2.0, (2.0 - n) / 2.0);
            REQUIRE(hb.values[i] == Catch::Approx(expect).epsilon(1e-12));
        }
    }

    REQUIRE_THROWS_AS(to_ball([](double) { return 1.0; }, 4, {0.0}), validation_error);
}

TEST_CASE("integrate_ivp: step-size underflow reports the failing t") {
    // y' = y^2 from y(0) = 1 blows up at t = 1
    try {
        auto traj = integrate_ivp(
            [](double, std::span<const double> y, std::span<double> dy) {
                dy[0] = y[0] * y[0];
            },
            {1.0}, 0.0, 2.0);
        FAIL("expected integration_error");
    } catch (const integration_error& e) {
        REQUIRE(std::abs(e.t - 1.0) < 0.05);
    }
}

TEST_CASE("R(eps) approaches its limits monotonically on tail grids") {
    for (int n : {3, 5, 6}) {
        const double ub = equilibrium_ubar(n);
        const double R_inf = 2.0 * std::numbers::pi / std::sqrt(static_cast<double>(n));
        // toward ubar: |R - 2pi/sqrt(n)| shrinks monotonically
        double prev = 1e9;
        for (double f : {0.90, 0.95, 0.99}) {
            const double gap = std::abs(period_R_oracle(n, f * ub) - R_inf);
            REQUIRE(gap < prev + 1e-9);
            prev = gap;
        }
        // toward 0: |R - pi| shrinks monotonically
        prev = 1e9;
        for (double eps : {0.2, 0.1, 0.03}) {
            const double gap = std::abs(period_R_oracle(n, eps) - std::numbers::pi);
            REQUIRE(gap < prev + 1e-9);
            prev = gap;
        }
    }
}
