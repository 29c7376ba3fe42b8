#pragma once

// =============================================================================
// The Delaunay family on the cylinder R x S^{n-1}.
//
// A conformal factor u(t) > 0 with g = u^{4/(n-2)} (dt^2 + dtheta^2) of
// scalar curvature n(n-1) satisfies
//
//     u'' = (n-2)^2/4 u - n(n-2)/4 u^{(n+2)/(n-2)},
//
// a Hamiltonian flow with conserved energy
//
//     H(u, v) = v^2/2 + (n-2)^2/8 (u^{2n/(n-2)} - u^2),   v = u'.
//
// Closed orbits inside the homoclinic loop {H = 0} form the one-parameter
// Delaunay family u_eps, indexed by the orbit minimum eps in (0, ubar],
// where ubar = ((n-2)/n)^{(n-2)/4} is the cylinder equilibrium.
//
// Phase convention used throughout: u(0) = u_max, so u is even in t and
// attains its minimum eps at t = T/2.
// =============================================================================

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "delaunay/numerics.hpp"

namespace delaunay {

// =============================================================================
// Scalars of the model
// =============================================================================

inline void validate_dimension(int n) {
    if (n < 3) throw validation_error("model dimension must satisfy n >= 3");
}

/// Cylinder equilibrium ubar = ((n-2)/n)^{(n-2)/4}.
[[nodiscard]] inline double equilibrium_ubar(int n) {
    validate_dimension(n);
    return std::pow((n - 2.0) / n, (n - 2.0) / 4.0);
}

/// Hamiltonian energy H(u, v) = v^2/2 + (n-2)^2/8 (u^{2n/(n-2)} - u^2).
[[nodiscard]] inline double hamiltonian(int n, double u, double v) {
    validate_dimension(n);
    if (!(u > 0.0)) throw validation_error("hamiltonian: u must be positive");
    const double c = (n - 2.0) * (n - 2.0) / 8.0;
    return 0.5 * v * v + c * (std::pow(u, 2.0 * n / (n - 2.0)) - u * u);
}

/// Potential U(u) = H(u, 0); orbits live on level sets H = U(eps).
[[nodiscard]] inline double potential(int n, double u) { return hamiltonian(n, u, 0.0); }

[[nodiscard]] inline double potential_derivative(int n, double u) {
    const double c = (n - 2.0) / 4.0;
    return c * (n * std::pow(u, (n + 2.0) / (n - 2.0)) - (n - 2.0) * u);
}

/// U(x) - U(y) evaluated without forming the two nearly equal potentials;
/// accurate when x and y are close. Needed by the period quadratures, whose
/// integrands are 1/sqrt of such differences even when the well depth is at
/// rounding scale (eps near ubar).
[[nodiscard]] inline double potential_difference(int n, double x, double y) {
    const double q = 2.0 * n / (n - 2.0);
    const double c = (n - 2.0) * (n - 2.0) / 8.0;
    const double delta = x - y;
    const double pow_diff = std::pow(y, q) * std::expm1(q * std::log1p(delta / y));
    return c * (pow_diff - delta * (x + y));
}

/// Right-hand side of v' in the first-order system (u' = v).
[[nodiscard]] inline double flow_acceleration(int n, double u) {
    return (n - 2.0) * (n - 2.0) / 4.0 * u -
           n * (n - 2.0) / 4.0 * std::pow(u, (n + 2.0) / (n - 2.0));
}

/// Cross-sectional Laplacian eigenvalue for spherical-harmonic degree j,
/// sign convention lambda_j = -j(j+n-2) (so lambda_1 = 1-n).
[[nodiscard]] inline double mode_lambda(int n, int j) {
    return -static_cast<double>(j) * (j + n - 2.0);
}

/// Homoclinic (round sphere) solution u0(t) = (cosh t)^{(2-n)/2}; H = 0.
[[nodiscard]] inline double homoclinic_u0(int n, double t) {
    validate_dimension(n);
    return std::pow(std::cosh(t), (2.0 - n) / 2.0);
}

[[nodiscard]] inline double homoclinic_u0_prime(int n, double t) {
    return (2.0 - n) / 2.0 * std::pow(std::cosh(t), -n / 2.0) * std::sinh(t);
}

/// Closed form for n = 4 in the geodesic coordinate r:
/// u_eps(r) = sqrt(1/2 + (1/2 - eps^2) cos 2r); minimum eps at r = pi/2 + l pi.
[[nodiscard]] inline double closed_form_n4(double eps, double r) {
    const double ub = equilibrium_ubar(4);
    if (!(eps > 0.0) || eps > ub + 1e-12)
        throw validation_error("closed_form_n4: eps must lie in (0, ubar(4)]");
    return std::sqrt(0.5 + (0.5 - eps * eps) * std::cos(2.0 * r));
}

// =============================================================================
// PeriodicOrbit
// =============================================================================

/// One fully resolved Delaunay orbit: dense samples of (u, v, r) over a
/// single period with the max-phase convention u(0) = u_max. Immutable after
/// construction; evaluation at arbitrary t folds periodically.
struct PeriodicOrbit {
    int n = 0;
    double eps = 0;
    double T = 0;       ///< period in the cylinder coordinate t
    double R = 0;       ///< period in the geodesic coordinate r
    double H = 0;       ///< energy level U(eps)
    double u_max = 0;   ///< larger turning point, root of U(u) = U(eps) in (ubar, 1)
    bool equilibrium = false;  ///< eps == ubar branch (constant solution)
    double h_drift = 0;        ///< measured max |H(u,v) - H| along the samples
    Tolerance tol;
    Trajectory traj;  ///< components (u, v, r) on [0, T]; empty when equilibrium

    /// Fold t into [0, T) and report how many whole periods were removed.
    [[nodiscard]] std::pair<double, double> fold(double t) const {
        const double k = std::floor(t / T);
        double tf = t - k * T;
        if (tf >= T) tf -= T;
        return {tf, k};
    }

    [[nodiscard]] double u(double t) const {
        if (equilibrium) return eps;
        return traj.eval_component(fold(t).first, 0);
    }
    [[nodiscard]] double v(double t) const {
        if (equilibrium) return 0.0;
        return traj.eval_component(fold(t).first, 1);
    }
    /// u'' recovered through the flow, never by numerical differentiation.
    [[nodiscard]] double u_second(double t) const {
        return flow_acceleration(n, u(t));
    }
    /// Geodesic reparametrization r(t) with r(0) = 0 and dr/dt = u^{2/(n-2)}.
    [[nodiscard]] double r_of_t(double t) const {
        if (equilibrium) return std::pow(eps, 2.0 / (n - 2.0)) * t;
        auto [tf, k] = fold(t);
        return traj.eval_component(tf, 2) + k * R;
    }
    /// Inverse of r_of_t (monotone; bracketed refinement on dense output).
    [[nodiscard]] double t_of_r(double r) const {
        if (equilibrium) return r / std::pow(eps, 2.0 / (n - 2.0));
        const double k = std::floor(r / R);
        const double rf = r - k * R;
        const double tf = find_root_bracketed(
            [&](double t) { return traj.eval_component(t, 2) - rf; }, 0.0, T, 1e-15);
        return tf + k * T;
    }
};

// =============================================================================
// Orbit construction
// =============================================================================

struct OrbitOptions {
    /// Conditioning guard: construction refuses eps below this value.
    double min_eps = 1e-6;
    double max_step = kDefaultMaxStep;
};

/// Larger turning point u_max(eps): the root of U(u) = U(eps) in (ubar, 1).
[[nodiscard]] inline double upper_turning_point(int n, double eps) {
    const double ub = equilibrium_ubar(n);
    const double level = potential(n, eps);
    return find_root_bracketed(
        [&](double u) { return potential(n, u) - level; }, ub, 1.0, 1e-15);
}

/// d u_max / d eps, from differentiating U(u_max(eps)) = U(eps).
[[nodiscard]] inline double upper_turning_point_derivative(int n, double eps) {
    const double umax = upper_turning_point(n, eps);
    return potential_derivative(n, eps) / potential_derivative(n, umax);
}

/// Construct the Delaunay orbit u_eps by launching from (u_max, 0) and
/// detecting the first return to the section v = 0 with u > ubar. The
/// degenerate eps = ubar case is returned as an explicit constant branch with
/// the linearization periods T = 2 pi / sqrt(n-2), R = 2 pi / sqrt(n).
[[nodiscard]] inline PeriodicOrbit solve_orbit(int n, double eps,
                                               const Tolerance& tol = {},
                                               const OrbitOptions& opts = {}) {
    validate_dimension(n);
    tol.validate();
    const double ub = equilibrium_ubar(n);
    if (!(eps >= opts.min_eps))
        throw validation_error("solve_orbit: eps below the conditioning guard " +
                               std::to_string(opts.min_eps));
    if (eps > ub + 1e-12)
        throw validation_error("solve_orbit: eps must lie in (0, ubar]");

    PeriodicOrbit orbit;
    orbit.n = n;
    orbit.eps = eps;
    orbit.H = potential(n, eps);
    orbit.tol = tol;

    if (std::abs(eps - ub) < 1e-12) {
        orbit.equilibrium = true;
        orbit.u_max = ub;
        orbit.T = 2.0 * std::numbers::pi / std::sqrt(n - 2.0);
        orbit.R = 2.0 * std::numbers::pi / std::sqrt(static_cast<double>(n));
        return orbit;
    }

    orbit.u_max = upper_turning_point(n, eps);

    auto field = [n](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = flow_acceleration(n, y[0]);
        dy[2] = std::pow(y[0], 2.0 / (n - 2.0));
    };

    // First return to v = 0 through a falling crossing: v leaves 0 downward
    // from the maximum, rises through 0 at the minimum (t = T/2), and falls
    // through 0 again exactly at t = T.
    const double horizon = 20.0 + 10.0 * std::abs(std::log(eps));
    EventResult ret;
    try {
        ret = find_event(field, {orbit.u_max, 0.0, 0.0}, 0.0, horizon,
                         [](std::span<const double> y) { return y[1]; }, -1, tol,
                         opts.max_step);
    } catch (const event_not_found&) {
        throw error("solve_orbit: period detection failure for eps = " +
                    std::to_string(eps));
    }
    if (!(ret.state[0] > ub))
        throw error("solve_orbit: section return landed below the equilibrium");

    orbit.T = ret.t;
    orbit.traj = integrate_ivp(field, {orbit.u_max, 0.0, 0.0}, 0.0, orbit.T, tol,
                               opts.max_step);
    orbit.R = orbit.traj.eval_component(orbit.T, 2);

    double drift = 0;
    for (double t : linspace(0.0, orbit.T, 256)) {
        const double u = orbit.traj.eval_component(t, 0);
        const double v = orbit.traj.eval_component(t, 1);
        drift = std::max(drift, std::abs(hamiltonian(n, u, v) - orbit.H));
    }
    orbit.h_drift = drift;
    const double scale = std::max(1.0, std::abs(orbit.H));
    if (drift > 1e4 * tol.rel_tol * scale)
        throw error("solve_orbit: Hamiltonian drift " + std::to_string(drift) +
                    " exceeds the integrator contract");
    return orbit;
}

// =============================================================================
// Independent period oracles (energy-level quadrature)
// =============================================================================

namespace detail {

/// 2 int_a^b w(u) du / sqrt(2 (level - U(u))) between the turning points
/// a = eps and b = u_max, where level - U vanishes to first order at both
/// ends. Substituting u = a + s^2 (resp. b - s^2) removes the singularity;
/// the innermost sliver, where level - U(u) is pure cancellation noise, is
/// integrated with the local model  integrand = g0 + g2 s^2.
template <class W>
inline double energy_level_integral(int n, double eps, W&& w, double tol) {
    double b = upper_turning_point(n, eps);
    for (int i = 0; i < 2; ++i)  // Newton polish to the last ulp
        b += potential_difference(n, eps, b) / potential_derivative(n, b);
    const double a = eps;
    const double m = 0.5 * (a + b);

    auto half = [&](double endpoint, double inward_sign, double slope) {
        // slope = d/du [level - U] moving inward from the endpoint (> 0);
        // F(s) = 4 s w / sqrt(2 (level - U)) is smooth after substitution,
        // with F(0) = 4 w(endpoint) / sqrt(2 slope). level - U is anchored
        // at this half's own turning point so the local difference stays
        // cancellation-free; level_off is the (tiny) residual of the other
        // anchor after polishing.
        const double smax = std::sqrt(std::abs(m - endpoint));
        const double slo = 1e-3 * smax;
        const double level_off = potential_difference(n, eps, endpoint);
        auto F = [&](double s) {
            const double u = endpoint + inward_sign * s * s;
            const double d = 2.0 * (level_off + potential_difference(n, endpoint, u));
            return 4.0 * s * w(u) / std::sqrt(std::max(d, 1e-300));
        };
        const double F0 = 4.0 * w(endpoint) / std::sqrt(2.0 * slope);
        const double F2 = (F(slo) - F0) / (slo * slo);
        const double sliver = F0 * slo + F2 * slo * slo * slo / 3.0;
        return sliver + adaptive_quadrature(F, slo, smax, 0.45 * tol);
    };

    return half(a, +1.0, -potential_derivative(n, a)) +
           half(b, -1.0, potential_derivative(n, b));
}

}  // namespace detail

/// T(eps) = 2 int_eps^{u_max} du / sqrt(2 (U(eps) - U(u))); the turning-point
/// singularities are square roots and handled by substitution.
[[nodiscard]] inline double period_T_oracle(int n, double eps, double tol = 1e-10) {
    validate_dimension(n);
    const double ub = equilibrium_ubar(n);
    if (!(eps > 0.0) || !(eps < ub))
        throw validation_error("period oracle: eps must lie in (0, ubar)");
    return detail::energy_level_integral(n, eps, [](double) { return 1.0; }, tol);
}

/// R(eps) = 2 int_eps^{u_max} u^{2/(n-2)} du / sqrt(2 (U(eps) - U(u))).
[[nodiscard]] inline double period_R_oracle(int n, double eps, double tol = 1e-10) {
    validate_dimension(n);
    const double ub = equilibrium_ubar(n);
    if (!(eps > 0.0) || !(eps < ub))
        throw validation_error("period oracle: eps must lie in (0, ubar)");
    return detail::energy_level_integral(
        n, eps, [n](double u) { return std::pow(u, 2.0 / (n - 2.0)); }, tol);
}

// =============================================================================
// Sampled functions on the cylinder / ball
// =============================================================================

enum class Coordinate { cylinder_t, geodesic_r, ball_rho };

/// Scalar samples over a stated window, tagged with the coordinate system
/// they live in and (for non-radial data) the spherical-harmonic mode.
struct CylinderFunction {
    Coordinate coord = Coordinate::cylinder_t;
    int mode = 0;
    std::vector<double> grid;
    std::vector<double> values;
};

/// Value together with first and second derivatives; inputs to the residual
/// operator carry exact jets so no numerical differentiation happens here.
struct ScalarJet2 {
    double value = 0, d1 = 0, d2 = 0;
};

/// Nonlinear residual N_eps(v) = Lap_eps v + n v + Q(v) for a single mode j
/// (lambda = -j(j+n-2); pass lambda = 0 for rotationally symmetric input).
/// Q(v) = n(n-2)/4 ((1+v)^{(n+2)/(n-2)} - 1 - (n+2)/(n-2) v).
[[nodiscard]] inline CylinderFunction nonlinear_residual(
    const PeriodicOrbit& orbit, const std::function<ScalarJet2(double)>& v_jet,
    double lambda, const std::vector<double>& grid) {
    const int n = orbit.n;
    CylinderFunction out;
    out.coord = Coordinate::cylinder_t;
    out.grid = grid;
    out.values.reserve(grid.size());
    const double p = (n + 2.0) / (n - 2.0);
    for (double t : grid) {
        const ScalarJet2 jv = v_jet(t);
        if (!(1.0 + jv.value > 0.0))
            throw validation_error("nonlinear_residual: 1 + v must stay positive");
        const double u = orbit.u(t), du = orbit.v(t);
        const double w4 = std::pow(u, -4.0 / (n - 2.0));
        const double lap = w4 * jv.d2 + 2.0 * std::pow(u, -p) * du * jv.d1 +
                           w4 * lambda * jv.value;
        const double Q = n * (n - 2.0) / 4.0 *
                         (std::pow(1.0 + jv.value, p) - 1.0 - p * jv.value);
        out.values.push_back(lap + n * jv.value + Q);
    }
    return out;
}

/// Transform cylinder samples to the punctured ball: the conformal map
/// rho = e^{-t} carries u to  u~(rho) = rho^{(2-n)/2} u(-log rho).
[[nodiscard]] inline CylinderFunction to_ball(const std::function<double(double)>& u_of_t,
                                              int n, const std::vector<double>& rho_grid) {
    validate_dimension(n);
    CylinderFunction out;
    out.coord = Coordinate::ball_rho;
    out.grid = rho_grid;
    out.values.reserve(rho_grid.size());
    for (double rho : rho_grid) {
        if (!(rho > 0.0)) throw validation_error("to_ball: rho must be positive");
        out.values.push_back(std::pow(rho, (2.0 - n) / 2.0) * u_of_t(-std::log(rho)));
    }
    return out;
}

[[nodiscard]] inline CylinderFunction to_ball(const PeriodicOrbit& orbit,
                                              const std::vector<double>& rho_grid) {
    return to_ball([&](double t) { return orbit.u(t); }, orbit.n, rho_grid);
}

/// Inverse of to_ball on samples: u(t) = rho^{(n-2)/2} u~(rho) at rho = e^{-t}.
[[nodiscard]] inline double from_ball_value(double u_tilde, double rho, int n) {
    return std::pow(rho, (n - 2.0) / 2.0) * u_tilde;
}

}  // namespace delaunay
