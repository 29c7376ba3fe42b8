#pragma once

// =============================================================================
// Jacobi fields of the linearized operator L = Lap_g + n around a Delaunay
// orbit, decomposed into spherical-harmonic modes. Mode 0 carries the
// geometric pair
//
//   phi1 = u'/u                     (infinitesimal translation, T-periodic)
//   phi2 = d/d eps [u_eps] / u_eps  (parameter derivative, linear growth)
//
// and mode 1 the explicit exponential pair
//
//   phi3 = e^{ t} (phi1 + (n-2)/2),   phi4 = e^{-t} ((n-2)/2 - phi1).
//
// phi2 is produced by integrating the variational equations of the flow with
// the eps-derivative of the launch point as initial condition, which keeps
// the drift relation  phi2(t+T) - phi2(t) = -phi1(t) T'(eps)  exact; finite
// differences in eps serve as the independent oracle in the tests instead.
//
// Under the max-phase convention phi2(0) = u_max'(eps)/u_max and
// phi2(T/2) = 1/eps (the minimum is a critical point, so the moving-phase
// correction vanishes there as well).
// =============================================================================

#include <cmath>
#include <limits>

#include "delaunay/numerics.hpp"
#include "delaunay/orbit.hpp"

namespace delaunay {

enum class JacobiKind { phi1, phi2, phi3, phi4 };
enum class GrowthClass { periodic, linear, exp_plus, exp_minus };

[[nodiscard]] inline const char* to_string(JacobiKind k) {
    switch (k) {
        case JacobiKind::phi1: return "phi1";
        case JacobiKind::phi2: return "phi2";
        case JacobiKind::phi3: return "phi3";
        default: return "phi4";
    }
}
[[nodiscard]] inline const char* to_string(GrowthClass g) {
    switch (g) {
        case GrowthClass::periodic: return "periodic";
        case GrowthClass::linear: return "linear";
        case GrowthClass::exp_plus: return "exp_plus";
        default: return "exp_minus";
    }
}

/// A sampled-on-demand Jacobi field. Evaluation goes through the orbit's
/// dense output (and, for phi2, the stored sensitivity trajectories); the
/// orbit must outlive the field.
struct JacobiField {
    JacobiKind kind{};
    int mode = 0;
    GrowthClass growth{};
    const PeriodicOrbit* orbit = nullptr;
    Trajectory sens_fwd, sens_bwd;  // (u, v, du, dv); phi2 only
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();

    [[nodiscard]] ScalarJet2 jet(double t) const;
    [[nodiscard]] double value(double t) const { return jet(t).value; }
    [[nodiscard]] double deriv(double t) const { return jet(t).d1; }

    [[nodiscard]] CylinderFunction sample(double a, double b, std::size_t count) const {
        CylinderFunction out;
        out.coord = Coordinate::cylinder_t;
        out.mode = mode;
        out.grid = linspace(a, b, count);
        out.values.reserve(count);
        for (double t : out.grid) out.values.push_back(value(t));
        return out;
    }
};

namespace detail {

/// d(flow_acceleration)/du, the zero-order coefficient of the variational system.
[[nodiscard]] inline double flow_acceleration_derivative(int n, double u) {
    return (n - 2.0) * (n - 2.0) / 4.0 -
           n * (n + 2.0) / 4.0 * std::pow(u, 4.0 / (n - 2.0));
}

[[nodiscard]] inline ScalarJet2 phi1_jet(const PeriodicOrbit& o, double t) {
    if (o.equilibrium) return {0.0, 0.0, 0.0};
    const double u = o.u(t), v = o.v(t);
    const double vp = flow_acceleration(o.n, u);
    const double vpp = flow_acceleration_derivative(o.n, u) * v;
    const double N = vp * u - v * v;
    const double Np = vpp * u - v * vp;
    const double u2 = u * u;
    return {v / u, N / u2, Np / u2 - 2.0 * N * v / (u2 * u)};
}

}  // namespace detail

inline ScalarJet2 JacobiField::jet(double t) const {
    const PeriodicOrbit& o = *orbit;
    const int n = o.n;
    switch (kind) {
        case JacobiKind::phi1:
            return detail::phi1_jet(o, t);
        case JacobiKind::phi2: {
            if (o.equilibrium) {
                // constant-coefficient solution with phi2(0) = 1/ubar
                const double w = std::sqrt(n - 2.0);
                const double c = 1.0 / o.eps;
                return {c * std::cos(w * t), -c * w * std::sin(w * t),
                        -c * w * w * std::cos(w * t)};
            }
            if (!(t >= t_lo && t <= t_hi))
                throw validation_error("phi2: t outside the integrated window");
            const Trajectory& tr = (t >= 0.0) ? sens_fwd : sens_bwd;
            double y[4];
            std::span<double> ys(y, 4);
            tr.eval(t, ys);
            const double u = y[0], v = y[1], du = y[2], dv = y[3];
            const double vp = flow_acceleration(n, u);
            const double dvp = detail::flow_acceleration_derivative(n, u) * du;
            const double M = dv * u - du * v;
            const double Mp = dvp * u - du * vp;
            const double u2 = u * u;
            return {du / u, M / u2, Mp / u2 - 2.0 * M * v / (u2 * u)};
        }
        case JacobiKind::phi3: {
            const auto p1 = detail::phi1_jet(o, t);
            const double e = std::exp(t);
            const double g = p1.value + (n - 2.0) / 2.0;
            return {e * g, e * (g + p1.d1), e * (g + 2.0 * p1.d1 + p1.d2)};
        }
        default: {  // phi4
            const auto p1 = detail::phi1_jet(o, t);
            const double e = std::exp(-t);
            const double g = (n - 2.0) / 2.0 - p1.value;
            return {e * g, e * (-g - p1.d1), e * (g + 2.0 * p1.d1 - p1.d2)};
        }
    }
}

// =============================================================================
// Constructors
// =============================================================================

[[nodiscard]] inline JacobiField phi1(const PeriodicOrbit& orbit) {
    JacobiField f;
    f.kind = JacobiKind::phi1;
    f.mode = 0;
    f.growth = GrowthClass::periodic;
    f.orbit = &orbit;
    return f;
}

struct Phi2Options {
    double t_lo_periods = -11.0;
    double t_hi_periods = 11.0;
    /// |T'(eps)| below this classifies phi2 as periodic instead of linear.
    double drift_threshold = 1e-6;
};

/// Parameter-derivative field via the variational equations of the flow,
/// launched with d/d eps of the initial point (u_max(eps), 0).
[[nodiscard]] inline JacobiField phi2(const PeriodicOrbit& orbit,
                                      const Phi2Options& opts = {}) {
    JacobiField f;
    f.kind = JacobiKind::phi2;
    f.mode = 0;
    f.orbit = &orbit;
    if (orbit.equilibrium) {
        f.growth = GrowthClass::periodic;
        return f;
    }
    const int n = orbit.n;
    auto field = [n](double, std::span<const double> y, std::span<double> dy) {
        dy[0] = y[1];
        dy[1] = flow_acceleration(n, y[0]);
        dy[2] = y[3];
        dy[3] = detail::flow_acceleration_derivative(n, y[0]) * y[2];
    };
    const double dumax = upper_turning_point_derivative(n, orbit.eps);
    std::vector<double> y0 = {orbit.u_max, 0.0, dumax, 0.0};
    f.t_lo = opts.t_lo_periods * orbit.T;
    f.t_hi = opts.t_hi_periods * orbit.T;
    f.sens_fwd = integrate_ivp(field, y0, 0.0, f.t_hi, orbit.tol);
    f.sens_bwd = integrate_ivp(field, y0, 0.0, f.t_lo, orbit.tol);
    // linear growth whenever the period actually moves with eps
    double drift = 0;
    const JacobiField f1 = phi1(orbit);
    for (double t : linspace(0.0, orbit.T, 64)) {
        const double p1 = f1.value(t);
        if (std::abs(p1) > 1e-3)
            drift = std::max(drift,
                             std::abs((f.value(t + orbit.T) - f.value(t)) / p1));
    }
    f.growth = (drift > opts.drift_threshold) ? GrowthClass::linear
                                              : GrowthClass::periodic;
    return f;
}

[[nodiscard]] inline JacobiField phi3(const PeriodicOrbit& orbit) {
    JacobiField f;
    f.kind = JacobiKind::phi3;
    f.mode = 1;
    f.growth = GrowthClass::exp_plus;
    f.orbit = &orbit;
    return f;
}

[[nodiscard]] inline JacobiField phi4(const PeriodicOrbit& orbit) {
    JacobiField f;
    f.kind = JacobiKind::phi4;
    f.mode = 1;
    f.growth = GrowthClass::exp_minus;
    f.orbit = &orbit;
    return f;
}

// =============================================================================
// Mode-operator residual
// =============================================================================

/// L_j phi = u^{-4/(n-2)} (phi'' + lambda phi) + 2 u^{-(n+2)/(n-2)} u' phi' + n phi;
/// the convention lambda_j = -j(j+n-2) puts lambda_1 = 1-n.
[[nodiscard]] inline double mode_operator_apply(const PeriodicOrbit& orbit,
                                                const ScalarJet2& phi, double lambda,
                                                double t) {
    const int n = orbit.n;
    const double u = orbit.u(t), v = orbit.v(t);
    const double w4 = std::pow(u, -4.0 / (n - 2.0));
    return w4 * (phi.d2 + lambda * phi.value) +
           2.0 * std::pow(u, -(n + 2.0) / (n - 2.0)) * v * phi.d1 + n * phi.value;
}

/// Sup of |L_j field| over a uniform grid; the exactness check for phi1..phi4.
[[nodiscard]] inline double jacobi_residual_sup(const JacobiField& f, double a, double b,
                                                std::size_t count = 512) {
    const double lambda = mode_lambda(f.orbit->n, f.mode);
    double sup = 0;
    for (double t : linspace(a, b, count))
        sup = std::max(sup, std::abs(mode_operator_apply(*f.orbit, f.jet(t), lambda, t)));
    return sup;
}

/// Magnitude scale of the individual operator terms at t; the denominator of
/// the backward-error (relative) residual.
[[nodiscard]] inline double mode_operator_term_scale(const PeriodicOrbit& orbit,
                                                     const ScalarJet2& phi,
                                                     double lambda, double t) {
    const int n = orbit.n;
    const double u = orbit.u(t), v = orbit.v(t);
    const double w4 = std::pow(u, -4.0 / (n - 2.0));
    return w4 * (std::abs(phi.d2) + std::abs(lambda * phi.value)) +
           2.0 * std::pow(u, -(n + 2.0) / (n - 2.0)) * std::abs(v * phi.d1) +
           n * std::abs(phi.value);
}

/// Sup of |L_j field| / max(1, term scale): scale-invariant exactness
/// measure, meaningful even where the field grows like e^{2t} or the
/// operator coefficients like u^{-4/(n-2)} blow up near the orbit minimum.
[[nodiscard]] inline double jacobi_residual_relative_sup(const JacobiField& f, double a,
                                                         double b,
                                                         std::size_t count = 512) {
    const double lambda = mode_lambda(f.orbit->n, f.mode);
    double sup = 0;
    for (double t : linspace(a, b, count)) {
        const auto jet = f.jet(t);
        const double res = std::abs(mode_operator_apply(*f.orbit, jet, lambda, t));
        const double scale =
            std::max(1.0, mode_operator_term_scale(*f.orbit, jet, lambda, t));
        sup = std::max(sup, res / scale);
    }
    return sup;
}

// =============================================================================
// Wronskian pairing
// =============================================================================

/// Weighted Wronskian u^2 (f' g - f g'); constant in t by the Abel identity
/// for the self-adjoint form (the weight kills the first-order term).
[[nodiscard]] inline CylinderFunction wronskian_pairing(const JacobiField& f,
                                                        const JacobiField& g, double a,
                                                        double b,
                                                        std::size_t count = 256) {
    if (f.mode != g.mode)
        throw validation_error("wronskian_pairing: fields must share a mode");
    if (f.orbit != g.orbit)
        throw validation_error("wronskian_pairing: fields must share an orbit");
    CylinderFunction out;
    out.coord = Coordinate::cylinder_t;
    out.mode = f.mode;
    out.grid = linspace(a, b, count);
    out.values.reserve(count);
    for (double t : out.grid) {
        const auto jf = f.jet(t), jg = g.jet(t);
        const double u = f.orbit->u(t);
        out.values.push_back(u * u * (jf.d1 * jg.value - jf.value * jg.d1));
    }
    return out;
}

/// (mean, max absolute deviation from the mean) of sampled values.
[[nodiscard]] inline std::pair<double, double> constancy(const CylinderFunction& fn) {
    double mean = 0;
    for (double v : fn.values) mean += v;
    mean /= static_cast<double>(fn.values.size());
    double dev = 0;
    for (double v : fn.values) dev = std::max(dev, std::abs(v - mean));
    return {mean, dev};
}

// =============================================================================
// Deficiency coefficients and the symplectic form
// =============================================================================

struct DeficiencyFit {
    double a = 0, b = 0;
    double residual_norm = 0;  ///< RMS misfit over the window
    double condition = 0;      ///< condition number of the normal equations
};

/// Least-squares expansion w ~ a phi1 + b phi2 over the window covered by w
/// (mode-0 data). The window must span at least two periods.
[[nodiscard]] inline DeficiencyFit extract_deficiency_coefficients(
    const CylinderFunction& w, const PeriodicOrbit& orbit) {
    if (w.grid.size() < 8)
        throw fit_error("extract_deficiency_coefficients: too few samples");
    const double lo = w.grid.front(), hi = w.grid.back();
    if (!(hi - lo >= 2.0 * orbit.T - 1e-9))
        throw fit_error("extract_deficiency_coefficients: window shorter than 2 periods");

    Phi2Options p2o;
    p2o.t_lo_periods = std::min(-1.0, lo / orbit.T - 0.5);
    p2o.t_hi_periods = std::max(1.0, hi / orbit.T + 0.5);
    const JacobiField f1 = phi1(orbit);
    const JacobiField f2 = phi2(orbit, p2o);

    double s11 = 0, s12 = 0, s22 = 0, r1 = 0, r2 = 0;
    std::vector<double> v1(w.grid.size()), v2(w.grid.size());
    for (std::size_t i = 0; i < w.grid.size(); ++i) {
        v1[i] = f1.value(w.grid[i]);
        v2[i] = f2.value(w.grid[i]);
        s11 += v1[i] * v1[i];
        s12 += v1[i] * v2[i];
        s22 += v2[i] * v2[i];
        r1 += v1[i] * w.values[i];
        r2 += v2[i] * w.values[i];
    }
    const double det = s11 * s22 - s12 * s12;
    const double tr = s11 + s22;
    const double disc = std::sqrt(std::max(tr * tr - 4.0 * det, 0.0));
    const double lmax = 0.5 * (tr + disc), lmin = 0.5 * (tr - disc);
    DeficiencyFit fit;
    fit.condition = (lmin > 0) ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(lmin > 1e-12 * lmax))
        throw fit_error("extract_deficiency_coefficients: ill-conditioned fit "
                        "(window too short or degenerate)");
    fit.a = (s22 * r1 - s12 * r2) / det;
    fit.b = (s11 * r2 - s12 * r1) / det;
    double ss = 0;
    for (std::size_t i = 0; i < w.grid.size(); ++i)
        ss += detail::sq(w.values[i] - fit.a * v1[i] - fit.b * v2[i]);
    fit.residual_norm = std::sqrt(ss / static_cast<double>(w.grid.size()));
    return fit;
}

/// Per-end expansion coefficients (a_j, b_j) of a deficiency-space element.
struct DeficiencyCoefficients {
    std::vector<double> a, b;
    [[nodiscard]] std::size_t ends() const { return a.size(); }
};

/// Symplectic pairing sum_j (a_j beta_j - alpha_j b_j) for c1 = (a, b),
/// c2 = (alpha, beta); the sign convention evaluates sum_j da_j ^ db_j on
/// (c1, c2). Antisymmetric by construction.
[[nodiscard]] inline double symplectic_form(const DeficiencyCoefficients& c1,
                                            const DeficiencyCoefficients& c2) {
    if (c1.ends() != c2.ends() || c1.a.size() != c1.b.size() ||
        c2.a.size() != c2.b.size())
        throw validation_error("symplectic_form: coefficient length mismatch");
    double s = 0;
    for (std::size_t j = 0; j < c1.ends(); ++j)
        s += c1.a[j] * c2.b[j] - c2.a[j] * c1.b[j];
    return s;
}

// =============================================================================
// Drift coefficient: phi2(t+T) - phi2(t) = -phi1(t) T'(eps)
// =============================================================================

/// Least-squares estimate of T'(eps) from the phi2 drift over one period;
/// compared in the tests against centered finite differences of the period
/// oracle.
[[nodiscard]] inline double phi2_drift_coefficient(const JacobiField& f2,
                                                   std::size_t count = 256) {
    const PeriodicOrbit& o = *f2.orbit;
    const JacobiField f1 = phi1(o);
    double num = 0, den = 0;
    for (double t : linspace(0.0, o.T, count)) {
        const double p1 = f1.value(t);
        const double d = f2.value(t + o.T) - f2.value(t);
        num += p1 * d;
        den += p1 * p1;
    }
    return -num / den;
}

/// Centered finite-difference oracle for T'(eps).
[[nodiscard]] inline double period_T_derivative_fd(int n, double eps, double h = 1e-6) {
    return (period_T_oracle(n, eps + h) - period_T_oracle(n, eps - h)) / (2.0 * h);
}

}  // namespace delaunay
