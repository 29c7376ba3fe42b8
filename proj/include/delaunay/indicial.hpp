#pragma once

// =============================================================================
// Indicial data of the mode operators at sigma = 0: Floquet exponents
// gamma = log|mu| / T per mode (the growth-rate set Gamma), the sharp decay
// rate gamma_1, the order-2 pole at 0 carried by the mode-0 block, and the
// relative-index count (2k, k) over end configurations.
//
// Also here: the discrete Fourier-Laplace transform diagnostic
//   h^(t, zeta) = sum_k e^{-i k zeta} h(t + k)        (unit period lattice)
// with its contour-integral inverse, and nonlinear fitting of Delaunay
// asymptotics  w(t) ~ u_eps(t + eta) (1 + c e^{-alpha t}).
// =============================================================================

#include <cmath>
#include <complex>
#include <optional>
#include <vector>

#include "delaunay/floquet.hpp"
#include "delaunay/jacobi.hpp"
#include "delaunay/numerics.hpp"
#include "delaunay/orbit.hpp"

namespace delaunay {

// =============================================================================
// Floquet exponents and the indicial set
// =============================================================================

struct IndicialEntry {
    int mode = 0;
    double gamma = 0;      ///< growth rate, units 1/t
    int multiplicity = 1;  ///< algebraic multiplicity at the ODE level
    bool defective = false;
};

/// Exponents of mode j at sigma = 0. det M = 1 forces the +-gamma pairing;
/// |tr| <= 2 collapses both onto gamma = 0 (bounded quasi-periodic block).
[[nodiscard]] inline std::vector<IndicialEntry> floquet_exponents(
    const PeriodicOrbit& orbit, int j, const MonodromyOptions& opts = {}) {
    const auto mono = monodromy(sl_form(orbit, j), 0.0, opts);
    const double tr = mono.discriminant;
    if (std::abs(std::abs(tr) - 2.0) < opts.defect_threshold) {
        // unipotent (or anti-unipotent) block: gamma = 0 twice, defective
        // exactly when the block is a genuine Jordan cell
        return {{j, 0.0, 2, mono.defective}};
    }
    if (std::abs(tr) < 2.0) return {{j, 0.0, 2, false}};
    const double gamma = std::acosh(0.5 * std::abs(tr)) / orbit.T;
    return {{j, -gamma, 1, false}, {j, gamma, 1, false}};
}

/// Merged exponent data over modes 0..j_max, sorted by |gamma| then gamma;
/// gamma1 is the smallest strictly positive exponent.
struct IndicialSet {
    std::vector<IndicialEntry> entries;
    double gamma1 = 0;
};

[[nodiscard]] inline IndicialSet indicial_set(const PeriodicOrbit& orbit, int j_max,
                                              const MonodromyOptions& opts = {}) {
    if (j_max < 1) throw validation_error("indicial_set: j_max must be >= 1");
    IndicialSet out;
    for (int j = 0; j <= j_max; ++j)
        for (const auto& e : floquet_exponents(orbit, j, opts))
            out.entries.push_back(e);
    std::sort(out.entries.begin(), out.entries.end(),
              [](const IndicialEntry& a, const IndicialEntry& b) {
                  const double aa = std::abs(a.gamma), ab = std::abs(b.gamma);
                  if (aa != ab) return aa < ab;
                  if (a.gamma != b.gamma) return a.gamma < b.gamma;
                  return a.mode < b.mode;
              });
    out.gamma1 = std::numeric_limits<double>::infinity();
    for (const auto& e : out.entries)
        if (e.gamma > 1e-9) out.gamma1 = std::min(out.gamma1, e.gamma);
    return out;
}

/// Sharp decay rate of perturbations toward the Delaunay model: the first
/// positive element of the exponent set (j_max >= n required to see every
/// candidate mode).
[[nodiscard]] inline double sharp_decay_rate(const PeriodicOrbit& orbit, int j_max,
                                             const MonodromyOptions& opts = {}) {
    if (j_max < orbit.n)
        throw validation_error("sharp_decay_rate: j_max must be at least n");
    return indicial_set(orbit, j_max, opts).gamma1;
}

/// Closed-form mode-j exponent at eps = ubar (constant coefficients):
/// gamma_j = sqrt(j(j+n-2) - (n-2)) for j >= 1.
[[nodiscard]] inline double exponent_at_ubar(int n, int j) {
    return std::sqrt(static_cast<double>(j) * (j + n - 2.0) - (n - 2.0));
}

// =============================================================================
// Pole degree at zero and the relative index
// =============================================================================

/// Algebraic multiplicity of the multiplier 1 in the mode-0 monodromy: 2 for
/// every Delaunay orbit (phi1 periodic, phi2 drifting). A trace away from 2
/// signals a corrupted orbit and is reported as an error.
[[nodiscard]] inline int pole_degree_at_zero(const PeriodicOrbit& orbit,
                                             const MonodromyOptions& opts = {}) {
    const auto mono = monodromy(sl_form(orbit, 0), 0.0, opts);
    if (std::abs(mono.discriminant - 2.0) > opts.defect_threshold)
        throw error("pole_degree_at_zero: mode-0 trace " +
                    std::to_string(mono.discriminant) +
                    " is not 2; orbit data looks corrupted");
    return 2;
}

/// Asymptotic Delaunay model per end (one eps per end; same n everywhere).
struct EndModel {
    int n = 4;
    std::vector<double> eps;
    [[nodiscard]] std::size_t k() const { return eps.size(); }
};

struct RelativeIndex {
    int rel_index = 0;             ///< index jump across the weight 0 = 2k
    int dim_bounded_nullspace = 0; ///< rel_index / 2 = k
    double delta = 0;              ///< admissible weight window (0, delta)
};

/// Index jump of the linearization across the zero weight, counted as the
/// sum of per-end pole degrees; equals (2k, k) for k ends. The weight window
/// is checked nonempty: delta = half the smallest gamma_1 over the ends.
[[nodiscard]] inline RelativeIndex relative_index(const EndModel& ends,
                                                  const Tolerance& tol = {}) {
    if (ends.k() < 2)
        throw validation_error("relative_index: need at least two ends");
    RelativeIndex out;
    double min_gamma1 = std::numeric_limits<double>::infinity();
    int total = 0;
    for (double eps : ends.eps) {
        const auto orbit = solve_orbit(ends.n, eps, tol);
        total += pole_degree_at_zero(orbit);
        min_gamma1 = std::min(min_gamma1, sharp_decay_rate(orbit, ends.n + 2));
    }
    if (!(min_gamma1 > 1e-9))
        throw error("relative_index: empty weight window (gamma_1 = 0 on some end)");
    out.rel_index = total;
    out.dim_bounded_nullspace = total / 2;
    out.delta = 0.5 * min_gamma1;
    return out;
}

// =============================================================================
// Fourier-Laplace transform diagnostic (unit period lattice)
// =============================================================================

struct FourierLaplaceOptions {
    double truncation = 1e-14;  ///< stop once terms fall below this
    int k_budget = 4000;        ///< divergence guard
};

/// h^(t, zeta) = sum_{k} e^{-ik zeta} h(t+k) for h supported in t >= 0 with
/// exponential decay; requires Im zeta below the decay line (terms shrink).
[[nodiscard]] inline std::complex<double> fourier_laplace(
    const std::function<double(double)>& h, double t, std::complex<double> zeta,
    const FourierLaplaceOptions& opts = {}) {
    const int k0 = static_cast<int>(std::ceil(-t - 1e-12));
    std::complex<double> acc = 0;
    double peak = 0;
    int quiet = 0;  // consecutive below-truncation terms
    for (int k = k0;; ++k) {
        if (k - k0 > opts.k_budget)
            throw error("fourier_laplace: series did not converge "
                        "(zeta above the decay line?)");
        const std::complex<double> phase =
            std::exp(std::complex<double>(0, -1.0) * zeta * static_cast<double>(k));
        const std::complex<double> term = phase * h(t + k);
        acc += term;
        const double mag = std::abs(term);
        peak = std::max(peak, mag);
        if (mag > 1e12 && k > k0 + 8 && mag > 1e6 * std::abs(h(t + k)))
            throw error("fourier_laplace: divergent series");
        quiet = (mag < opts.truncation * std::max(1.0, peak)) ? quiet + 1 : 0;
        if (quiet >= 4 && k > k0 + 4) return acc;
    }
}

/// Inverse by trapezoidal contour integration along Im zeta = nu0:
/// h(t) = (1/2pi) int_0^{2pi} e^{i l zeta} h^(t~, zeta) d mu, t = t~ + l.
[[nodiscard]] inline double fourier_laplace_inverse(
    const std::function<std::complex<double>(double, std::complex<double>)>& hhat,
    double t, double nu0, std::size_t m_points = 256) {
    const double l = std::floor(t);
    const double tt = t - l;
    std::complex<double> acc = 0;
    for (std::size_t i = 0; i < m_points; ++i) {
        const double mu = 2.0 * std::numbers::pi * static_cast<double>(i) /
                          static_cast<double>(m_points);
        const std::complex<double> zeta(mu, nu0);
        acc += std::exp(std::complex<double>(0, 1.0) * zeta * l) * hhat(tt, zeta);
    }
    return (acc / static_cast<double>(m_points)).real();
}

// =============================================================================
// Asymptote fitting: w(t) ~ u_eps(t + eta) (1 + c e^{-alpha t})
// =============================================================================

struct AsymptoteFit {
    double eps = 0;
    double eta = 0;    ///< t-translation (equivalently log of the dilation A)
    double c = 0;      ///< perturbation amplitude
    double alpha = 0;  ///< decay rate; meaningful when |c| is resolved
    double misfit = 0; ///< RMS residual at the optimum
    bool converged = false;
    int iterations = 0;
};

struct FitOptions {
    int max_iterations = 60;
    double gradient_tol = 1e-12;
    Tolerance orbit_tol{};
};

namespace detail {

struct FitWork {
    int n;
    std::vector<double> t, w;
};

/// Residuals and Jacobian of r_i = u_eps(t_i + eta)(1 + c e^{-a t_i}) - w_i;
/// d u/d eps comes from the phi2 sensitivity field, u' from the flow.
inline void fit_eval(const FitWork& wk, double eps, double eta, double c, double a,
                     const Tolerance& tol, std::vector<double>& r,
                     std::vector<std::array<double, 4>>& J) {
    const auto orbit = solve_orbit(wk.n, eps, tol);
    Phi2Options p2o;
    double lo = (wk.t.front() + eta) / orbit.T, hi = (wk.t.back() + eta) / orbit.T;
    p2o.t_lo_periods = std::min(-1.0, lo - 0.5);
    p2o.t_hi_periods = std::max(1.0, hi + 0.5);
    const auto f2 = phi2(orbit, p2o);
    const std::size_t m = wk.t.size();
    r.resize(m);
    J.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double ti = wk.t[i];
        const double u = orbit.u(ti + eta);
        const double up = orbit.v(ti + eta);
        const double du_deps = f2.value(ti + eta) * u;
        const double decay = std::exp(-a * ti);
        const double fac = 1.0 + c * decay;
        r[i] = u * fac - wk.w[i];
        J[i] = {du_deps * fac, up * fac, u * decay, -u * c * ti * decay};
    }
}

}  // namespace detail

/// Trust-region (Levenberg-Marquardt) fit of the four parameters
/// (eps, eta, c, alpha), seeded from the sample minimum (eps), the first
/// maximum location (eta) and a unit decay rate.
[[nodiscard]] inline AsymptoteFit fit_asymptote(const CylinderFunction& w, int n,
                                                const FitOptions& opts = {}) {
    validate_dimension(n);
    if (w.grid.size() < 16) throw fit_error("fit_asymptote: too few samples");
    detail::FitWork wk{n, w.grid, w.values};

    // ---- seeds
    double wmin = 1e300, wmax = -1e300;
    for (double v : w.values) { wmin = std::min(wmin, v); wmax = std::max(wmax, v); }
    const double ub = equilibrium_ubar(n);
    double eps = std::clamp(wmin, 1e-4, ub * (1.0 - 1e-6));
    double eta = 0.0;
    {
        const auto probe = solve_orbit(n, eps, opts.orbit_tol);
        if (!(w.grid.back() - w.grid.front() >= 3.0 * probe.T - 1e-9))
            throw fit_error("fit_asymptote: window shorter than three periods");
        // first interior sample maximum seeds the phase
        for (std::size_t i = 1; i + 1 < wk.t.size(); ++i) {
            if (wk.w[i] >= wk.w[i - 1] && wk.w[i] >= wk.w[i + 1]) {
                eta = -std::fmod(wk.t[i], probe.T);
                break;
            }
        }
    }
    double c = 0.0, alpha = 1.0;

    // ---- Levenberg-Marquardt on the 4-parameter residual
    std::vector<double> r;
    std::vector<std::array<double, 4>> J;
    detail::fit_eval(wk, eps, eta, c, alpha, opts.orbit_tol, r, J);
    auto sumsq = [](const std::vector<double>& v) {
        double s = 0;
        for (double x : v) s += x * x;
        return s;
    };
    double cost = sumsq(r);
    double lambda = 1e-3;
    AsymptoteFit fit;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        // normal equations (J^T J + lambda diag) step = -J^T r
        double A[4][4] = {};
        double g[4] = {};
        for (std::size_t i = 0; i < r.size(); ++i) {
            for (int p = 0; p < 4; ++p) {
                g[p] += J[i][p] * r[i];
                for (int q = p; q < 4; ++q) A[p][q] += J[i][p] * J[i][q];
            }
        }
        for (int p = 0; p < 4; ++p)
            for (int q = 0; q < p; ++q) A[p][q] = A[q][p];
        double gnorm = 0;
        for (double gv : g) gnorm = std::max(gnorm, std::abs(gv));
        if (gnorm < opts.gradient_tol) break;

        double M[4][5];
        for (int p = 0; p < 4; ++p) {
            for (int q = 0; q < 4; ++q) M[p][q] = A[p][q];
            M[p][p] += lambda * std::max(A[p][p], 1e-12);
            M[p][4] = -g[p];
        }
        // Gaussian elimination with partial pivoting on the 4x5 system
        for (int col = 0; col < 4; ++col) {
            int piv = col;
            for (int row = col + 1; row < 4; ++row)
                if (std::abs(M[row][col]) > std::abs(M[piv][col])) piv = row;
            std::swap(M[piv], M[col]);
            if (std::abs(M[col][col]) < 1e-300) { M[col][col] = 1e-300; }
            for (int row = col + 1; row < 4; ++row) {
                const double f = M[row][col] / M[col][col];
                for (int q = col; q < 5; ++q) M[row][q] -= f * M[col][q];
            }
        }
        double step[4];
        for (int p = 3; p >= 0; --p) {
            double s = M[p][4];
            for (int q = p + 1; q < 4; ++q) s -= M[p][q] * step[q];
            step[p] = s / M[p][p];
        }

        const double eps_try =
            std::clamp(eps + step[0], 2e-4, ub * (1.0 - 1e-9));
        const double eta_try = eta + step[1];
        const double c_try = c + step[2];
        const double a_try = std::clamp(alpha + step[3], 1e-3, 50.0);

        std::vector<double> r_try;
        std::vector<std::array<double, 4>> J_try;
        detail::fit_eval(wk, eps_try, eta_try, c_try, a_try, opts.orbit_tol, r_try,
                         J_try);
        const double cost_try = sumsq(r_try);
        if (cost_try < cost) {
            eps = eps_try; eta = eta_try; c = c_try; alpha = a_try;
            r = std::move(r_try); J = std::move(J_try);
            cost = cost_try;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (cost < 1e-24 * static_cast<double>(r.size())) { ++it; break; }
        } else {
            lambda *= 8.0;
            if (lambda > 1e12) break;
        }
    }
    fit.eps = eps;
    fit.eta = eta;
    fit.c = c;
    fit.alpha = alpha;
    fit.misfit = std::sqrt(cost / static_cast<double>(r.size()));
    fit.iterations = it;
    fit.converged = fit.misfit < 1e-6 * std::max(1.0, std::abs(wk.w[0]));
    if (!fit.converged && fit.misfit > 1e-3)
        throw fit_error("fit_asymptote: optimizer failed to converge (misfit " +
                        std::to_string(fit.misfit) + ")");
    return fit;
}

}  // namespace delaunay
