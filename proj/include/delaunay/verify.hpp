#pragma once

// =============================================================================
// The verification catalog: every quantitative claim the library reproduces,
// organized as thirteen numbered criteria. Each check pins its bound in
// code; run_verification evaluates them and reports measured value vs bound.
// Shared by the acceptance test binary and the `verify` CLI command.
// =============================================================================

#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "delaunay/indicial.hpp"
#include "delaunay/jacobi.hpp"
#include "delaunay/floquet.hpp"
#include "delaunay/numerics.hpp"
#include "delaunay/orbit.hpp"
#include "delaunay/pohozaev.hpp"

namespace delaunay {

struct CheckResult {
    std::string id;    ///< criterion tag, "C1".."C13"
    std::string name;
    double measured = 0;
    double bound = 0;  ///< pass iff measured <= bound
    bool pass = false;
};

struct VerifyOptions {
    double tighten = 1.0;  ///< divide every bound by this factor
    std::string only;      ///< substring filter on id or name
};

namespace detail {

class VerifyRun {
public:
    explicit VerifyRun(const VerifyOptions& opts) : opts_(opts) {}

    [[nodiscard]] std::vector<CheckResult> take() { return std::move(results_); }

    void check(const std::string& id, const std::string& name, double measured,
               double bound) {
        if (!opts_.only.empty() && id.find(opts_.only) == std::string::npos &&
            name.find(opts_.only) == std::string::npos)
            return;
        CheckResult r;
        r.id = id;
        r.name = name;
        r.measured = measured;
        r.bound = bound / opts_.tighten;
        r.pass = measured <= r.bound;
        results_.push_back(r);
    }

    [[nodiscard]] bool wanted(const std::string& id, const std::string& hint) const {
        if (opts_.only.empty()) return true;
        return id.find(opts_.only) != std::string::npos ||
               hint.find(opts_.only) != std::string::npos;
    }

    const PeriodicOrbit& orbit(int n, double eps) {
        const auto key = std::make_pair(n, static_cast<long long>(eps * 1e12));
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            // tight enough for the 1e-8/1e-9 agreement bounds below
            const Tolerance tol{1e-13, 1e-12};
            OrbitOptions opts;
            opts.max_step = 0.02;
            it = cache_.emplace(key, solve_orbit(n, eps, tol, opts)).first;
        }
        return it->second;
    }

private:
    VerifyOptions opts_;
    std::vector<CheckResult> results_;
    std::map<std::pair<int, long long>, PeriodicOrbit> cache_;
};

inline std::vector<double> eps_fraction_grid() {
    std::vector<double> f;
    for (int i = 1; i <= 19; ++i) f.push_back(0.05 * i);
    return f;
}

[[nodiscard]] inline std::string format_eps(double eps) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%.4g", eps);
    return buf;
}

// ---- C1: n = 4 closed form ------------------------------------------------
inline void criterion_1(VerifyRun& run) {
    if (!run.wanted("C1", "n4 closed form")) return;
    const double ub = equilibrium_ubar(4);
    for (double eps : {0.1, 0.3, 0.5, 0.7 * ub}) {
        const auto& orbit = run.orbit(4, eps);
        double sup = 0;
        for (double r : linspace(0.0, 2.0 * std::numbers::pi, 48)) {
            const double t = orbit.t_of_r(r);
            sup = std::max(sup, std::abs(orbit.u(t) - closed_form_n4(eps, r)));
        }
        const std::string tag = " (eps = " + format_eps(eps) + ")";
        run.check("C1", "n4 closed form pointwise" + tag, sup, 1e-7);
        run.check("C1", "n4 period R = pi" + tag,
                  std::abs(orbit.R - std::numbers::pi), 1e-8);
    }
}

// ---- C2: period limits ------------------------------------------------------
inline void criterion_2(VerifyRun& run) {
    if (!run.wanted("C2", "period limits")) return;
    for (int n : {3, 4, 5, 6}) {
        const double ub = equilibrium_ubar(n);
        const auto& near_ub = run.orbit(n, 0.999 * ub);
        const auto& tiny = run.orbit(n, 1e-3);
        const std::string tag = " (n = " + std::to_string(n) + ")";
        run.check("C2", "R near ubar -> 2pi/sqrt(n)" + tag,
                  std::abs(near_ub.R - 2.0 * std::numbers::pi / std::sqrt(n)), 1e-2);
        run.check("C2", "R near 0 -> pi" + tag, std::abs(tiny.R - std::numbers::pi),
                  5e-2);
        run.check("C2", "T near ubar -> 2pi/sqrt(n-2)" + tag,
                  std::abs(near_ub.T - 2.0 * std::numbers::pi / std::sqrt(n - 2.0)),
                  1e-2);
    }
}

// ---- C3: energy conservation and period oracle agreement -------------------
inline void criterion_3(VerifyRun& run) {
    if (!run.wanted("C3", "conservation and oracle agreement")) return;
    for (int n : {3, 4, 5, 6}) {
        const double ub = equilibrium_ubar(n);
        double drift = 0, dT = 0, dR = 0;
        for (double f : eps_fraction_grid()) {
            const auto& orbit = run.orbit(n, f * ub);
            drift = std::max(drift, orbit.h_drift);
            dT = std::max(dT, std::abs(orbit.T - period_T_oracle(n, f * ub)));
            dR = std::max(dR, std::abs(orbit.R - period_R_oracle(n, f * ub)));
        }
        const std::string tag = " (n = " + std::to_string(n) + ", grid)";
        run.check("C3", "H drift per period" + tag, drift, 1e-9);
        run.check("C3", "|T_ode - T_oracle|" + tag, dT, 1e-8);
        run.check("C3", "|R_ode - R_oracle|" + tag, dR, 1e-8);
    }
}

// ---- C4: Jacobi field exactness and drift relation --------------------------
inline void criterion_4(VerifyRun& run) {
    if (!run.wanted("C4", "jacobi exactness")) return;
    // Residuals are measured two ways. The scale-invariant (backward-error)
    // form covers the whole grid: near the small-eps end the raw residual
    // inherits the operator coefficient u^{-4/(n-2)} and the e^{2T} growth
    // of phi3, so an absolute 1e-7 only makes sense where those scales are
    // O(1) -- asserted separately on the midrange grid.
    Phi2Options p2o;
    p2o.t_lo_periods = -0.1;
    p2o.t_hi_periods = 2.2;
    for (int n : {3, 4, 5, 6}) {
        const double ub = equilibrium_ubar(n);
        double rel = 0, drift_err = 0;
        for (double f : eps_fraction_grid()) {
            const auto& orbit = run.orbit(n, f * ub);
            const auto f2 = phi2(orbit, p2o);
            rel = std::max(rel,
                           jacobi_residual_relative_sup(phi1(orbit), 0.0, 2.0 * orbit.T));
            rel = std::max(rel, jacobi_residual_relative_sup(f2, 0.0, 2.0 * orbit.T));
            rel = std::max(rel,
                           jacobi_residual_relative_sup(phi3(orbit), 0.0, 2.0 * orbit.T));
            rel = std::max(rel,
                           jacobi_residual_relative_sup(phi4(orbit), 0.0, 2.0 * orbit.T));
            const double tp_fd = period_T_derivative_fd(n, f * ub);
            const double tp = phi2_drift_coefficient(f2);
            drift_err = std::max(drift_err, std::abs(tp - tp_fd) / std::abs(tp_fd));
        }
        double r1 = 0, r2 = 0, r3 = 0, r4 = 0;
        for (double f : {0.25, 0.4, 0.55, 0.7, 0.9}) {
            const auto& orbit = run.orbit(n, f * ub);
            const auto f2 = phi2(orbit, p2o);
            r1 = std::max(r1, jacobi_residual_sup(phi1(orbit), 0.0, 2.0 * orbit.T));
            r2 = std::max(r2, jacobi_residual_sup(f2, 0.0, 2.0 * orbit.T));
            // phi3 carries an e^{2T} amplitude; normalize by the field sup
            const auto f3 = phi3(orbit);
            const double f3sup = std::abs(f3.value(2.0 * orbit.T));
            r3 = std::max(r3, jacobi_residual_sup(f3, 0.0, 2.0 * orbit.T) /
                                  std::max(1.0, f3sup));
            r4 = std::max(r4, jacobi_residual_sup(phi4(orbit), 0.0, 2.0 * orbit.T));
        }
        const std::string tag = " (n = " + std::to_string(n) + ")";
        run.check("C4", "relative residual, all fields, full grid" + tag, rel, 1e-7);
        run.check("C4", "sup |L0 phi1|, midrange" + tag, r1, 1e-7);
        run.check("C4", "sup |L0 phi2|, midrange" + tag, r2, 1e-7);
        run.check("C4", "sup |L1 phi3| / sup |phi3|, midrange" + tag, r3, 1e-7);
        run.check("C4", "sup |L1 phi4|, midrange" + tag, r4, 1e-7);
        run.check("C4", "phi2 drift vs finite-difference T'" + tag, drift_err, 1e-3);
    }
}

// ---- C5: conjugation identity ----------------------------------------------
inline void criterion_5(VerifyRun& run) {
    if (!run.wanted("C5", "conjugation identity")) return;
    // The identity error is the energy drift amplified by u^{-2n/(n-2)}, so
    // the 1e-9 bound is checked with tightly integrated orbits on the part
    // of the grid where double precision can carry it (eps >= 0.4 ubar);
    // see the orbit module tests for the scaling law at the small-eps end.
    const Tolerance tight{1e-14, 1e-13};
    OrbitOptions opts;
    opts.max_step = 0.02;
    for (int n : {3, 4, 5, 6}) {
        const double ub = equilibrium_ubar(n);
        double sup = 0;
        for (double f : {0.4, 0.55, 0.7, 0.85, 0.95})
            sup = std::max(sup,
                           conjugation_identity(solve_orbit(n, f * ub, tight, opts)));
        run.check("C5", "conjugation identity (n = " + std::to_string(n) + ", grid)",
                  sup, 1e-9);
    }
    run.check("C5", "conjugation identity (n = 4, eps = 0.5)",
              conjugation_identity(solve_orbit(4, 0.5, tight, opts)), 1e-9);
    run.check("C5", "conjugation identity (n = 3, eps = 0.3)",
              conjugation_identity(solve_orbit(3, 0.3, tight, opts)), 1e-9);
}

// ---- C6: band structure ------------------------------------------------------
inline void criterion_6(VerifyRun& run) {
    if (!run.wanted("C6", "band structure")) return;
    for (int n : {3, 4, 5, 6}) {
        const auto& eq = run.orbit(n, equilibrium_ubar(n));
        const std::string tag = " (n = " + std::to_string(n) + ")";
        auto b0 = band_structure(sl_form(eq, 0), -(n + 1.0), 5.0);
        run.check("C6", "lowest edge of -L0 at ubar = -n" + tag,
                  std::abs(b0.lowest_edge() + n), 1e-6);
        const double edge1 = n / (n - 2.0);
        auto b1 = band_structure(sl_form(eq, 1), edge1 - 3.0, edge1 + 4.0);
        run.check("C6", "lowest edge of -L1 at ubar = n/(n-2)" + tag,
                  std::abs(b1.lowest_edge() - edge1), 1e-6);
    }
    // gap containing -3n/4 for eps slightly below ubar (n = 4)
    const auto& orbit = run.orbit(4, 0.98 * equilibrium_ubar(4));
    auto b = band_structure(sl_form(orbit, 0), -5.0, 1.0);
    double containment = 1.0;  // 0 when some gap contains -3
    for (const auto& g : b.gaps)
        if (g.lo < -3.0 && -3.0 < g.hi) containment = 0.0;
    run.check("C6", "gap of -L0 containing -3n/4 (n = 4, eps = 0.98 ubar)",
              containment, 0.5);
}

// ---- C7: gap membership for j >= 1 -----------------------------------------
inline void criterion_7(VerifyRun& run) {
    if (!run.wanted("C7", "zero in a gap")) return;
    for (int n : {3, 4, 5, 6}) {
        const double ub = equilibrium_ubar(n);
        double worst = std::numeric_limits<double>::infinity();
        for (double f : eps_fraction_grid()) {
            const auto& orbit = run.orbit(n, f * ub);
            for (int j = 1; j <= n + 2; ++j)
                worst = std::min(worst, check_zero_not_in_spec(orbit, j).margin);
        }
        // pass when even the smallest margin is positive
        run.check("C7", "min_j,eps (|disc_j(0)| - 2) > 0 (n = " + std::to_string(n) +
                            ")", -worst, 0.0);
    }
}

// ---- C8: indicial exponents ---------------------------------------------------
inline void criterion_8(VerifyRun& run) {
    if (!run.wanted("C8", "indicial exponents")) return;
    for (int n : {3, 4, 5, 6}) {
        const double ub = equilibrium_ubar(n);
        double trace_dev = 0, mode1_dev = 0, asym = 0;
        for (double f : eps_fraction_grid()) {
            const auto& orbit = run.orbit(n, f * ub);
            const auto m0 = monodromy(sl_form(orbit, 0), 0.0);
            trace_dev = std::max(trace_dev, std::abs(m0.discriminant - 2.0));
            const auto ex1 = floquet_exponents(orbit, 1);
            mode1_dev = std::max(mode1_dev, std::abs(ex1.back().gamma - 1.0));
            const auto set = indicial_set(orbit, n + 2);
            for (const auto& e : set.entries) {
                if (std::abs(e.gamma) < 1e-9) continue;
                double best = 1e9;
                for (const auto& q : set.entries)
                    if (q.mode == e.mode)
                        best = std::min(best, std::abs(q.gamma + e.gamma));
                asym = std::max(asym, best);
            }
        }
        const std::string tag = " (n = " + std::to_string(n) + ", grid)";
        run.check("C8", "mode-0 unipotent trace" + tag, trace_dev, 1e-7);
        run.check("C8", "mode-1 exponents +-1" + tag, mode1_dev, 1e-6);
        run.check("C8", "exponent set symmetric under negation" + tag, asym, 1e-9);
    }
}

// ---- C9: relative index -------------------------------------------------------
inline void criterion_9(VerifyRun& run) {
    if (!run.wanted("C9", "relative index")) return;
    const double ub = equilibrium_ubar(4);
    const std::vector<std::vector<double>> configs = {
        {0.5, 0.5},
        {0.5, 0.4 * ub, 0.3},
        {0.5, 0.5, 0.6 * ub, 0.25},
        {0.5, 0.45, 0.6 * ub, 0.3, 0.8 * ub}};
    for (const auto& ends : configs) {
        const auto res = relative_index({4, ends});
        const int k = static_cast<int>(ends.size());
        const double defect = std::abs(res.rel_index - 2 * k) +
                              std::abs(res.dim_bounded_nullspace - k);
        run.check("C9", "relative index = (2k, k), k = " + std::to_string(k), defect,
                  0.5);
    }
}

// ---- C10: Pohozaev suite -------------------------------------------------------
inline void criterion_10(VerifyRun& run) {
    if (!run.wanted("C10", "pohozaev")) return;
    {
        const auto& orbit = run.orbit(4, 0.5);
        const auto Xd = axis_dilation(4);
        const double ref = invariant(orbit, Xd, 0.0);
        double dev = 0;
        for (double s : {0.2, 0.37, 0.55, 0.8})
            dev = std::max(dev, std::abs(invariant(orbit, Xd, s * orbit.T) - ref));
        run.check("C10", "pohozaev section independence (n = 4, eps = 0.5)", dev, 1e-8);
        run.check("C10", "pohozaev k=2 balancing (n = 4, eps = 0.5)",
                  balancing_check(orbit, Xd, 0.6 * orbit.T), 1e-8);
    }
    for (int n : {3, 4, 5, 6}) {
        const double ub = equilibrium_ubar(n);
        const std::string tag = " (n = " + std::to_string(n) + ")";
        std::vector<double> grid;
        for (double f : eps_fraction_grid()) grid.push_back(f * ub);
        const auto cal = calibrate_cn(n, grid);
        run.check("C10", "pohozaev D/H ratio constancy" + tag,
                  cal.max_relative_deviation, 1e-6);

        double scal_dev = 0, min_drop = std::numeric_limits<double>::infinity();
        double prevH = std::numeric_limits<double>::infinity();
        for (double f : eps_fraction_grid()) {
            const auto& orbit = run.orbit(n, f * ub);
            for (double s : {0.15, 0.45, 0.75}) {
                const auto sec = tracefree_ricci(orbit, s * orbit.T);
                scal_dev = std::max(scal_dev, std::abs(sec.scalar - n * (n - 1.0)));
            }
            if (prevH < std::numeric_limits<double>::infinity())
                min_drop = std::min(min_drop, prevH - orbit.H);
            prevH = orbit.H;
        }
        run.check("C10", "pohozaev scalar curvature R = n(n-1)" + tag, scal_dev, 1e-8);
        run.check("C10", "pohozaev H strictly decreasing" + tag, -min_drop, 0.0);
    }
}

// ---- C11: Lagrangian pairing ---------------------------------------------------
inline void criterion_11(VerifyRun& run) {
    if (!run.wanted("C11", "wronskian and isotropy")) return;
    for (double eps : {0.3, 0.5, 0.65}) {
        const auto& orbit = run.orbit(4, eps);
        const auto f1 = phi1(orbit);
        const auto f2 = phi2(orbit);
        auto w12 = wronskian_pairing(f1, f2, 0.0, 2.0 * orbit.T);
        auto [mean, dev] = constancy(w12);
        const std::string tag = " (n = 4, eps = " + format_eps(eps) + ")";
        run.check("C11", "wronskian u^2 W relative constancy" + tag,
                  dev / std::abs(mean), 1e-8);
        run.check("C11", "wronskian nonzero" + tag,
                  (std::abs(mean) > 1e-6) ? 0.0 : 1.0, 0.5);
    }
    {
        const auto& orbit = run.orbit(4, 0.5);
        const auto f1 = phi1(orbit);
        const auto f2 = phi2(orbit);
        auto grid = linspace(5.0 * orbit.T, 9.0 * orbit.T, 320);
        auto coeffs_of = [&](const JacobiField& f) {
            CylinderFunction e1, e2;
            e1.grid = grid;
            e2.grid = grid;
            for (double t : grid) {
                e1.values.push_back(f.value(t));
                e2.values.push_back(f.value(-t));
            }
            auto fit1 = extract_deficiency_coefficients(e1, orbit);
            auto fit2 = extract_deficiency_coefficients(e2, orbit);
            return DeficiencyCoefficients{{fit1.a, fit2.a}, {fit1.b, fit2.b}};
        };
        const auto c1 = coeffs_of(f1), c2 = coeffs_of(f2);
        double worst = std::abs(symplectic_form(c1, c2));
        worst = std::max(worst, std::abs(symplectic_form(c1, c1)));
        worst = std::max(worst, std::abs(symplectic_form(c2, c2)));
        run.check("C11", "k=2 bounded-nullspace image isotropic", worst, 1e-10);
    }
}

// ---- C12: Fourier-Laplace diagnostic -------------------------------------------
inline void criterion_12(VerifyRun& run) {
    if (!run.wanted("C12", "fourier-laplace")) return;
    using cplx = std::complex<double>;
    auto hexp = [](double t) { return t >= 0.0 ? std::exp(-t) : 0.0; };
    double geo = 0;
    for (double t : {0.0, 0.3, 0.8})
        for (cplx z : {cplx(0.4, -0.4), cplx(1.7, 0.2)}) {
            const cplx expect =
                std::exp(-t) / (1.0 - std::exp(cplx(-1.0, 0.0) - cplx(0, 1) * z));
            geo = std::max(geo, std::abs(fourier_laplace(hexp, t, z) - expect));
        }
    run.check("C12", "geometric-series closed form", geo, 1e-10);

    double hol = 0;
    auto hmix = [](double t) {
        return t >= 0.0 ? std::exp(-0.7 * t) * (1.0 + 0.5 * std::cos(2.1 * t)) : 0.0;
    };
    for (double t : {0.15, 0.6})
        for (cplx z : {cplx(0.9, -0.2), cplx(2.4, 0.1)}) {
            const cplx lhs = fourier_laplace(hmix, t + 1.0, z);
            const cplx rhs = std::exp(cplx(0, 1) * z) * fourier_laplace(hmix, t, z);
            hol = std::max(hol, std::abs(lhs - rhs));
        }
    run.check("C12", "holonomy relation", hol, 1e-10);

    auto hcomp = [](double t) {
        if (t <= 0.0 || t >= 5.0) return 0.0;
        const double s = t * (5.0 - t);
        return s * s * std::sin(1.7 * t);
    };
    auto hhat = [&](double tt, cplx z) { return fourier_laplace(hcomp, tt, z); };
    double rt = 0;
    for (double t : {0.4, 1.3, 2.75, 4.1, 6.5})
        rt = std::max(rt, std::abs(fourier_laplace_inverse(hhat, t, -0.4) - hcomp(t)));
    run.check("C12", "transform/inverse round trip", rt, 1e-8);
}

// ---- C13: asymptote fitting -----------------------------------------------------
inline void criterion_13(VerifyRun& run) {
    if (!run.wanted("C13", "asymptote fitting")) return;
    const auto& truth = run.orbit(4, 0.4);
    CylinderFunction w;
    w.grid = linspace(0.0, 6.0 * truth.T, 512);
    for (double t : w.grid)
        w.values.push_back(truth.u(t + 0.3) * (1.0 + 0.01 * std::exp(-1.0 * t)));
    const auto fit = fit_asymptote(w, 4);
    run.check("C13", "manufactured fit: eps", std::abs(fit.eps - 0.4), 1e-4);
    const double eta_mod =
        std::fmod(fit.eta - 0.3 + 16.0 * truth.T, truth.T);
    run.check("C13", "manufactured fit: eta (mod T)",
              std::min(eta_mod, truth.T - eta_mod), 1e-4);
    run.check("C13", "manufactured fit: alpha", std::abs(fit.alpha - 1.0), 1e-3);

    const auto& truth2 = run.orbit(4, 0.45);
    const double g1 = sharp_decay_rate(truth2, 6);
    CylinderFunction w2;
    w2.grid = linspace(0.0, 6.0 * truth2.T, 512);
    for (double t : w2.grid)
        w2.values.push_back(truth2.u(t) * (1.0 + 0.02 * std::exp(-g1 * t)));
    const auto fit2 = fit_asymptote(w2, 4);
    run.check("C13", "alpha consistent with gamma_1", std::abs(fit2.alpha - g1), 1e-3);
}

}  // namespace detail

/// Evaluate the whole catalog (or the subset matching opts.only).
[[nodiscard]] inline std::vector<CheckResult> run_verification(
    const VerifyOptions& opts = {}) {
    detail::VerifyRun run(opts);
    detail::criterion_1(run);
    detail::criterion_2(run);
    detail::criterion_3(run);
    detail::criterion_4(run);
    detail::criterion_5(run);
    detail::criterion_6(run);
    detail::criterion_7(run);
    detail::criterion_8(run);
    detail::criterion_9(run);
    detail::criterion_10(run);
    detail::criterion_11(run);
    detail::criterion_12(run);
    detail::criterion_13(run);
    return run.take();
}

}  // namespace delaunay
