#pragma once

// =============================================================================
// Band structure of the mode operators
//
//   L_j psi = u^{-4/(n-2)} (psi'' + lambda_j psi) + 2 u^{-(n+2)/(n-2)} u' psi'
//             + n psi,            lambda_j = -j (j + n - 2),
//
// via the self-adjoint Sturm-Liouville reduction obtained by multiplying
// L_j psi = sigma psi through by the weight u^{2n/(n-2)}:
//
//   (P psi')' + Q_j psi = sigma W psi,
//   P = u^2,  Q_j = lambda_j u^2 + n u^{2n/(n-2)},  W = u^{2n/(n-2)}.
//
// The first-order system for (psi, P psi') is trace-free, so the period map
// has determinant one and the spectral bands are exactly { |tr M| <= 2 }.
// Bands are reported for -L (positive-operator convention), i.e. the scan
// parameter s enters as sigma = -s.
// =============================================================================

#include <cmath>
#include <cstdint>
#include <vector>

#include "delaunay/numerics.hpp"
#include "delaunay/orbit.hpp"

namespace delaunay {

// =============================================================================
// Cross-sectional modes
// =============================================================================

/// Spherical-harmonic band on S^{n-1}: degree, Laplacian eigenvalue with the
/// sign convention lambda_j = -j(j+n-2), and multiplicity.
struct SphereMode {
    int j = 0;
    double lambda = 0;
    std::int64_t multiplicity = 1;
};

namespace detail {
[[nodiscard]] inline std::int64_t binomial(int a, int b) {
    if (b < 0 || b > a) return 0;
    std::int64_t r = 1;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
}
}  // namespace detail

/// Degree-j eigenspace dimension on S^{n-1}.
[[nodiscard]] inline std::int64_t sphere_mode_multiplicity(int n, int j) {
    const int m = n - 1;  // sphere dimension
    if (j == 0) return 1;
    return detail::binomial(m + j, j) - detail::binomial(m + j - 2, j - 2);
}

[[nodiscard]] inline std::vector<SphereMode> sphere_modes(int n, int j_max) {
    validate_dimension(n);
    std::vector<SphereMode> out;
    out.reserve(j_max + 1);
    for (int j = 0; j <= j_max; ++j)
        out.push_back({j, mode_lambda(n, j), sphere_mode_multiplicity(n, j)});
    return out;
}

// =============================================================================
// Sturm-Liouville form
// =============================================================================

struct SturmLiouvilleForm {
    const PeriodicOrbit* orbit = nullptr;
    SphereMode mode;

    [[nodiscard]] double P(double t) const {
        const double u = orbit->u(t);
        return u * u;
    }
    [[nodiscard]] double Q(double t) const {
        const int n = orbit->n;
        const double u = orbit->u(t);
        return mode.lambda * u * u + n * std::pow(u, 2.0 * n / (n - 2.0));
    }
    [[nodiscard]] double W(double t) const {
        const int n = orbit->n;
        return std::pow(orbit->u(t), 2.0 * n / (n - 2.0));
    }
};

[[nodiscard]] inline SturmLiouvilleForm sl_form(const PeriodicOrbit& orbit,
                                                const SphereMode& mode) {
    return {&orbit, mode};
}

[[nodiscard]] inline SturmLiouvilleForm sl_form(const PeriodicOrbit& orbit, int j) {
    return {&orbit, SphereMode{j, mode_lambda(orbit.n, j),
                               sphere_mode_multiplicity(orbit.n, j)}};
}

/// W^{-1} [(P psi')' + Q psi] evaluated from an explicit jet; equals
/// L_j psi pointwise (the reduction is an identity, checked in the tests).
[[nodiscard]] inline double sl_apply(const SturmLiouvilleForm& sl, const ScalarJet2& psi,
                                     double t) {
    const PeriodicOrbit& o = *sl.orbit;
    const double u = o.u(t), v = o.v(t);
    // (P psi')' = P psi'' + P' psi',  P' = 2 u u'
    const double val = sl.P(t) * psi.d2 + 2.0 * u * v * psi.d1 + sl.Q(t) * psi.value;
    return val / sl.W(t);
}

// =============================================================================
// Monodromy
// =============================================================================

/// Period map of (psi, P psi') over [0, T] at spectral parameter sigma
/// (convention: L_j psi = sigma psi). det M = 1 up to integrator error.
struct MonodromyResult {
    double sigma = 0;
    Matrix2 M;
    std::array<std::complex<double>, 2> multipliers;
    double discriminant = 0;  ///< trace of M
    bool defective = false;   ///< unipotent Jordan block at |tr| = 2
};

struct MonodromyOptions {
    Tolerance tol{1e-12, 1e-11};
    double max_step = 0.5;
    /// |tr - 2| below this, with off-diagonal above it, classifies the
    /// Jordan-block case.
    double defect_threshold = 1e-7;
};

[[nodiscard]] inline MonodromyResult monodromy(const SturmLiouvilleForm& sl, double sigma,
                                               const MonodromyOptions& opts = {}) {
    const PeriodicOrbit& o = *sl.orbit;
    auto field = [&](double t, std::span<const double> y, std::span<double> dy) {
        const double P = sl.P(t);
        const double c = sigma * sl.W(t) - sl.Q(t);
        // columns (y0,y1) and (y2,y3) of the fundamental matrix
        dy[0] = y[1] / P;
        dy[1] = c * y[0];
        dy[2] = y[3] / P;
        dy[3] = c * y[2];
    };
    auto yT = integrate_final(field, {1.0, 0.0, 0.0, 1.0}, 0.0, o.T, opts.tol,
                              opts.max_step);
    MonodromyResult res;
    res.sigma = sigma;
    res.M = Matrix2{yT[0], yT[2], yT[1], yT[3]};
    const auto eig = eigen_2x2(res.M);
    res.multipliers = eig.values;
    res.discriminant = res.M.trace();
    const double off = std::max(std::abs(res.M.m01), std::abs(res.M.m10));
    res.defective = std::abs(res.discriminant - 2.0) < opts.defect_threshold &&
                    off > opts.defect_threshold;
    return res;
}

// =============================================================================
// Band structure (spectrum of -L_j)
// =============================================================================

struct Interval {
    double lo = 0, hi = 0;
};

struct BandStructure {
    SphereMode mode;
    double window_lo = 0, window_hi = 0;
    std::size_t resolution = 0;
    std::vector<Interval> bands;  ///< closed intervals, |disc| <= 2
    std::vector<Interval> gaps;   ///< open complementary intervals inside the window
    std::vector<double> scan_sigma;
    std::vector<double> scan_discriminant;

    [[nodiscard]] double lowest_edge() const {
        if (bands.empty()) throw error("BandStructure: no band in the window");
        return bands.front().lo;
    }
};

struct BandOptions {
    std::size_t resolution = 2000;
    double edge_tol = 1e-9;
    MonodromyOptions mono{};
};

/// Scan the Floquet discriminant of -L_j over [s_lo, s_hi] and assemble
/// bands (|disc| <= 2) and gaps, refining every band edge by bracketed
/// root finding on |disc| - 2.
[[nodiscard]] inline BandStructure band_structure(const SturmLiouvilleForm& sl,
                                                  double s_lo, double s_hi,
                                                  const BandOptions& opts = {}) {
    if (!(s_hi > s_lo)) throw validation_error("band_structure: empty window");
    BandStructure out;
    out.mode = sl.mode;
    out.window_lo = s_lo;
    out.window_hi = s_hi;
    out.resolution = opts.resolution;

    auto disc = [&](double s) { return monodromy(sl, -s, opts.mono).discriminant; };

    out.scan_sigma = linspace(s_lo, s_hi, opts.resolution);
    out.scan_discriminant.reserve(opts.resolution);
    for (double s : out.scan_sigma) out.scan_discriminant.push_back(disc(s));

    auto inside = [](double d) { return std::abs(d) <= 2.0; };

    // a jump from disc > 2 to disc < -2 between neighbours means an entire
    // band was stepped over
    for (std::size_t i = 0; i + 1 < out.scan_sigma.size(); ++i) {
        const double d0 = out.scan_discriminant[i], d1 = out.scan_discriminant[i + 1];
        if (!inside(d0) && !inside(d1) && d0 * d1 < 0.0)
            throw error("band_structure: resolution too coarse "
                        "(band skipped between scan points)");
    }

    auto refine_edge = [&](double a, double b) {
        // |disc| crosses 2 in [a, b]; locate the crossing of the signed
        // quantity that actually changes sign there
        const double da = disc(a);
        const double lim = (da > 2.0 || disc(b) > 2.0) ? 2.0 : -2.0;
        return find_root_bracketed([&](double s) { return disc(s) - lim; }, a, b,
                                   opts.edge_tol);
    };

    std::vector<Interval> bands;
    std::size_t i = 0;
    const std::size_t m = out.scan_sigma.size();
    while (i < m) {
        if (!inside(out.scan_discriminant[i])) { ++i; continue; }
        std::size_t jimax = i;
        while (jimax + 1 < m && inside(out.scan_discriminant[jimax + 1])) ++jimax;
        double lo = out.scan_sigma[i];
        double hi = out.scan_sigma[jimax];
        if (i > 0) lo = refine_edge(out.scan_sigma[i - 1], out.scan_sigma[i]);
        if (jimax + 1 < m) hi = refine_edge(out.scan_sigma[jimax], out.scan_sigma[jimax + 1]);
        bands.push_back({lo, hi});
        i = jimax + 1;
    }
    out.bands = std::move(bands);
    for (std::size_t k = 0; k + 1 < out.bands.size(); ++k)
        out.gaps.push_back({out.bands[k].hi, out.bands[k + 1].lo});
    return out;
}

/// Gap check at sigma = 0: true when 0 lies in a
/// spectral gap of L_j; margin = |disc(0)| - 2 (positive inside a gap).
struct GapCheck {
    bool zero_in_gap = false;
    double margin = 0;
};

[[nodiscard]] inline GapCheck check_zero_not_in_spec(const PeriodicOrbit& orbit, int j,
                                                     const MonodromyOptions& opts = {}) {
    if (j < 0) throw validation_error("check_zero_not_in_spec: j must be >= 0");
    const auto mono = monodromy(sl_form(orbit, j), 0.0, opts);
    GapCheck out;
    out.margin = std::abs(mono.discriminant) - 2.0;
    out.zero_in_gap = out.margin > 0.0;
    return out;
}

// =============================================================================
// Conjugation identity (zeroth-order term of u^{-p} L_1 u^{p}, p = 2/(n-2))
// =============================================================================

/// sup_t | A(t) - (4n/(n-2)^2) u^{-2n/(n-2)} H(eps) | where A is the
/// zeroth-order bracket of the conjugated operator. Exact up to energy drift.
[[nodiscard]] inline double conjugation_identity(const PeriodicOrbit& orbit,
                                                 std::size_t samples = 512) {
    const int n = orbit.n;
    const double p = 2.0 / (n - 2.0);
    double sup = 0;
    for (double t : linspace(0.0, orbit.equilibrium ? 1.0 : orbit.T, samples)) {
        const double u = orbit.u(t), ut = orbit.v(t);
        const double upow = std::pow(u, 2.0 * n / (n - 2.0));
        const double bracket =
            p * (p + 1.0) * ut * ut +
            (p * detail::sq(n - 2.0) / 4.0 + 1.0 - n) * u * u +
            (n - p * n * (n - 2.0) / 4.0) * upow;
        const double A = bracket / upow;
        const double target = 4.0 * n / detail::sq(n - 2.0) / upow * orbit.H;
        sup = std::max(sup, std::abs(A - target));
    }
    return sup;
}

/// Closed-form zeroth-order value at eps = ubar (constant orbit):
/// A = (4n/(n-2)^2) ubar^{-2n/(n-2)} H(ubar), a negative constant.
[[nodiscard]] inline double conjugation_constant_at_ubar(int n) {
    const double ub = equilibrium_ubar(n);
    return 4.0 * n / detail::sq(n - 2.0) *
           std::pow(ub, -2.0 * n / (n - 2.0)) * potential(n, ub);
}

}  // namespace delaunay
