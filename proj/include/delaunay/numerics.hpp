#pragma once

// =============================================================================
// Shared numerical kernels: adaptive Runge-Kutta integration with dense
// output, event location, bracketed root finding, adaptive Gauss-Kronrod
// quadrature (with square-root endpoint handling), and 2x2 eigensolves.
//
// Everything here is a pure function of its inputs; results are immutable
// value types and may be shared freely across threads.
// =============================================================================

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace delaunay {

// =============================================================================
// Errors
// =============================================================================

/// Base class for all failures raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input validation failure (bad dimension, parameter out of range, ...).
class validation_error : public error {
public:
    using error::error;
};

/// Step-size underflow or other integrator breakdown; carries the failing t.
class integration_error : public error {
public:
    integration_error(const std::string& what, double t_fail)
        : error(what + " (at t = " + std::to_string(t_fail) + ")"), t(t_fail) {}
    double t;
};

/// Requested event never triggered within the integration horizon.
class event_not_found : public error {
public:
    using error::error;
};

/// Quadrature did not converge within the refinement budget.
class quadrature_error : public error {
public:
    using error::error;
};

/// Root finder was handed an invalid bracket or failed to converge.
class bracketing_error : public error {
public:
    using error::error;
};

/// Nonlinear or linear fit failure (non-convergence, ill conditioning).
class fit_error : public error {
public:
    using error::error;
};

// =============================================================================
// Tolerance
// =============================================================================

/// Absolute/relative tolerance pair used by the integrator and, scaled,
/// by everything built on top of it. Both must be strictly positive.
struct Tolerance {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;

    void validate() const {
        if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
            throw validation_error("Tolerance: abs_tol and rel_tol must be > 0");
    }
};

namespace detail {
inline double sq(double x) { return x * x; }
}  // namespace detail

// =============================================================================
// Trajectory: dense output of one integration
// =============================================================================

/// Result of integrate_ivp: strictly monotone knot times plus per-step
/// interpolation coefficients. eval() reproduces the knot states exactly
/// (theta = 0/1 collapses the interpolant onto the step endpoints) and is
/// 5th-order accurate in between.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::size_t dim, bool forward) : dim_(dim), forward_(forward) {}

    [[nodiscard]] std::size_t dim() const { return dim_; }
    [[nodiscard]] std::size_t steps() const { return knots_.empty() ? 0 : knots_.size() - 1; }
    [[nodiscard]] bool forward() const { return forward_; }
    [[nodiscard]] const std::vector<double>& times() const { return knots_; }
    [[nodiscard]] double t_begin() const { return knots_.front(); }
    [[nodiscard]] double t_end() const { return knots_.back(); }

    void reserve(std::size_t n_steps) {
        knots_.reserve(n_steps + 1);
        coef_.reserve(n_steps * 5 * dim_);
    }

    void set_initial(double t0) { knots_.assign(1, t0); }

    /// Append one accepted step; rcont is laid out as 5 blocks of dim values.
    void push_step(double t1, std::span<const double> rcont) {
        knots_.push_back(t1);
        coef_.insert(coef_.end(), rcont.begin(), rcont.end());
    }

    /// Interpolate all components at time t (t clamped to the covered range
    /// up to a small slack; anything further out is a logic error upstream).
    void eval(double t, std::span<double> out) const {
        const std::size_t s = locate(t);
        const double t0 = knots_[s], t1 = knots_[s + 1];
        const double h = t1 - t0;
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        const double* c = coef_.data() + s * 5 * dim_;
        for (std::size_t i = 0; i < dim_; ++i) {
            out[i] = c[i] + th * (c[dim_ + i] +
                     th1 * (c[2 * dim_ + i] +
                     th * (c[3 * dim_ + i] + th1 * c[4 * dim_ + i])));
        }
    }

    [[nodiscard]] std::vector<double> eval(double t) const {
        std::vector<double> out(dim_);
        eval(t, out);
        return out;
    }

    [[nodiscard]] double eval_component(double t, std::size_t i) const {
        const std::size_t s = locate(t);
        const double t0 = knots_[s], t1 = knots_[s + 1];
        const double th = (t - t0) / (t1 - t0);
        const double th1 = 1.0 - th;
        const double* c = coef_.data() + s * 5 * dim_;
        return c[i] + th * (c[dim_ + i] + th1 * (c[2 * dim_ + i] +
               th * (c[3 * dim_ + i] + th1 * c[4 * dim_ + i])));
    }

    /// State at knot index k (exact, no interpolation error).
    [[nodiscard]] std::vector<double> state(std::size_t k) const {
        return eval(knots_.at(k));
    }

private:
    [[nodiscard]] std::size_t locate(double t) const {
        if (knots_.size() < 2) throw error("Trajectory: empty");
        std::size_t lo;
        if (forward_) {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
            lo = static_cast<std::size_t>(std::distance(knots_.begin(), it));
        } else {
            auto it = std::upper_bound(knots_.begin(), knots_.end(), t, std::greater<>());
            lo = static_cast<std::size_t>(std::distance(knots_.begin(), it));
        }
        if (lo == 0) lo = 1;
        if (lo > steps()) lo = steps();
        return lo - 1;
    }

    std::size_t dim_ = 0;
    bool forward_ = true;
    std::vector<double> knots_;
    std::vector<double> coef_;  // steps * 5 * dim
};

// =============================================================================
// Dormand-Prince 5(4) with dense output
// =============================================================================

namespace detail {

struct Dopri5Tableau {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    // b - bhat (error estimator weights)
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    // dense-output weights
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;
};

/// Core adaptive loop. OnStep is called after each accepted step as
/// on_step(t0, t1, y1, k1, k7, rcont) where rcont spans 5*dim dense
/// coefficients; it may return false to stop the integration early.
template <class Field, class OnStep>
inline void dopri5_drive(Field&& f, std::vector<double> y, double t0, double t1,
                         const Tolerance& tol, double max_step, OnStep&& on_step) {
    using T = Dopri5Tableau;
    tol.validate();
    if (!(t1 != t0) || !std::isfinite(t0) || !std::isfinite(t1))
        throw validation_error("integrate_ivp: degenerate t_span");
    if (!(max_step > 0.0))
        throw validation_error("integrate_ivp: max_step must be > 0");

    const std::size_t d = y.size();
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);

    std::vector<double> k1(d), k2(d), k3(d), k4(d), k5(d), k6(d), k7(d);
    std::vector<double> ytmp(d), y1(d), err(d), rcont(5 * d);

    double t = t0;
    f(t, y, k1);

    // initial step: crude first guess, the controller fixes it up quickly
    double h = span;
    {
        double d0 = 0, d1n = 0;
        for (std::size_t i = 0; i < d; ++i) {
            const double sc = tol.abs_tol + tol.rel_tol * std::abs(y[i]);
            d0 += sq(y[i] / sc);
            d1n += sq(k1[i] / sc);
        }
        if (d1n > 0) h = 0.01 * std::sqrt(d0 / d1n);
        h = std::min({h, span, max_step});
        if (!(h > 0)) h = std::min(1e-6, span);
    }

    while (dir * (t1 - t) > 1e-14 * std::max(1.0, std::abs(t1))) {
        h = std::min(h, max_step);
        if (dir * (t + dir * h - t1) > 0) h = std::abs(t1 - t);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw integration_error("integrate_ivp: step-size underflow", t);
        const double hs = dir * h;

        for (std::size_t i = 0; i < d; ++i) ytmp[i] = y[i] + hs * T::a21 * k1[i];
        f(t + T::c2 * hs, ytmp, k2);
        for (std::size_t i = 0; i < d; ++i)
            ytmp[i] = y[i] + hs * (T::a31 * k1[i] + T::a32 * k2[i]);
        f(t + T::c3 * hs, ytmp, k3);
        for (std::size_t i = 0; i < d; ++i)
            ytmp[i] = y[i] + hs * (T::a41 * k1[i] + T::a42 * k2[i] + T::a43 * k3[i]);
        f(t + T::c4 * hs, ytmp, k4);
        for (std::size_t i = 0; i < d; ++i)
            ytmp[i] = y[i] + hs * (T::a51 * k1[i] + T::a52 * k2[i] + T::a53 * k3[i] +
                                   T::a54 * k4[i]);
        f(t + T::c5 * hs, ytmp, k5);
        for (std::size_t i = 0; i < d; ++i)
            ytmp[i] = y[i] + hs * (T::a61 * k1[i] + T::a62 * k2[i] + T::a63 * k3[i] +
                                   T::a64 * k4[i] + T::a65 * k5[i]);
        f(t + hs, ytmp, k6);
        for (std::size_t i = 0; i < d; ++i)
            y1[i] = y[i] + hs * (T::a71 * k1[i] + T::a73 * k3[i] + T::a74 * k4[i] +
                                 T::a75 * k5[i] + T::a76 * k6[i]);
        f(t + hs, y1, k7);  // FSAL

        double err_norm = 0;
        for (std::size_t i = 0; i < d; ++i) {
            err[i] = hs * (T::e1 * k1[i] + T::e3 * k3[i] + T::e4 * k4[i] +
                           T::e5 * k5[i] + T::e6 * k6[i] + T::e7 * k7[i]);
            const double sc =
                tol.abs_tol + tol.rel_tol * std::max(std::abs(y[i]), std::abs(y1[i]));
            err_norm += sq(err[i] / sc);
        }
        err_norm = std::sqrt(err_norm / static_cast<double>(d));

        if (err_norm <= 1.0) {
            // dense coefficients (Hairer's contd5 layout)
            for (std::size_t i = 0; i < d; ++i) {
                const double dy = y1[i] - y[i];
                const double bspl = hs * k1[i] - dy;
                rcont[i] = y[i];
                rcont[d + i] = dy;
                rcont[2 * d + i] = bspl;
                rcont[3 * d + i] = dy - hs * k7[i] - bspl;
                rcont[4 * d + i] = hs * (T::d1 * k1[i] + T::d3 * k3[i] + T::d4 * k4[i] +
                                         T::d5 * k5[i] + T::d6 * k6[i] + T::d7 * k7[i]);
            }
            const double t_new = t + hs;
            if (!on_step(t, t_new, std::span<const double>(y1),
                         std::span<const double>(rcont)))
                return;
            t = t_new;
            std::swap(y, y1);
            std::swap(k1, k7);
            const double fac = std::clamp(
                0.9 * std::pow(std::max(err_norm, 1e-10), -0.2), 0.2, 5.0);
            h = std::min(h * fac, max_step);
        } else {
            h *= std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 0.9);
        }
    }
}

}  // namespace detail

/// Default cap on the step size. Chosen so that the dense-output interpolant
/// (locally order 5) keeps its midpoint ODE residual below ~10x the default
/// tolerances; callers that only need endpoint accuracy may pass a larger cap.
inline constexpr double kDefaultMaxStep = 0.025;

/// Adaptive DOPRI5 integration of y' = f(t, y) over [t0, t1] (either
/// direction). Local error per step is controlled by tol; dense output is
/// available on the whole span through the returned Trajectory.
template <class Field>
[[nodiscard]] Trajectory integrate_ivp(Field&& f, std::vector<double> y0, double t0,
                                       double t1, const Tolerance& tol = {},
                                       double max_step = kDefaultMaxStep) {
    Trajectory traj(y0.size(), t1 > t0);
    traj.reserve(static_cast<std::size_t>(std::abs(t1 - t0) / max_step) + 16);
    traj.set_initial(t0);
    detail::dopri5_drive(f, std::move(y0), t0, t1, tol, max_step,
                         [&](double, double tn, std::span<const double>,
                             std::span<const double> rcont) {
                             traj.push_step(tn, rcont);
                             return true;
                         });
    return traj;
}

/// Endpoint-only integration (no dense storage); used by monodromy sweeps.
template <class Field>
[[nodiscard]] std::vector<double> integrate_final(Field&& f, std::vector<double> y0,
                                                  double t0, double t1,
                                                  const Tolerance& tol = {},
                                                  double max_step = 0.5) {
    std::vector<double> yl = y0;
    detail::dopri5_drive(f, std::move(y0), t0, t1, tol, max_step,
                         [&](double, double, std::span<const double> y1,
                             std::span<const double>) {
                             yl.assign(y1.begin(), y1.end());
                             return true;
                         });
    return yl;
}

// =============================================================================
// Event location
// =============================================================================

struct EventResult {
    double t = 0;
    std::vector<double> state;
};

/// Integrate until the scalar event function g(state) crosses zero in the
/// requested direction (+1: rising, -1: falling, 0: either), then refine the
/// crossing on the dense output with a bisection/secant hybrid until
/// |g| < tol.abs_tol. Throws event_not_found if the horizon is reached.
/// A zero of g at the initial state is ignored (detection arms once g != 0).
template <class Field, class Event>
[[nodiscard]] EventResult find_event(Field&& f, std::vector<double> y0, double t0,
                                     double t_horizon, Event&& g, int direction,
                                     const Tolerance& tol = {},
                                     double max_step = kDefaultMaxStep) {
    const std::size_t d = y0.size();
    double g_prev = g(std::span<const double>(y0));
    bool armed = (g_prev != 0.0);
    double t_prev = t0;

    EventResult result;
    bool found = false;
    std::vector<double> ymid(d);

    auto matches = [&](double ga, double gb) {
        if (ga * gb >= 0.0) return false;
        if (direction > 0) return ga < 0.0 && gb > 0.0;
        if (direction < 0) return ga > 0.0 && gb < 0.0;
        return true;
    };

    detail::dopri5_drive(
        f, std::move(y0), t0, t_horizon, tol, max_step,
        [&](double ta, double tb, std::span<const double> y1,
            std::span<const double> rcont) {
            const double g_cur = g(y1);
            auto eval_dense = [&](double tq, std::span<double> out) {
                const double th = (tq - ta) / (tb - ta);
                const double th1 = 1.0 - th;
                for (std::size_t i = 0; i < d; ++i)
                    out[i] = rcont[i] + th * (rcont[d + i] + th1 * (rcont[2 * d + i] +
                             th * (rcont[3 * d + i] + th1 * rcont[4 * d + i])));
            };
            if (!armed) {
                if (g_cur != 0.0) { armed = true; g_prev = g_cur; t_prev = tb; }
                return true;
            }
            if (matches(g_prev, g_cur)) {
                // refine in [t_prev, tb]; the bracket lies inside this step
                // because knots are exactly reproduced by the interpolant
                double lo = std::max(ta, std::min(t_prev, tb));
                double hi = tb;
                double glo = g_prev, ghi = g_cur;
                double tq = hi, gq = ghi;
                for (int it = 0; it < 200 && std::abs(gq) >= tol.abs_tol; ++it) {
                    double ts = (ghi != glo) ? hi - ghi * (hi - lo) / (ghi - glo)
                                             : 0.5 * (lo + hi);
                    const double width = hi - lo;
                    if (!(ts > lo + 1e-3 * std::abs(width)) ||
                        !(ts < hi - 1e-3 * std::abs(width)))
                        ts = 0.5 * (lo + hi);
                    eval_dense(ts, ymid);
                    const double gs = g(std::span<const double>(ymid));
                    if (glo * gs <= 0.0) { hi = ts; ghi = gs; } else { lo = ts; glo = gs; }
                    tq = ts; gq = gs;
                    if (std::abs(hi - lo) < 1e-15 * std::max(1.0, std::abs(hi))) break;
                }
                result.t = tq;
                result.state.resize(d);
                eval_dense(tq, result.state);
                found = true;
                return false;
            }
            g_prev = g_cur;
            t_prev = tb;
            return true;
        });

    if (!found)
        throw event_not_found("find_event: no matching sign change before t = " +
                              std::to_string(t_horizon));
    return result;
}

// =============================================================================
// Bracketed root finding (bisection + secant hybrid)
// =============================================================================

template <class F>
[[nodiscard]] double find_root_bracketed(F&& f, double a, double b,
                                         double xtol = 1e-14, int max_iter = 200) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0)
        throw bracketing_error("find_root_bracketed: no sign change on bracket");
    double c = a, fc = fa;
    for (int it = 0; it < max_iter; ++it) {
        double xs = (fb != fa) ? b - fb * (b - a) / (fb - fa) : 0.5 * (a + b);
        const double w = b - a;
        if (!(xs > std::min(a, b) + 0.01 * std::abs(w)) ||
            !(xs < std::max(a, b) - 0.01 * std::abs(w)))
            xs = 0.5 * (a + b);
        const double fs = f(xs);
        if (fs == 0.0) return xs;
        if (fa * fs < 0.0) { b = xs; fb = fs; } else { a = xs; fa = fs; }
        if (std::abs(b - a) < xtol * std::max(1.0, std::abs(a) + std::abs(b))) break;
        c = xs; fc = fs;
    }
    (void)c; (void)fc;
    return 0.5 * (a + b);
}

// =============================================================================
// Adaptive quadrature (Gauss-Kronrod 7-15)
// =============================================================================

namespace detail {

// 15-point Kronrod nodes (non-negative half) and weights; the embedded
// 7-point Gauss rule sits on the odd-indexed nodes.
inline constexpr std::array<double, 8> kGK15Nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kGK15WeightsK = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGK15WeightsG = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class F>
inline void gk15(F&& f, double a, double b, double& result, double& err_est) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double resk = 0, resg = 0;
    for (std::size_t i = 0; i < 8; ++i) {
        const double x = kGK15Nodes[i];
        double fv;
        if (i == 7) {
            fv = f(c);
            resk += kGK15WeightsK[7] * fv;
            resg += kGK15WeightsG[3] * fv;
        } else {
            const double f1 = f(c - h * x), f2 = f(c + h * x);
            fv = f1 + f2;
            resk += kGK15WeightsK[i] * fv;
            if (i % 2 == 1) resg += kGK15WeightsG[i / 2] * fv;
        }
    }
    result = resk * h;
    err_est = std::abs((resk - resg) * h);
}

}  // namespace detail

/// Adaptive quadrature of f over [a, b] to absolute tolerance tol.
/// Throws quadrature_error when the refinement budget is exhausted.
template <class F>
[[nodiscard]] double adaptive_quadrature(F&& f, double a, double b,
                                         double tol = 1e-12,
                                         std::size_t max_intervals = 1 << 16) {
    if (a == b) return 0.0;
    struct Panel { double a, b, value, err; };
    std::vector<Panel> stack;
    double v0, e0;
    detail::gk15(f, a, b, v0, e0);
    stack.push_back({a, b, v0, e0});
    double total = v0, total_err = e0;
    std::size_t used = 1;
    while (total_err > tol) {
        // split the worst panel
        std::size_t worst = 0;
        for (std::size_t i = 1; i < stack.size(); ++i)
            if (stack[i].err > stack[worst].err) worst = i;
        Panel p = stack[worst];
        if (++used > max_intervals || (p.b - p.a) < 1e-15 * std::max(1.0, std::abs(p.a)))
            throw quadrature_error("adaptive_quadrature: refinement budget exhausted");
        const double m = 0.5 * (p.a + p.b);
        Panel l{p.a, m, 0, 0}, r{m, p.b, 0, 0};
        detail::gk15(f, l.a, l.b, l.value, l.err);
        detail::gk15(f, r.a, r.b, r.value, r.err);
        total += l.value + r.value - p.value;
        total_err += l.err + r.err - p.err;
        stack[worst] = l;
        stack.push_back(r);
    }
    return total;
}

enum class EndpointSingularity { none, left, right, both };

/// Quadrature of an integrand with integrable 1/sqrt singularities at one or
/// both endpoints, handled by the substitution u = a + s^2 (resp. b - s^2)
/// which renders the integrand smooth.
template <class F>
[[nodiscard]] double quadrature_sqrt_endpoints(F&& f, double a, double b, double tol,
                                               EndpointSingularity where) {
    if (where == EndpointSingularity::none) return adaptive_quadrature(f, a, b, tol);
    const double m = 0.5 * (a + b);
    auto left_part = [&](double lo, double hi) {
        // u = a + s^2, du = 2 s ds
        return adaptive_quadrature(
            [&](double s) { return 2.0 * s * f(a + s * s); }, std::sqrt(lo - a),
            std::sqrt(hi - a), tol * 0.5);
    };
    auto right_part = [&](double lo, double hi) {
        // u = b - s^2, du = -2 s ds
        return adaptive_quadrature(
            [&](double s) { return 2.0 * s * f(b - s * s); }, std::sqrt(b - hi),
            std::sqrt(b - lo), tol * 0.5);
    };
    switch (where) {
        case EndpointSingularity::left:  return left_part(a, b);
        case EndpointSingularity::right: return right_part(a, b);
        default:                         return left_part(a, m) + right_part(m, b);
    }
}

// =============================================================================
// 2x2 eigendecomposition
// =============================================================================

struct Matrix2 {
    double m00 = 0, m01 = 0, m10 = 0, m11 = 0;
    [[nodiscard]] double trace() const { return m00 + m11; }
    [[nodiscard]] double det() const { return m00 * m11 - m01 * m10; }
};

struct Eigen2x2 {
    std::array<std::complex<double>, 2> values;
    std::array<std::array<std::complex<double>, 2>, 2> vectors;
    /// Set when the characteristic discriminant vanishes to working
    /// precision: the matrix is either a scalar multiple of the identity or a
    /// genuine Jordan block. Threshold: |disc| <= 1e-12 * max(1, tr^2, 4|det|).
    bool repeated = false;
    /// repeated and not diagonal: a single independent eigenvector.
    bool defective = false;
};

[[nodiscard]] inline Eigen2x2 eigen_2x2(const Matrix2& M) {
    Eigen2x2 out;
    const double tr = M.trace(), dt = M.det();
    const double disc = tr * tr - 4.0 * dt;
    const double scale = std::max({1.0, tr * tr, 4.0 * std::abs(dt)});
    out.repeated = std::abs(disc) <= 1e-12 * scale;

    std::complex<double> sq = std::sqrt(std::complex<double>(disc, 0.0));
    out.values[0] = 0.5 * (std::complex<double>(tr) + sq);
    out.values[1] = 0.5 * (std::complex<double>(tr) - sq);

    const double off = std::max(std::abs(M.m01), std::abs(M.m10));
    out.defective = out.repeated && off > 1e-12 * std::max(1.0, std::abs(tr));

    for (int k = 0; k < 2; ++k) {
        const std::complex<double> lam = out.values[k];
        // rows of (M - lam I) are proportional; pick the better-conditioned one
        const std::complex<double> r1[2] = {M.m00 - lam, std::complex<double>(M.m01)};
        const std::complex<double> r2[2] = {std::complex<double>(M.m10), M.m11 - lam};
        std::complex<double> v0, v1;
        if (std::abs(r1[0]) + std::abs(r1[1]) >= std::abs(r2[0]) + std::abs(r2[1])) {
            v0 = -r1[1]; v1 = r1[0];
        } else {
            v0 = -r2[1]; v1 = r2[0];
        }
        double nv = std::sqrt(std::norm(v0) + std::norm(v1));
        if (nv < 1e-300) { v0 = (k == 0) ? 1.0 : 0.0; v1 = (k == 0) ? 0.0 : 1.0; nv = 1.0; }
        out.vectors[k] = {v0 / nv, v1 / nv};
    }
    return out;
}

// =============================================================================
// Small helpers shared across modules
// =============================================================================

/// Solve A x = b for small dense systems by Gaussian elimination with
/// partial pivoting; A is row-major m x m and is consumed.
[[nodiscard]] inline std::vector<double> solve_dense(std::vector<double> A,
                                                     std::vector<double> b) {
    const std::size_t m = b.size();
    if (A.size() != m * m) throw validation_error("solve_dense: shape mismatch");
    std::vector<std::size_t> perm(m);
    for (std::size_t i = 0; i < m; ++i) perm[i] = i;
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t row = col + 1; row < m; ++row)
            if (std::abs(A[perm[row] * m + col]) > std::abs(A[perm[piv] * m + col]))
                piv = row;
        std::swap(perm[col], perm[piv]);
        const double d = A[perm[col] * m + col];
        if (std::abs(d) < 1e-300)
            throw error("solve_dense: numerically singular matrix");
        for (std::size_t row = col + 1; row < m; ++row) {
            const double f = A[perm[row] * m + col] / d;
            if (f == 0.0) continue;
            for (std::size_t q = col; q < m; ++q)
                A[perm[row] * m + q] -= f * A[perm[col] * m + q];
            b[perm[row]] -= f * b[perm[col]];
        }
    }
    std::vector<double> x(m);
    for (std::size_t i = m; i-- > 0;) {
        double s = b[perm[i]];
        for (std::size_t q = i + 1; q < m; ++q) s -= A[perm[i] * m + q] * x[q];
        x[i] = s / A[perm[i] * m + i];
    }
    return x;
}

[[nodiscard]] inline std::vector<double> linspace(double a, double b, std::size_t count) {
    if (count < 2) return {a};
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    return v;
}

}  // namespace delaunay
