#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lcd/errors.hpp"
#include "lcd/geometry.hpp"
#include "lcd/quadrature.hpp"
#include "lcd/specfun.hpp"

namespace lcd {

// ---------------------------------------------------------------------------
// Weight families
// ---------------------------------------------------------------------------

/// g(t) = exp(gamma t).
struct Exponential {
    double gamma = 1.0;
};

/// g(t) = (1 + alpha t^2) exp(alpha t^2 / 2).
struct GaussPoly {
    double alpha = 1.0;
};

/// g(t) = exp(gamma * int_0^t a) for a scale factor with a(0) = 0, a > 0 afterwards.
/// scale_integral is optional; without it the integral of a is computed by quadrature.
struct Flrw {
    double gamma = 1.0;
    std::function<double(double)> scale_factor;
    std::function<double(double)> scale_integral;
};

using WeightFamily = std::variant<Exponential, GaussPoly, Flrw>;

/// Thrown when a supremum needed by a bound grows without limit.
struct BoundsUnavailable : ConvergenceError {
    using ConvergenceError::ConvergenceError;
};

inline std::string family_name(const WeightFamily& f) {
    switch (f.index()) {
    case 0: return "exponential";
    case 1: return "gauss_poly";
    default: return "flrw";
    }
}

/// The family's scalar parameter (gamma or alpha).
inline double family_parameter(const WeightFamily& f) {
    if (const auto* e = std::get_if<Exponential>(&f)) return e->gamma;
    if (const auto* g = std::get_if<GaussPoly>(&f)) return g->alpha;
    return std::get<Flrw>(f).gamma;
}

namespace detail {

inline void require_time(double t, const char* who) {
    if (!std::isfinite(t) || t < 0.0) throw DomainError(std::string(who) + ": time must be finite and >= 0");
}

inline double factorial(int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

inline double checked(double v, const char* who) {
    if (!std::isfinite(v)) throw RangeError(std::string(who) + ": result overflows double");
    return v;
}

} // namespace detail

/// int_0^t a(s) ds for the FLRW family.
inline double flrw_scale_integral(const Flrw& f, double t) {
    detail::require_time(t, "flrw_scale_integral");
    if (f.scale_integral) return f.scale_integral(t);
    if (t == 0.0) return 0.0;
    const auto r = integrate_adaptive(f.scale_factor, 0.0, t, 1e-14, 1e-13);
    if (!r.converged) throw ConvergenceError("flrw_scale_integral: quadrature did not converge");
    return r.value;
}

inline double log_g(const WeightFamily& fam, double t) {
    detail::require_time(t, "log_g");
    if (const auto* e = std::get_if<Exponential>(&fam)) return e->gamma * t;
    if (const auto* g = std::get_if<GaussPoly>(&fam)) {
        const double q = g->alpha * t * t;
        return std::log1p(q) + 0.5 * q;
    }
    const auto& f = std::get<Flrw>(fam);
    return f.gamma * flrw_scale_integral(f, t);
}

inline double g_value(const WeightFamily& fam, double t) {
    return detail::checked(std::exp(log_g(fam, t)), "g");
}

/// Checks parameters and, on a sample grid, a(0) = 0, a > 0, g increasing.
inline void validate(const WeightFamily& fam) {
    const double p = family_parameter(fam);
    if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("WeightFamily: parameter must be finite and > 0");
    if (const auto* f = std::get_if<Flrw>(&fam)) {
        if (!f->scale_factor) throw DomainError("Flrw: scale factor missing");
        if (f->scale_factor(0.0) != 0.0) throw DomainError("Flrw: scale factor must vanish at eta = 0");
        for (int k = 1; k <= 64; ++k) {
            const double eta = 0.05 * k;
            if (!(f->scale_factor(eta) > 0.0)) throw DomainError("Flrw: scale factor must be > 0 for eta > 0");
        }
    }
    double prev = g_value(fam, 0.0);
    if (!(prev > 0.0)) throw DomainError("WeightFamily: g(0) must be > 0");
    for (int k = 1; k <= 64; ++k) {
        const double cur = g_value(fam, 0.05 * k);
        if (!(cur >= prev)) throw DomainError("WeightFamily: g must be nondecreasing");
        prev = cur;
    }
}

namespace detail {

// g_n(t) = int_0^t (t-s)^(n-1)/(n-1)! g(s) ds, optionally divided by g(t).
inline double g_numeric(const WeightFamily& fam, int n, double t, bool divide_by_g) {
    if (t == 0.0) return 0.0;
    const double lt = divide_by_g ? log_g(fam, t) : 0.0;
    const double c = 1.0 / factorial(n - 1);
    auto f = [&](double s) { return c * std::pow(t - s, n - 1) * std::exp(log_g(fam, s) - lt); };
    const auto r = integrate_adaptive(f, 0.0, t, 1e-13, 1e-12, 4000, 4);
    if (!r.converged) throw ConvergenceError("g_n: quadrature did not converge");
    return r.value;
}

// t^n sum_k x^k / (k+n)!, the small-argument form of the exponential g_n.
inline double exp_gn_series(int n, double gamma, double t) {
    const double x = gamma * t;
    double term = 1.0 / factorial(n), sum = term;
    for (int k = 1; k < 60; ++k) {
        term *= x / (k + n);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return std::pow(t, n) * sum;
}

// g_3 of the Gauss-polynomial family for alpha t^2 / 2 < 1.
inline double gauss_g3_series(double alpha, double t) {
    const double h = 0.5 * alpha * t * t;
    double pk = 1.0, sum = 0.0;  // pk = h^k / k!
    for (int k = 1; k < 60; ++k) {
        pk *= h / k;
        const double term = pk / (2.0 * k + 1.0);
        sum += term;
        if (term < 1e-18 * sum) break;
    }
    return t * sum / alpha;
}

} // namespace detail

/// Iterated integral g_n(t) with g_0 = g. Closed forms for exponential (all n) and
/// Gauss-polynomial (n <= 3) weights; adaptive quadrature otherwise.
inline double g_eval(const WeightFamily& fam, int n, double t) {
    detail::require_time(t, "g_eval");
    if (n < 0) throw DomainError("g_eval: n must be >= 0");
    if (n == 0) return g_value(fam, t);
    if (t == 0.0) return 0.0;
    if (const auto* e = std::get_if<Exponential>(&fam)) {
        const double x = e->gamma * t;
        if (x < 1.0) return detail::exp_gn_series(n, e->gamma, t);
        double partial = 0.0, term = 1.0;
        for (int k = 0; k < n; ++k) {
            partial += term;
            term *= x / (k + 1);
        }
        return detail::checked((std::exp(x) - partial) / std::pow(e->gamma, n), "g_eval");
    }
    if (const auto* g = std::get_if<GaussPoly>(&fam)) {
        const double a = g->alpha, h = 0.5 * a * t * t;
        switch (n) {
        case 1: return detail::checked(t * std::exp(h), "g_eval");
        case 2: return detail::checked(std::expm1(h) / a, "g_eval");
        case 3:
            if (h < 1.0) return detail::gauss_g3_series(a, t);
            return (std::sqrt(std::numbers::pi / (2.0 * a)) * erfi(std::sqrt(0.5 * a) * t) - t) / a;
        default: break;
        }
    }
    return detail::checked(detail::g_numeric(fam, n, t, false), "g_eval");
}

/// t^p g_n(t) / g(t), evaluated without forming the exponentials.
inline double g_ratio(const WeightFamily& fam, int n, int p, double t) {
    detail::require_time(t, "g_ratio");
    const double tp = std::pow(t, p);
    if (n == 0) return tp;
    if (t == 0.0) return 0.0;
    if (const auto* e = std::get_if<Exponential>(&fam)) {
        const double x = e->gamma * t;
        if (x < 1.0) return tp * detail::exp_gn_series(n, e->gamma, t) * std::exp(-x);
        double partial = 0.0, term = 1.0;
        for (int k = 0; k < n; ++k) {
            partial += term;
            term *= x / (k + 1);
        }
        return tp * (1.0 - std::exp(-x) * partial) / std::pow(e->gamma, n);
    }
    if (const auto* g = std::get_if<GaussPoly>(&fam)) {
        const double a = g->alpha, h = 0.5 * a * t * t, w = 1.0 + a * t * t;
        switch (n) {
        case 1: return tp * t / w;
        case 2: return tp * (-std::expm1(-h)) / (a * w);
        case 3:
            if (h < 1.0) return tp * detail::gauss_g3_series(a, t) * std::exp(-h) / w;
            return tp * (std::sqrt(2.0 / a) * dawson(std::sqrt(0.5 * a) * t) - t * std::exp(-h)) / (a * w);
        default: break;
        }
    }
    return tp * detail::g_numeric(fam, n, t, true);
}

// ---------------------------------------------------------------------------
// Suprema
// ---------------------------------------------------------------------------

struct Supremum {
    double value = 0.0;
    double argmax = 0.0;     // location of the maximum, or the horizon if saturated
    bool saturated = false;  // approached as t -> infinity rather than attained
};

/// Maximize a nonnegative ratio on (0, inf): log-spaced scan on [1e-8, 1e12] with early
/// stop once the ratio decays below 1e-12 of the running peak, then golden-section
/// refinement in log t. A ratio still rising at the horizon is accepted as saturated
/// when its last-decade increment is below 1e-13 relative, and rejected otherwise.
inline Supremum maximize_ratio(const std::function<double(double)>& f) {
    constexpr double log_lo = -8.0, log_hi = 12.0;
    constexpr int per_decade = 30;
    constexpr int npts = static_cast<int>((log_hi - log_lo) * per_decade) + 1;
    std::vector<double> ts, vs;
    int best = 0;
    for (int k = 0; k < npts; ++k) {
        const double t = std::pow(10.0, log_lo + static_cast<double>(k) / per_decade);
        const double v = f(t);
        if (!std::isfinite(v)) throw ConvergenceError("maximize_ratio: non-finite ratio");
        ts.push_back(t);
        vs.push_back(v);
        if (v > vs[best]) best = k;
        if (k > best + per_decade && v < 1e-12 * vs[best]) break;
    }
    const int last = static_cast<int>(vs.size()) - 1;
    if (last == npts - 1 && vs[last] >= vs[best] * (1.0 - 1e-13)) {
        const double incr = vs[last] - vs[last - per_decade];
        if (incr <= 1e-13 * std::fabs(vs[last])) return {std::max(vs[best], vs[last]), ts[last], true};
        throw BoundsUnavailable("maximize_ratio: ratio still increasing at the horizon");
    }
    if (best == 0) return {vs[0], ts[0], false};
    double a = std::log(ts[best - 1]), b = std::log(ts[best + 1]);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - r * (b - a), d = a + r * (b - a);
    double fc = f(std::exp(c)), fd = f(std::exp(d));
    for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - r * (b - a);
            fc = f(std::exp(c));
        } else {
            a = c; c = d; fc = fd;
            d = a + r * (b - a);
            fd = f(std::exp(d));
        }
    }
    if (fc > fd) return {std::max(fc, vs[best]), std::exp(c), false};
    return {std::max(fd, vs[best]), std::exp(d), false};
}

/// sup of t^p g_n(t)/g(t) over t >= 0.
inline Supremum ratio_supremum(const WeightFamily& fam, int n, int p) {
    return maximize_ratio([&](double t) { return g_ratio(fam, n, p, t); });
}

/// The seven suprema (g1/g, t g1/g, g2/g, t g2/g, t^2 g2/g, g3/g, t^2 g3/g).
inline constexpr std::array<std::array<int, 2>, 7> suprema_components{
    {{1, 0}, {1, 1}, {2, 0}, {2, 1}, {2, 2}, {3, 0}, {3, 2}}};

inline std::array<Supremum, 7> suprema(const WeightFamily& fam) {
    if (!std::holds_alternative<GaussPoly>(fam)) throw DomainError("suprema: Gauss-polynomial family required");
    validate(fam);
    std::array<Supremum, 7> out;
    for (std::size_t i = 0; i < 7; ++i)
        out[i] = ratio_supremum(fam, suprema_components[i][0], suprema_components[i][1]);
    return out;
}

/// The closed-form values/bounds for the seven suprema at parameter alpha.
inline std::array<double, 7> suprema_closed_forms(double alpha) {
    const double s = std::sqrt(alpha);
    return {0.5 / s, 1.0 / alpha, 1.0 / alpha, 0.5 / (alpha * s), 1.0 / (alpha * alpha),
            1.0 / (alpha * s), 2.0 / (3.0 * alpha * alpha * s)};
}

// ---------------------------------------------------------------------------
// Bound ledger
// ---------------------------------------------------------------------------

struct BoundReport {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0, b12 = 0.0;
    double total = 0.0;
    bool contraction = false;
    double lambda = 0.0, m1 = 0.0, m2 = 0.0;
    std::string family;
    double parameter = 0.0;
};

namespace detail {

inline void require_coupling(double lambda, double m1, double m2) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("coupling lambda must be finite and > 0");
    if (!(m1 >= 0.0) || !(m2 >= 0.0) || !std::isfinite(m1) || !std::isfinite(m2))
        throw DomainError("masses must be finite and >= 0");
}

inline void finish(BoundReport& r) {
    r.total = r.b0 + r.b1 + r.b2 + r.b12;
    r.contraction = r.total < 1.0;
}

} // namespace detail

/// Operator-norm bounds assembled from numerically maximized suprema.
/// Throws BoundsUnavailable when a needed supremum diverges.
inline BoundReport thm1_bounds(double lambda, double m1, double m2, const WeightFamily& fam) {
    detail::require_coupling(lambda, m1, m2);
    validate(fam);
    const double pi = std::numbers::pi;
    BoundReport r{.lambda = lambda, .m1 = m1, .m2 = m2, .family = family_name(fam),
                  .parameter = family_parameter(fam)};
    auto sup = [&](int n, int p) {
        try {
            return ratio_supremum(fam, n, p).value;
        } catch (const BoundsUnavailable&) {
            throw BoundsUnavailable("bounds unavailable for this family: sup t^" + std::to_string(p) + " g_" +
                                    std::to_string(n) + "/g diverges");
        }
    };
    const double s_g1 = sup(1, 0);
    r.b0 = lambda / (8.0 * pi) * s_g1 * s_g1;
    if (m1 > 0.0 || m2 > 0.0) {
        const double mixed = 3.0 * sup(1, 1) * sup(2, 0) + 3.0 * s_g1 * sup(2, 1) + 2.0 * s_g1 * sup(3, 0);
        r.b1 = lambda * m1 * m1 / (16.0 * pi) * mixed;
        r.b2 = lambda * m2 * m2 / (16.0 * pi) * mixed;
    }
    if (m1 > 0.0 && m2 > 0.0) {
        const double mm = sup(2, 2) * sup(1, 1) + 0.5 * sup(3, 2) * s_g1;
        r.b12 = lambda * m1 * m1 * m2 * m2 / (96.0 * pi) * mm;
    }
    detail::finish(r);
    return r;
}

/// Closed-form bounds for the Gauss-polynomial weight.
inline BoundReport thm3_bounds(double lambda, double m1, double m2, double alpha) {
    detail::require_coupling(lambda, m1, m2);
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("alpha must be finite and > 0");
    const double pi = std::numbers::pi;
    BoundReport r{.lambda = lambda, .m1 = m1, .m2 = m2, .family = "gauss_poly", .parameter = alpha};
    r.b0 = lambda / (32.0 * pi * alpha);
    r.b1 = 5.0 * lambda * m1 * m1 / (16.0 * pi * alpha * alpha);
    r.b2 = 5.0 * lambda * m2 * m2 / (16.0 * pi * alpha * alpha);
    r.b12 = lambda * m1 * m1 * m2 * m2 / (80.0 * pi * alpha * alpha * alpha);
    detail::finish(r);
    return r;
}

/// Left-hand side of the massive contraction condition, written in factored form.
inline double thm3_margin(double lambda, double m1, double m2, double alpha) {
    detail::require_coupling(lambda, m1, m2);
    const double a1 = m1 * m1, a2 = m2 * m2;
    return lambda / (8.0 * std::numbers::pi * alpha) *
           (0.25 + 5.0 * (a1 + a2) / (2.0 * alpha) + a1 * a2 / (10.0 * alpha * alpha));
}

/// N-particle bound: sum of the pairwise Gauss-polynomial totals.
inline double thm4_bound(double lambda, std::span<const double> masses, double alpha) {
    if (masses.size() < 2) throw DomainError("thm4_bound: at least two particles required");
    double total = 0.0;
    for (std::size_t i = 0; i < masses.size(); ++i)
        for (std::size_t j = i + 1; j < masses.size(); ++j)
            total += thm3_bounds(lambda, masses[i], masses[j], alpha).total;
    return total;
}

/// FLRW bound lambda / (8 pi gamma^2).
inline double thm5_bound(double lambda, double gamma) {
    if (!(lambda > 0.0)) throw DomainError("thm5_bound: lambda must be > 0");
    if (!(gamma > 0.0)) throw DomainError("thm5_bound: gamma must be > 0");
    return lambda / (8.0 * std::numbers::pi * gamma * gamma);
}

/// G(eta) = a(eta) g(eta).
inline double flrw_G(const Flrw& f, double eta) {
    return f.scale_factor(eta) * g_value(WeightFamily{f}, eta);
}

/// G_1(eta) = int_0^eta G by adaptive quadrature.
inline double flrw_G1(const Flrw& f, double eta) {
    detail::require_time(eta, "flrw_G1");
    if (eta == 0.0) return 0.0;
    const WeightFamily fam{f};
    auto G = [&](double s) { return f.scale_factor(s) * g_value(fam, s); };
    const auto r = integrate_adaptive(G, 0.0, eta, 1e-13, 1e-13, 4000, 4);
    if (!r.converged) throw ConvergenceError("flrw_G1: quadrature did not converge");
    return r.value;
}

struct FlrwIdentityCheck {
    double printed_residual = 0.0;    // max |G1 - g/gamma|
    double corrected_residual = 0.0;  // max |G1 - (g - 1)/gamma|
};

/// Compares the quadrature G1 with g/gamma and with (g - 1)/gamma on a grid.
inline FlrwIdentityCheck flrw_g1_identity(const Flrw& f, std::span<const double> grid) {
    FlrwIdentityCheck c;
    const WeightFamily fam{f};
    for (double eta : grid) {
        const double G1 = flrw_G1(f, eta), g = g_value(fam, eta);
        c.printed_residual = std::max(c.printed_residual, std::fabs(G1 - g / f.gamma));
        c.corrected_residual = std::max(c.corrected_residual, std::fabs(G1 - (g - 1.0) / f.gamma));
    }
    return c;
}

// ---------------------------------------------------------------------------
// Pointwise bounds (per unit weighted norm of psi)
// ---------------------------------------------------------------------------

/// (lambda / 8 pi) g1(x0) g1(y0).
inline double pointwise_bound_a0(double lambda, const WeightFamily& fam, double x0, double y0) {
    return lambda / (8.0 * std::numbers::pi) * g_eval(fam, 1, x0) * g_eval(fam, 1, y0);
}

/// Position-dependent A0 bound: the three indicator branches in the xi variables,
/// integrated over rho with breakpoints at every kink.
inline double intermediate_bound_a0(double lambda, const WeightFamily& fam, const SpacetimePoint& x,
                                    const SpacetimePoint& y) {
    validate(x);
    validate(y);
    const double x0 = x.t, y0 = y.t;
    if (x0 == 0.0 || y0 == 0.0) return 0.0;
    const double d = norm(x.r - y.r);
    if (d == 0.0) throw DomainError("intermediate_bound_a0: coincident spatial points");
    const double xp = 0.5 * (x0 + y0 + d), xm = 0.5 * (x0 + y0 - d);
    const double s2 = interval(x, y);
    auto G2 = [&](double t) { return g_eval(fam, 2, std::max(t, 0.0)); };
    auto g = [&](double t) { return g_value(fam, std::max(t, 0.0)); };

    auto integrate_pieces = [&](auto&& f, double a, double b, std::vector<double> cuts) {
        cuts.push_back(a);
        cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        double sum = 0.0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const double lo = std::clamp(cuts[i], a, b), hi = std::clamp(cuts[i + 1], a, b);
            if (!(hi > lo)) continue;
            const auto r = integrate_adaptive(f, lo, hi, 1e-13, 1e-11, 4000);
            if (!r.converged) throw ConvergenceError("intermediate_bound_a0: quadrature did not converge");
            sum += r.value;
        }
        return sum;
    };

    double total = 0.0;
    if (s2 < 0.0 && xm > 0.0) {
        const double rho_c = 0.5 * (y0 - x0 + d);
        auto f = [&](double rho) {
            double v = G2(std::min(xm, y0 - rho)) - G2(xm - rho);
            if (rho > rho_c) v += G2(x0) + G2(y0 - rho) - G2(xm) - G2(xp - rho);
            return g(y0 - rho) / d * v;
        };
        total += integrate_pieces(f, 0.0, y0, {y0 - xm, xm, rho_c});
    }
    if (s2 > 0.0 && x0 > y0) {
        auto f = [&](double rho) { return g(y0 - rho) / d * (G2(xp) + G2(xm - rho) - G2(xm) - G2(xp - rho)); };
        total += integrate_pieces(f, 0.0, y0, {});
    }
    if (s2 > 0.0 && y0 > x0) {
        auto f = [&](double rho) { return g(y0 - rho) / d * (G2(std::min(xp - rho, x0)) - G2(xm - rho)); };
        total += integrate_pieces(f, 0.5 * (y0 - x0 - d), xp, {xp - x0, xm});
    }
    return lambda / (16.0 * std::numbers::pi) * total;
}

/// A1 bound (lambda m1^2 / 16 pi)(3 (x0+y0) g1(x0) g2(y0) + 2 g1(x0) g3(y0)).
inline double pointwise_bound_a1(double lambda, double m1, const WeightFamily& fam, double x0, double y0) {
    const double g1x = g_eval(fam, 1, x0);
    return lambda * m1 * m1 / (16.0 * std::numbers::pi) *
           (3.0 * (x0 + y0) * g1x * g_eval(fam, 2, y0) + 2.0 * g1x * g_eval(fam, 3, y0));
}

/// Mirror image of pointwise_bound_a1.
inline double pointwise_bound_a2(double lambda, double m2, const WeightFamily& fam, double x0, double y0) {
    return pointwise_bound_a1(lambda, m2, fam, y0, x0);
}

/// Tighter A1 bound before the final simplifications:
/// (lambda m1^2/16 pi) int_0^y0 (y0-rho) g(rho) [|x0-rho| g1(x0) + g2(min(rho, x0))] drho.
inline double intermediate_bound_a1(double lambda, double m1, const WeightFamily& fam, double x0, double y0) {
    detail::require_time(x0, "intermediate_bound_a1");
    detail::require_time(y0, "intermediate_bound_a1");
    if (x0 == 0.0 || y0 == 0.0 || m1 == 0.0) return 0.0;
    const double g1x = g_eval(fam, 1, x0);
    auto f = [&](double rho) {
        return (y0 - rho) * g_value(fam, rho) * (std::fabs(x0 - rho) * g1x + g_eval(fam, 2, std::min(rho, x0)));
    };
    double sum = 0.0;
    const double cut = std::min(x0, y0);
    for (auto [lo, hi] : {std::pair{0.0, cut}, std::pair{cut, y0}}) {
        if (!(hi > lo)) continue;
        const auto r = integrate_adaptive(f, lo, hi, 1e-14, 1e-12);
        if (!r.converged) throw ConvergenceError("intermediate_bound_a1: quadrature did not converge");
        sum += r.value;
    }
    return lambda * m1 * m1 / (16.0 * std::numbers::pi) * sum;
}

/// (lambda m1^2 m2^2 / 96 pi)(x0^2 g2(x0) y0 g1(y0) + x0^2 g3(x0) g1(y0) / 2).
inline double pointwise_bound_a12(double lambda, double m1, double m2, const WeightFamily& fam, double x0,
                                  double y0) {
    const double g1y = g_eval(fam, 1, y0);
    return lambda * m1 * m1 * m2 * m2 / (96.0 * std::numbers::pi) *
           (x0 * x0 * g_eval(fam, 2, x0) * y0 * g1y + 0.5 * x0 * x0 * g_eval(fam, 3, x0) * g1y);
}

/// (lambda m1^2 m2^2 / 96 pi) int_0^x0 (x0-s)^3 g(s) int_0^y0 |s-t| g(t) dt ds.
inline double intermediate_bound_a12(double lambda, double m1, double m2, const WeightFamily& fam, double x0,
                                     double y0) {
    detail::require_time(x0, "intermediate_bound_a12");
    detail::require_time(y0, "intermediate_bound_a12");
    if (x0 == 0.0 || y0 == 0.0 || m1 == 0.0 || m2 == 0.0) return 0.0;
    auto inner = [&](double s) {
        auto h = [&](double t) { return std::fabs(s - t) * g_value(fam, t); };
        double v = 0.0;
        const double cut = std::min(s, y0);
        for (auto [lo, hi] : {std::pair{0.0, cut}, std::pair{cut, y0}}) {
            if (hi > lo) v += integrate_adaptive(h, lo, hi, 1e-14, 1e-12).value;
        }
        return v;
    };
    auto outer = [&](double s) { return std::pow(x0 - s, 3) * g_value(fam, s) * inner(s); };
    const auto r = integrate_adaptive(outer, 0.0, x0, 1e-14, 1e-11);
    if (!r.converged) throw ConvergenceError("intermediate_bound_a12: quadrature did not converge");
    return lambda * m1 * m1 * m2 * m2 / (96.0 * std::numbers::pi) * r.value;
}

} // namespace lcd
