#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lcd/errors.hpp"
#include "lcd/geometry.hpp"
#include "lcd/quadrature.hpp"
#include "lcd/specfun.hpp"
#include "lcd/weights.hpp"

namespace lcd {

// ---------------------------------------------------------------------------
// Model and wave functions
// ---------------------------------------------------------------------------

struct ModelConfig {
    double lambda = 1.0;
    double m1 = 0.0;
    double m2 = 0.0;
    WeightFamily weight = GaussPoly{1.0};
    QuadSpec quad{};
};

inline void validate(const ModelConfig& cfg) {
    if (!(cfg.lambda > 0.0) || !std::isfinite(cfg.lambda)) throw DomainError("ModelConfig: lambda must be finite and > 0");
    if (!(cfg.m1 >= 0.0) || !(cfg.m2 >= 0.0) || !std::isfinite(cfg.m1) || !std::isfinite(cfg.m2))
        throw DomainError("ModelConfig: masses must be finite and >= 0");
    validate(cfg.quad);
}

/// Complex field on arity-tuples of spacetime points.
struct WaveFunction {
    int arity = 2;
    std::function<Complex(std::span<const SpacetimePoint>)> eval;
    std::string descriptor;

    Complex operator()(std::span<const SpacetimePoint> p) const { return eval(p); }
    Complex operator()(const SpacetimePoint& x, const SpacetimePoint& y) const {
        const std::array<SpacetimePoint, 2> p{x, y};
        return eval(p);
    }
};

inline WaveFunction make_wave(std::function<Complex(const SpacetimePoint&, const SpacetimePoint&)> f,
                              std::string descriptor) {
    return {2, [f = std::move(f)](std::span<const SpacetimePoint> p) { return f(p[0], p[1]); },
            std::move(descriptor)};
}

inline WaveFunction constant_wave(Complex c, int arity = 2) {
    return {arity, [c](std::span<const SpacetimePoint>) { return c; }, "constant"};
}

/// Product of one-point factors, one per slot.
inline WaveFunction product_wave(std::vector<std::function<Complex(const SpacetimePoint&)>> factors,
                                 std::string descriptor = "product") {
    const int n = static_cast<int>(factors.size());
    return {n,
            [factors = std::move(factors)](std::span<const SpacetimePoint> p) {
                Complex v = factors[0](p[0]);
                for (std::size_t k = 1; k < factors.size(); ++k) v *= factors[k](p[k]);
                return v;
            },
            std::move(descriptor)};
}

inline WaveFunction scaled(const WaveFunction& psi, Complex c) {
    return {psi.arity, [psi, c](std::span<const SpacetimePoint> p) { return c * psi(p); },
            "scaled(" + psi.descriptor + ")"};
}

/// psi(x, y) -> psi(y, x).
inline WaveFunction swapped(const WaveFunction& psi) {
    return make_wave([psi](const SpacetimePoint& x, const SpacetimePoint& y) { return psi(y, x); },
                     "swapped(" + psi.descriptor + ")");
}

namespace detail {

inline void require_arity(const WaveFunction& psi, int arity, const char* who) {
    if (psi.arity != arity || !psi.eval)
        throw DomainError(std::string(who) + ": wave function of arity " + std::to_string(arity) + " required");
}

inline std::string format_point(const SpacetimePoint& p) {
    std::ostringstream os;
    os.precision(17);
    os << '(' << p.t << "; " << p.r[0] << ", " << p.r[1] << ", " << p.r[2] << ')';
    return os.str();
}

// psi(a, b) with failures rethrown carrying the sample coordinates.
template <class Psi>
Complex eval_at(Psi& psi, const SpacetimePoint& a, const SpacetimePoint& b, const char* who) {
    try {
        return psi(a, b);
    } catch (const ConvergenceError&) {
        throw;
    } catch (const EvaluationError&) {
        throw;
    } catch (const std::exception& e) {
        throw EvaluationError(std::string(who) + ": psi failed at x'=" + format_point(a) + ", y'=" +
                              format_point(b) + ": " + e.what());
    }
}

inline constexpr double four_pi = 4.0 * std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double four_pi_cubed = four_pi * four_pi * four_pi;

inline Vec3 unit_direction(double u_cos, double u_phi) { return direction(2.0 * u_cos - 1.0, two_pi * u_phi); }

// Reduced A0 integral on the unit cube (rho, cos theta_y, phi_y, phi, s). psi receives
// the two shifted points and may carry extra factors (the FLRW scale factors).
template <class Psi>
EvalResult a0_core(double lambda, const SpacetimePoint& x, const SpacetimePoint& y, Psi&& psi,
                   const QuadSpec& spec, const char* who) {
    validate(x);
    validate(y);
    validate(spec);
    if (x.t == 0.0 || y.t == 0.0) return {};
    const bool graded = is_deterministic(spec);
    static const std::array<Vec3, 3> global{Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
    auto f = [&](std::span<const double> u) -> Complex {
        const double rho = y.t * u[0];
        const Vec3 yp = rho * unit_direction(u[1], u[2]);
        // d^3y'/|y'| = rho drho dOmega, and dphi.
        double w = y.t * rho * four_pi * two_pi;
        const BVector b = b_vector(x, y, yp);
        const double nb = b.spatial_norm();
        double s = 0.0, cu = 0.0;
        std::array<Vec3, 3> frame = global;
        if (nb > 0.0) {
            const auto range = a0_s_range(b, x.t);
            if (!range) return 0.0;
            const SNode node = s_node(*range, u[4], graded);
            s = node.s;
            // |b^2| du / (4 (b0 + |b| u)^2) = ds / (2 |b|)
            w *= node.jacobian / (2.0 * nb);
            cu = u_of_s(b, s);
            frame = frame_along((1.0 / nb) * b.bvec);
        } else {
            s = 0.5 * b.b0;
            if (!(s > 0.0 && s < x.t)) return 0.0;
            cu = 2.0 * u[4] - 1.0;
            w *= 0.5;
        }
        const Vec3 n = direction(frame, cu, two_pi * u[3]);
        const SpacetimePoint xs{std::max(0.0, x.t - s), x.r + s * n};
        const SpacetimePoint ys{y.t - rho, y.r + yp};
        return w * eval_at(psi, xs, ys, who);
    };
    const std::array<Interval, 5> box{};
    return scaled(integrate(std::span<const Interval>(box), f, spec), lambda / four_pi_cubed);
}

// Reduced A1 integral with the kernel on point k and the light-cone delta on point d.
// psi receives (k', d'). Unit cube: (rho, Omega_m, r, Omega_k), both x'0 branches
// evaluated on the same sample.
template <class Psi>
EvalResult a1_core(double lambda, double m, const SpacetimePoint& k, const SpacetimePoint& d, Psi&& psi,
                   const QuadSpec& spec, const char* who) {
    validate(k);
    validate(d);
    validate(spec);
    if (m == 0.0 || k.t == 0.0 || d.t == 0.0) return {};
    auto branch = [&](const SpacetimePoint& dp, const Vec3& kh, double R, double u, double sign) -> Complex {
        if (!(R > 0.0)) return 0.0;
        const double r = R * u;
        const SpacetimePoint kp{dp.t + sign * r, dp.r + r * kh};
        const double dt = k.t - kp.t, dist = norm(k.r - kp.r);
        if (!(dt > dist) || kp.t < 0.0) return 0.0;
        const double s = std::sqrt((dt - dist) * (dt + dist));
        return (R * r * bessel_j1_ratio(m * s)) * eval_at(psi, kp, dp, who);
    };
    auto f = [&](std::span<const double> u) -> Complex {
        const double rho = d.t * u[0];
        const double w = d.t * rho * four_pi * four_pi;
        const SpacetimePoint dp{d.t - rho, d.r + rho * unit_direction(u[1], u[2])};
        const Vec3 kh = unit_direction(u[4], u[5]);
        const Complex plus = branch(dp, kh, k.t - dp.t, u[3], 1.0);
        const Complex minus = branch(dp, kh, dp.t, u[3], -1.0);
        return w * (plus + minus);
    };
    const std::array<Interval, 6> box{};
    return scaled(integrate(std::span<const Interval>(box), f, spec), -lambda * m * m / (2.0 * four_pi_cubed));
}

// Reduced A12 integral. Unit cube: (x'0, |x'-x|, Omega_1, y'0, Omega_z).
template <class Psi>
EvalResult a12_core(double lambda, double m1, double m2, const SpacetimePoint& x, const SpacetimePoint& y,
                    Psi&& psi, const QuadSpec& spec, const char* who) {
    validate(x);
    validate(y);
    validate(spec);
    if (m1 == 0.0 || m2 == 0.0 || x.t == 0.0 || y.t == 0.0) return {};
    auto f = [&](std::span<const double> u) -> Complex {
        const double xt = x.t * u[0];
        const double D = x.t - xt;
        const double r1 = D * u[1];
        const SpacetimePoint xp{xt, x.r + r1 * unit_direction(u[2], u[3])};
        const double yt = y.t * u[4];
        const double z = std::fabs(xt - yt);
        const SpacetimePoint yp{yt, xp.r - z * unit_direction(u[5], u[6])};
        const double dt2 = y.t - yt, dist2 = norm(y.r - yp.r);
        if (!(dt2 > dist2)) return 0.0;
        const double s1 = std::sqrt((D - r1) * (D + r1));
        const double s2 = std::sqrt((dt2 - dist2) * (dt2 + dist2));
        const double w = x.t * D * r1 * r1 * four_pi * y.t * four_pi * z;
        return (w * bessel_j1_ratio(m1 * s1) * bessel_j1_ratio(m2 * s2)) * eval_at(psi, xp, yp, who);
    };
    const std::array<Interval, 7> box{};
    return scaled(integrate(std::span<const Interval>(box), f, spec),
                  lambda * m1 * m1 * m2 * m2 / (2.0 * four_pi_cubed));
}

inline EvalResult combine(std::initializer_list<EvalResult> parts) {
    EvalResult out;
    double var = 0.0;
    int nonzero = 0;
    for (const auto& p : parts) {
        out.value += p.value;
        out.samples_used += p.samples_used;
        if (p.std_error > 0.0) {
            ++nonzero;
            out.std_error = p.std_error;
            var += p.std_error * p.std_error;
        }
    }
    if (nonzero > 1) out.std_error = std::sqrt(var);
    return out;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Two-particle operators
// ---------------------------------------------------------------------------

/// Massless light-cone operator A0 at (x, y).
inline EvalResult a0_apply(const ModelConfig& cfg, const WaveFunction& psi, const SpacetimePoint& x,
                           const SpacetimePoint& y) {
    validate(cfg);
    detail::require_arity(psi, 2, "a0_apply");
    return detail::a0_core(cfg.lambda, x, y, psi, cfg.quad, "a0_apply");
}

/// Mass term of particle 1.
inline EvalResult a1_apply(const ModelConfig& cfg, const WaveFunction& psi, const SpacetimePoint& x,
                           const SpacetimePoint& y) {
    validate(cfg);
    detail::require_arity(psi, 2, "a1_apply");
    return detail::a1_core(cfg.lambda, cfg.m1, x, y, psi, cfg.quad, "a1_apply");
}

/// Mass term of particle 2: A1 with the roles of the two slots exchanged.
inline EvalResult a2_apply(const ModelConfig& cfg, const WaveFunction& psi, const SpacetimePoint& x,
                           const SpacetimePoint& y) {
    validate(cfg);
    detail::require_arity(psi, 2, "a2_apply");
    auto flipped = [&psi](const SpacetimePoint& a, const SpacetimePoint& b) { return psi(b, a); };
    return detail::a1_core(cfg.lambda, cfg.m2, y, x, flipped, cfg.quad, "a2_apply");
}

/// Mixed mass term.
inline EvalResult a12_apply(const ModelConfig& cfg, const WaveFunction& psi, const SpacetimePoint& x,
                            const SpacetimePoint& y) {
    validate(cfg);
    detail::require_arity(psi, 2, "a12_apply");
    return detail::a12_core(cfg.lambda, cfg.m1, cfg.m2, x, y, psi, cfg.quad, "a12_apply");
}

/// A = A0 + A1 + A2 + A12. A0 uses the configured seed; the mass terms use derived seeds.
inline EvalResult a_apply(const ModelConfig& cfg, const WaveFunction& psi, const SpacetimePoint& x,
                          const SpacetimePoint& y) {
    ModelConfig c = cfg;
    const EvalResult r0 = a0_apply(c, psi, x, y);
    c.quad.seed = derive_seed(cfg.quad.seed, 1);
    const EvalResult r1 = a1_apply(c, psi, x, y);
    c.quad.seed = derive_seed(cfg.quad.seed, 2);
    const EvalResult r2 = a2_apply(c, psi, x, y);
    c.quad.seed = derive_seed(cfg.quad.seed, 3);
    const EvalResult r12 = a12_apply(c, psi, x, y);
    return detail::combine({r0, r1, r2, r12});
}

// ---------------------------------------------------------------------------
// FLRW
// ---------------------------------------------------------------------------

using ScaleFunction = std::function<double(double)>;

/// A0 with the extra factor a(x0 - r*) a(y0 - |y'|); psi lives in conformal coordinates.
inline EvalResult a0_flrw_apply(double lambda, const ScaleFunction& a, const WaveFunction& psi,
                                const SpacetimePoint& x, const SpacetimePoint& y, const QuadSpec& spec) {
    if (!(lambda > 0.0)) throw DomainError("a0_flrw_apply: lambda must be > 0");
    if (!a) throw DomainError("a0_flrw_apply: scale factor missing");
    detail::require_arity(psi, 2, "a0_flrw_apply");
    auto weighted = [&](const SpacetimePoint& xp, const SpacetimePoint& yp) {
        return a(xp.t) * a(yp.t) * psi(xp, yp);
    };
    return detail::a0_core(lambda, x, y, weighted, spec, "a0_flrw_apply");
}

inline EvalResult a0_flrw_apply(const ModelConfig& cfg, const WaveFunction& psi, const SpacetimePoint& x,
                                const SpacetimePoint& y) {
    const auto* f = std::get_if<Flrw>(&cfg.weight);
    if (!f) throw DomainError("a0_flrw_apply: FLRW weight family required");
    return a0_flrw_apply(cfg.lambda, f->scale_factor, psi, x, y, cfg.quad);
}

/// chi(x, y) = a(x0) a(y0) psi(x, y).
inline WaveFunction chi_transform(const ScaleFunction& a, const WaveFunction& psi) {
    detail::require_arity(psi, 2, "chi_transform");
    return make_wave([a, psi](const SpacetimePoint& x, const SpacetimePoint& y) { return a(x.t) * a(y.t) * psi(x, y); },
                     "chi(" + psi.descriptor + ")");
}

/// psi = chi / (a(x0) a(y0)); evaluation where a vanishes throws DomainError.
inline WaveFunction chi_inverse(const ScaleFunction& a, const WaveFunction& chi) {
    detail::require_arity(chi, 2, "chi_inverse");
    return make_wave(
        [a, chi](const SpacetimePoint& x, const SpacetimePoint& y) {
            const double d = a(x.t) * a(y.t);
            if (d == 0.0) throw DomainError("chi_inverse: scale factor vanishes (division by zero)");
            return chi(x, y) / d;
        },
        "psi(" + chi.descriptor + ")");
}

// ---------------------------------------------------------------------------
// N particles
// ---------------------------------------------------------------------------

struct NParticleModel {
    double lambda = 1.0;
    std::vector<double> masses;
    QuadSpec quad{};
};

/// Two-particle configuration for the slot pair (i, j), 0-based.
inline ModelConfig pair_config(const NParticleModel& model, int i, int j) {
    const int n = static_cast<int>(model.masses.size());
    if (n < 2) throw DomainError("pair_config: at least two particles required");
    if (i < 0 || j <= i || j >= n) throw DomainError("pair_config: slots must satisfy 0 <= i < j < N");
    ModelConfig c;
    c.lambda = model.lambda;
    c.m1 = model.masses[static_cast<std::size_t>(i)];
    c.m2 = model.masses[static_cast<std::size_t>(j)];
    c.quad = model.quad;
    return c;
}

/// A^(ij): the two-particle operator acting on slots i < j (0-based), the other
/// coordinates held fixed.
inline EvalResult npart_apply(const ModelConfig& pair_cfg, const WaveFunction& psi, int i, int j,
                              std::span<const SpacetimePoint> pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 2 || psi.arity != n || !psi.eval) throw DomainError("npart_apply: arity must equal the number of points");
    if (i < 0 || j <= i || j >= n) throw DomainError("npart_apply: slots must satisfy 0 <= i < j < N");
    const std::vector<SpacetimePoint> base(pts.begin(), pts.end());
    const WaveFunction slice = make_wave(
        [&psi, &base, i, j](const SpacetimePoint& a, const SpacetimePoint& b) {
            std::vector<SpacetimePoint> p = base;
            p[static_cast<std::size_t>(i)] = a;
            p[static_cast<std::size_t>(j)] = b;
            return psi(p);
        },
        psi.descriptor);
    return a_apply(pair_cfg, slice, base[static_cast<std::size_t>(i)], base[static_cast<std::size_t>(j)]);
}

/// Full N-particle operator: sum of A^(ij) over all pairs, each pair with its own derived seed.
inline EvalResult npart_full_apply(const NParticleModel& model, const WaveFunction& psi,
                                   std::span<const SpacetimePoint> pts) {
    const int n = static_cast<int>(model.masses.size());
    if (static_cast<int>(pts.size()) != n) throw DomainError("npart_full_apply: one point per particle required");
    EvalResult out;
    double var = 0.0;
    std::uint64_t pair = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, ++pair) {
            ModelConfig c = pair_config(model, i, j);
            c.quad.seed = derive_seed(model.quad.seed, 1000 + pair);
            const EvalResult r = npart_apply(c, psi, i, j, pts);
            out.value += r.value;
            out.samples_used += r.samples_used;
            var += r.std_error * r.std_error;
        }
    }
    out.std_error = std::sqrt(var);
    return out;
}

} // namespace lcd
