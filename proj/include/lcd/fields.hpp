#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <utility>
#include <variant>
#include <vector>

#include "lcd/errors.hpp"
#include "lcd/geometry.hpp"
#include "lcd/operators.hpp"
#include "lcd/weights.hpp"

namespace lcd {

// ---------------------------------------------------------------------------
// One-particle free solutions
// ---------------------------------------------------------------------------

/// exp(-i (E t - k.x)) with E on the mass shell.
struct PlaneWave {
    double mass = 0.0;
    Vec3 k{};
    double energy = 0.0;
};

inline PlaneWave on_shell(double mass, const Vec3& k) { return {mass, k, std::sqrt(dot(k, k) + mass * mass)}; }

inline void validate(const PlaneWave& p) {
    if (!(p.mass >= 0.0) || !std::isfinite(p.mass)) throw DomainError("PlaneWave: mass must be finite and >= 0");
    const double e = std::sqrt(dot(p.k, p.k) + p.mass * p.mass);
    if (!(std::fabs(p.energy - e) <= 1e-12 * std::max(1.0, e)))
        throw DomainError("PlaneWave: energy off the mass shell (expected " + std::to_string(e) + ")");
}

inline Complex plane_wave_value(const PlaneWave& p, const SpacetimePoint& x) {
    return std::exp(Complex(0.0, -(p.energy * x.t - dot(p.k, x.r))));
}

/// Odd bump F(s) = s (1 - s^2/R^2)^4 on |s| < R, zero outside.
struct BumpProfile {
    double radius = 0.5;

    double F(double s) const {
        if (!(std::fabs(s) < radius)) return 0.0;
        const double w = 1.0 - (s / radius) * (s / radius);
        return s * w * w * w * w;
    }
    double dF(double s) const {
        if (!(std::fabs(s) < radius)) return 0.0;
        const double q = (s / radius) * (s / radius), w = 1.0 - q;
        return w * w * w * (1.0 - 9.0 * q);
    }
    double d3F(double s) const {
        if (!(std::fabs(s) < radius)) return 0.0;
        const double q = (s / radius) * (s / radius);
        return -24.0 / (radius * radius) * (1.0 - q) * (1.0 - 14.0 * q + 21.0 * q * q);
    }
};

/// Massless spherical wave (F(t + r) - F(t - r)) / r about a center; its value at r = 0 is 2 F'(t).
/// At t = 0 it equals 2 F(r)/r with vanishing time derivative, supported in the ball of radius R.
inline double spherical_wave_value(const BumpProfile& f, const Vec3& center, const SpacetimePoint& x) {
    const double r = norm(x.r - center);
    if (r < 1e-3 * f.radius) return 2.0 * f.dF(x.t) + r * r / 3.0 * f.d3F(x.t);
    return (f.F(x.t + r) - f.F(x.t - r)) / r;
}

// ---------------------------------------------------------------------------
// Two-particle free solutions
// ---------------------------------------------------------------------------

struct PlaneWaveProduct {
    PlaneWave p1;
    PlaneWave p2;
};

struct SphericalPacketMassless {
    BumpProfile profile{};
    Vec3 center1{};
    Vec3 center2{};
    double amplitude = 1.0;
};

struct PacketSuperposition {
    std::vector<std::pair<Complex, PlaneWaveProduct>> terms;
};

using FreeSolutionSpec = std::variant<PlaneWaveProduct, SphericalPacketMassless, PacketSuperposition>;

inline void validate(const FreeSolutionSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PlaneWaveProduct>) {
                validate(s.p1);
                validate(s.p2);
            } else if constexpr (std::is_same_v<T, SphericalPacketMassless>) {
                if (!(s.profile.radius > 0.0)) throw DomainError("SphericalPacketMassless: radius must be > 0");
            } else {
                if (s.terms.empty()) throw DomainError("PacketSuperposition: no terms");
                for (const auto& [c, p] : s.terms) {
                    validate(p.p1);
                    validate(p.p2);
                }
            }
        },
        spec);
}

inline WaveFunction make_free(const FreeSolutionSpec& spec) {
    validate(spec);
    return std::visit(
        [](const auto& s) -> WaveFunction {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, PlaneWaveProduct>) {
                return make_wave([s](const SpacetimePoint& x,
                                     const SpacetimePoint& y) { return plane_wave_value(s.p1, x) * plane_wave_value(s.p2, y); },
                                 "free:plane-wave-product");
            } else if constexpr (std::is_same_v<T, SphericalPacketMassless>) {
                return make_wave(
                    [s](const SpacetimePoint& x, const SpacetimePoint& y) {
                        return Complex(s.amplitude * spherical_wave_value(s.profile, s.center1, x) *
                                       spherical_wave_value(s.profile, s.center2, y));
                    },
                    "free:spherical-packet");
            } else {
                return make_wave(
                    [s](const SpacetimePoint& x, const SpacetimePoint& y) {
                        Complex v = 0.0;
                        for (const auto& [c, p] : s.terms) v += c * plane_wave_value(p.p1, x) * plane_wave_value(p.p2, y);
                        return v;
                    },
                    "free:superposition");
            }
        },
        spec);
}

/// N-particle product of plane waves, one per slot.
inline WaveFunction make_free_product(const std::vector<PlaneWave>& waves) {
    if (waves.size() < 2) throw DomainError("make_free_product: at least two particles required");
    std::vector<std::function<Complex(const SpacetimePoint&)>> f;
    for (const auto& w : waves) {
        validate(w);
        f.emplace_back([w](const SpacetimePoint& x) { return plane_wave_value(w, x); });
    }
    return product_wave(std::move(f), "free:plane-wave-product");
}

/// Initial data supported in balls of radius R about two centers, and its causal growth.
struct SupportRegion {
    Vec3 center1{};
    Vec3 center2{};
    double radius = 0.5;

    bool outside_grown(const SpacetimePoint& x, const SpacetimePoint& y) const {
        return norm(x.r - center1) >= radius + x.t || norm(y.r - center2) >= radius + y.t;
    }
};

struct CompactFree {
    WaveFunction psi;
    SupportRegion region;
};

/// Product of two massless spherical packets with Cauchy data supported in balls of the given radius.
inline CompactFree compact_support_free(double radius, const Vec3& center1 = {}, const Vec3& center2 = {},
                                        double amplitude = 1.0) {
    if (!(radius > 0.0)) throw DomainError("compact_support_free: radius must be > 0");
    const SphericalPacketMassless s{BumpProfile{radius}, center1, center2, amplitude};
    return {make_free(s), SupportRegion{center1, center2, radius}};
}

// ---------------------------------------------------------------------------
// Point clouds and weighted norms
// ---------------------------------------------------------------------------

struct PointPair {
    SpacetimePoint x;
    SpacetimePoint y;
};

using PointCloud = std::vector<PointPair>;

/// Radical inverse of i in the given prime base.
inline double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, v = 0.0;
    while (i > 0) {
        v += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return v;
}

/// Component d (< 8) of the Halton point with index i.
inline double halton(std::uint64_t i, int d) {
    static constexpr unsigned primes[8] = {2, 3, 5, 7, 11, 13, 17, 19};
    return radical_inverse(i, primes[d]);
}

/// Point in the ball of radius r about c from three unit-cube coordinates.
inline Vec3 ball_point(const Vec3& c, double r, double u0, double u1, double u2) {
    return c + (r * std::cbrt(u0)) * direction(2.0 * u1 - 1.0, 2.0 * std::numbers::pi * u2);
}

/// Halton cloud: times in [0, horizon] (or exactly 0), positions in balls about the two centers.
struct CloudSpec {
    std::size_t count = 10;
    double horizon = 1.0;
    double radius = 1.0;
    Vec3 center1{};
    Vec3 center2{};
    bool zero_time = false;
    std::uint64_t offset = 1;
};

inline PointCloud make_cloud(const CloudSpec& c) {
    if (!(c.horizon >= 0.0) || !(c.radius >= 0.0)) throw DomainError("make_cloud: horizon and radius must be >= 0");
    PointCloud out;
    out.reserve(c.count);
    for (std::size_t n = 0; n < c.count; ++n) {
        const std::uint64_t i = n + c.offset;
        const double tx = c.zero_time ? 0.0 : c.horizon * halton(i, 0);
        const double ty = c.zero_time ? 0.0 : c.horizon * halton(i, 1);
        out.push_back({{tx, ball_point(c.center1, c.radius, halton(i, 2), halton(i, 3), halton(i, 4))},
                       {ty, ball_point(c.center2, c.radius, halton(i, 5), halton(i, 6), halton(i, 7))}});
    }
    return out;
}

/// Cloud for norm estimation: the time grid {0} plus log-spaced times up to the horizon,
/// crossed pairwise and combined with Halton positions in a ball.
struct NormCloud {
    double horizon = 2.0;
    int times = 12;
    int spatial = 32;
    double radius = 2.0;
};

inline PointCloud make_norm_cloud(const NormCloud& c) {
    if (c.times < 1 || c.spatial < 1 || !(c.horizon > 0.0)) throw DomainError("make_norm_cloud: empty cloud");
    std::vector<double> ts{0.0};
    for (int i = 0; i < c.times; ++i) ts.push_back(c.horizon * std::pow(1e-3, 1.0 - static_cast<double>(i) / std::max(1, c.times - 1)));
    PointCloud out;
    for (double tx : ts) {
        for (double ty : ts) {
            for (int s = 1; s <= c.spatial; ++s) {
                const auto i = static_cast<std::uint64_t>(s);
                out.push_back({{tx, ball_point({}, c.radius, halton(i, 2), halton(i, 3), halton(i, 4))},
                               {ty, ball_point({}, c.radius, halton(i, 5), halton(i, 6), halton(i, 7))}});
            }
        }
    }
    return out;
}

/// Lower estimate of ||psi||_g: max over the cloud of |psi| / (g(x0) g(y0)).
inline double norm_estimate(const WaveFunction& psi, const WeightFamily& fam, const PointCloud& cloud) {
    detail::require_arity(psi, 2, "norm_estimate");
    double best = 0.0;
    for (const auto& p : cloud) best = std::max(best, std::abs(psi(p.x, p.y)) / (g_value(fam, p.x.t) * g_value(fam, p.y.t)));
    return best;
}

inline double norm_estimate(const WaveFunction& psi, const WeightFamily& fam, const NormCloud& c = {}) {
    return norm_estimate(psi, fam, make_norm_cloud(c));
}

} // namespace lcd
