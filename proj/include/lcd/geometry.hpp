#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <utility>

#include "lcd/errors.hpp"

namespace lcd {

using Vec3 = std::array<double, 3>;

inline constexpr Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline constexpr Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline constexpr Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline constexpr double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

/// Point of the half-space [0, inf) x R^3.
struct SpacetimePoint {
    double t = 0.0;
    Vec3 r{0.0, 0.0, 0.0};
};

inline void validate(const SpacetimePoint& p) {
    if (!(p.t >= 0.0) || !std::isfinite(p.t)) throw DomainError("SpacetimePoint: time must be finite and >= 0");
}

/// b = x - y - (-|y'|, y').
struct BVector {
    double b0 = 0.0;
    Vec3 bvec{0.0, 0.0, 0.0};

    double spatial_norm() const { return norm(bvec); }
    double square() const { return b0 * b0 - dot(bvec, bvec); }
};

/// Minkowski interval (x0-y0)^2 - |x-y|^2.
inline double interval(const SpacetimePoint& x, const SpacetimePoint& y) {
    const Vec3 d = x.r - y.r;
    const double dt = x.t - y.t;
    return dt * dt - dot(d, d);
}

inline BVector b_vector(const SpacetimePoint& x, const SpacetimePoint& y, const Vec3& yprime) {
    return {x.t - y.t + norm(yprime), x.r - y.r - yprime};
}

/// Root r* = b^2 / (2 (b0 + |b| cos)) of the light-cone condition along a ray.
/// Empty when the denominator vanishes or r* <= 0. For |b| = 0 the angle drops out.
inline std::optional<double> r_star(const BVector& b, double cos_theta) {
    const double nb = b.spatial_norm();
    const double den = nb == 0.0 ? b.b0 : b.b0 + nb * cos_theta;
    if (den == 0.0) return std::nullopt;
    const double r = b.square() / (2.0 * den);
    if (!(r > 0.0)) return std::nullopt;
    return r;
}

/// Indicator of the A0 domain, written as the two branches of the reduced operator.
/// Boundary ties count as outside.
inline bool a0_indicator(const BVector& b, double x0, double cos_theta) {
    if (!(x0 > 0.0)) throw DomainError("a0_indicator: x0 must be > 0");
    const double nb = b.spatial_norm();
    const double b2 = b.square();
    if (nb == 0.0) {
        const auto r = r_star(b, cos_theta);
        return r && *r < x0;
    }
    const double threshold = b2 / (2.0 * x0 * nb) - b.b0 / nb;
    if (b2 > 0.0 && b.b0 > 0.0) return cos_theta > threshold;
    if (b2 < 0.0) return cos_theta < threshold;
    return false;
}

/// Range (s_lo, s_hi) swept by r*(u) inside (0, x0) as u = cos(theta) runs over
/// the admissible part of [-1, 1]. Requires |b| > 0.
struct SRange {
    double lo;
    double hi;
};

inline std::optional<SRange> a0_s_range(const BVector& b, double x0) {
    const double nb = b.spatial_norm();
    // Factored so the sign of b^2 agrees with b0 -+ |b| below.
    const double b2 = (b.b0 - nb) * (b.b0 + nb);
    if (b2 > 0.0 && b.b0 > 0.0) {
        const double lo = b2 / (2.0 * (b.b0 + nb));
        const double hi = std::min(0.5 * (b.b0 + nb), x0);
        if (lo < hi) return SRange{lo, hi};
    } else if (b2 < 0.0) {
        const double lo = b2 / (2.0 * (b.b0 - nb));
        if (lo < x0) return SRange{lo, x0};
    }
    return std::nullopt;
}

/// Inverse of s = r*(u): u = (b^2/(2s) - b0) / |b|, clamped to [-1, 1].
inline double u_of_s(const BVector& b, double s) {
    const double u = (b.square() / (2.0 * s) - b.b0) / b.spatial_norm();
    return std::clamp(u, -1.0, 1.0);
}

/// K_{x-y}(rho) = (x-y)^2/(2 rho d) + (x0-y0)/d with d = |x - y|.
/// With theta the angle between y' and y - x and |y'| = rho: b^2 > 0 iff cos(theta) < K.
/// Empty when the spatial points coincide.
inline std::optional<double> cut_K(const SpacetimePoint& x, const SpacetimePoint& y, double rho) {
    if (!(rho > 0.0)) throw DomainError("cut_K: rho must be > 0");
    const double d = norm(x.r - y.r);
    if (d == 0.0) return std::nullopt;
    return interval(x, y) / (2.0 * rho * d) + (x.t - y.t) / d;
}

/// P_{x,y}(rho) = (x0+y0)^2/(2 rho d) - d/(2 rho) - (x0+y0)/d.
/// For rho < x0 + y0: 2 x0 > b0 + |b| iff cos(theta) < P (theta as in cut_K).
inline std::optional<double> cut_P(const SpacetimePoint& x, const SpacetimePoint& y, double rho) {
    if (!(rho > 0.0)) throw DomainError("cut_P: rho must be > 0");
    const double d = norm(x.r - y.r);
    if (d == 0.0) return std::nullopt;
    const double s = x.t + y.t;
    return s * s / (2.0 * rho * d) - d / (2.0 * rho) - s / d;
}

/// Orthonormal frame (e1, e2, e3) with e3 along the given unit vector.
inline std::array<Vec3, 3> frame_along(const Vec3& e3) {
    const Vec3 helper = std::fabs(e3[0]) < 0.6 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    Vec3 e1 = cross(helper, e3);
    e1 = (1.0 / norm(e1)) * e1;
    const Vec3 e2 = cross(e3, e1);
    return {e1, e2, e3};
}

/// Unit vector with polar cosine u and azimuth phi in the given frame.
inline Vec3 direction(const std::array<Vec3, 3>& f, double u, double phi) {
    const double sn = std::sqrt(std::max(0.0, 1.0 - u * u));
    return (sn * std::cos(phi)) * f[0] + (sn * std::sin(phi)) * f[1] + u * f[2];
}

/// Unit vector with polar cosine u and azimuth phi about the global z-axis.
inline Vec3 direction(double u, double phi) {
    const double sn = std::sqrt(std::max(0.0, 1.0 - u * u));
    return {sn * std::cos(phi), sn * std::sin(phi), u};
}

} // namespace lcd
