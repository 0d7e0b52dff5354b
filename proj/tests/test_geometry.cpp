#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lcd/geometry.hpp"

using namespace lcd;

namespace {

struct Rng {
    std::mt19937_64 gen{12345};
    double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(gen); }
    Vec3 vec(double s) { return {uniform(-s, s), uniform(-s, s), uniform(-s, s)}; }
};

// Rotation about a unit axis by angle w (Rodrigues).
Vec3 rotate(const Vec3& v, const Vec3& axis, double w) {
    const double c = std::cos(w), s = std::sin(w);
    return (c * v) + (s * cross(axis, v)) + ((1.0 - c) * dot(axis, v)) * axis;
}

} // namespace

TEST(Interval, Examples) {
    EXPECT_EQ(interval({1, {0, 0, 0}}, {0, {0, 0, 0}}), 1.0);
    EXPECT_EQ(interval({1, {1, 0, 0}}, {0, {0, 0, 0}}), 0.0);
    EXPECT_EQ(interval({0, {1, 0, 0}}, {0, {0, 0, 0}}), -1.0);
}

TEST(SpacetimePoint, ValidateRejectsNegativeTime) {
    EXPECT_THROW(validate(SpacetimePoint{-0.1, {}}), DomainError);
    EXPECT_NO_THROW(validate(SpacetimePoint{0.0, {}}));
}

TEST(BVectorTest, Examples) {
    const BVector b = b_vector({2, {0, 0, 0}}, {1, {0, 0, 0}}, {1, 0, 0});
    EXPECT_EQ(b.b0, 2.0);
    EXPECT_EQ(b.bvec, (Vec3{-1, 0, 0}));
    const BVector z = b_vector({1, {1, 2, 3}}, {1, {1, 2, 3}}, {0, 0, 0});
    EXPECT_EQ(z.b0, 0.0);
    EXPECT_EQ(z.bvec, (Vec3{0, 0, 0}));
    const Vec3 yp{0.6, 0.0, 0.8};
    const BVector u = b_vector({1, {1, 2, 3}}, {1, {1, 2, 3}}, yp);
    EXPECT_DOUBLE_EQ(u.b0, 1.0);
    EXPECT_EQ(u.bvec, (-1.0) * yp);
}

TEST(RStar, Examples) {
    const BVector unit{1.0, {0, 0, 0}};
    for (double c : {-1.0, 0.0, 0.3, 1.0}) EXPECT_EQ(r_star(unit, c).value(), 0.5);
    EXPECT_DOUBLE_EQ(r_star(BVector{2.0, {1, 0, 0}}, 0.0).value(), 0.75);
    // b^2 < 0, cos > -b0/|b|: denominator positive, r* negative.
    const BVector space{0.5, {2, 0, 0}};
    EXPECT_FALSE(r_star(space, 0.0).has_value());
    // Vanishing denominator.
    EXPECT_FALSE(r_star(BVector{1.0, {2, 0, 0}}, -0.5).has_value());
}

TEST(A0Indicator, Examples) {
    EXPECT_FALSE(a0_indicator(BVector{-2.0, {1, 0, 0}}, 5.0, 0.3));
    for (double c : {-1.0, 0.0, 1.0}) {
        EXPECT_TRUE(a0_indicator(BVector{1.0, {0, 0, 0}}, 1.0, c));
        EXPECT_FALSE(a0_indicator(BVector{1.0, {0, 0, 0}}, 0.4, c));
    }
    EXPECT_THROW(a0_indicator(BVector{1.0, {}}, 0.0, 0.0), DomainError);
}

TEST(A0Indicator, EquivalentToRootInRange) {
    Rng rng;
    int inside = 0;
    for (int i = 0; i < 100000; ++i) {
        const BVector b{rng.uniform(-3, 3), rng.vec(2.0)};
        const double x0 = rng.uniform(0.01, 3.0);
        const double c = rng.uniform(-1.0, 1.0);
        const auto r = r_star(b, c);
        const bool expect = r && *r < x0;
        ASSERT_EQ(a0_indicator(b, x0, c), expect) << "b0=" << b.b0 << " x0=" << x0 << " c=" << c;
        inside += expect;
    }
    EXPECT_GT(inside, 10000);
}

TEST(A0SRange, MatchesSweepOfRoot) {
    Rng rng;
    for (int i = 0; i < 2000; ++i) {
        const BVector b{rng.uniform(-3, 3), rng.vec(2.0)};
        const double x0 = rng.uniform(0.05, 3.0);
        double lo = INFINITY, hi = -INFINITY;
        for (int k = 0; k <= 4000; ++k) {
            const double c = -1.0 + 2.0 * k / 4000.0;
            if (a0_indicator(b, x0, c)) {
                const double r = *r_star(b, c);
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        }
        const auto range = a0_s_range(b, x0);
        if (!(hi > lo)) continue;
        ASSERT_TRUE(range.has_value());
        EXPECT_LE(range->lo, lo + 1e-12);
        EXPECT_GE(range->hi, hi - 1e-12 * (1.0 + hi));
        EXPECT_NEAR(range->lo, lo, 2e-2 * (1.0 + lo));
        // Points just inside either end are attained at an admissible angle.
        for (double f : {1e-6, 0.5, 1.0 - 1e-6}) {
            const double s = range->lo + f * (range->hi - range->lo);
            const double u = (b.square() / (2.0 * s) - b.b0) / b.spatial_norm();
            ASSERT_GE(u, -1.0 - 1e-9);
            ASSERT_LE(u, 1.0 + 1e-9);
            EXPECT_TRUE(a0_indicator(b, x0, std::clamp(u, -1.0, 1.0)));
        }
    }
}

TEST(UOfS, InvertsRoot) {
    Rng rng;
    for (int i = 0; i < 1000; ++i) {
        const BVector b{rng.uniform(-3, 3), rng.vec(2.0)};
        const double c = rng.uniform(-0.99, 0.99);
        const auto r = r_star(b, c);
        if (!r) continue;
        EXPECT_NEAR(u_of_s(b, *r), c, 1e-9);
    }
}

TEST(CutK, Examples) {
    EXPECT_DOUBLE_EQ(cut_K({2, {1, 0, 0}}, {0, {0, 0, 0}}, 1.0).value(), 3.5);
    EXPECT_DOUBLE_EQ(cut_K({1, {1, 0, 0}}, {0, {0, 0, 0}}, 0.7).value(), 1.0);
    EXPECT_FALSE(cut_K({1, {1, 0, 0}}, {0, {1, 0, 0}}, 1.0).has_value());
    EXPECT_THROW(cut_K({1, {}}, {0, {1, 0, 0}}, 0.0), DomainError);
}

TEST(CutK, ThresholdMatchesSignOfBSquare) {
    Rng rng;
    for (int i = 0; i < 20000; ++i) {
        const SpacetimePoint x{rng.uniform(0, 3), rng.vec(2)}, y{rng.uniform(0, 3), rng.vec(2)};
        const double rho = rng.uniform(0.01, 3.0);
        const Vec3 yp = rho * direction(rng.uniform(-1, 1), rng.uniform(0, 2 * std::numbers::pi));
        const Vec3 dyx = y.r - x.r;
        const double c = dot(yp, dyx) / (rho * norm(dyx));
        const double K = *cut_K(x, y, rho);
        const double b2 = b_vector(x, y, yp).square();
        if (std::fabs(c - K) < 1e-12 || std::fabs(b2) < 1e-12) continue;
        ASSERT_EQ(b2 > 0.0, c < K);
    }
}

TEST(CutP, Examples) {
    const SpacetimePoint x{1.0, {0, 0, 0}}, y{0.5, {1.2, 0.4, 0}};
    const double d = norm(x.r - y.r);
    EXPECT_NEAR(cut_P(x, y, 0.5 * (x.t + y.t + d)).value(), -1.0, 1e-14);
    const double x0 = 0.8, dd = 1.3;
    const double expect = ((2 * x0) * (2 * x0) - dd * dd) / (2 * dd * dd) - 2 * x0 / dd;
    EXPECT_NEAR(cut_P({x0, {0, 0, 0}}, {x0, {dd, 0, 0}}, dd).value(), expect, 1e-14);
}

TEST(CutP, DecreasingInRho) {
    const SpacetimePoint x{1.0, {0, 0, 0}}, y{1.5, {0.7, 0.2, 0}};
    double prev = *cut_P(x, y, 0.01);
    for (double rho = 0.02; rho < 3.0; rho += 0.01) {
        const double p = *cut_P(x, y, rho);
        EXPECT_LT(p, prev);
        prev = p;
    }
}

TEST(CutP, ThresholdMatchesUpperRootCondition) {
    Rng rng;
    for (int i = 0; i < 20000; ++i) {
        const SpacetimePoint x{rng.uniform(0, 3), rng.vec(2)}, y{rng.uniform(0, 3), rng.vec(2)};
        const double rho = rng.uniform(0.01, x.t + y.t);
        const Vec3 yp = rho * direction(rng.uniform(-1, 1), rng.uniform(0, 2 * std::numbers::pi));
        const Vec3 dyx = y.r - x.r;
        const double c = dot(yp, dyx) / (rho * norm(dyx));
        const double P = *cut_P(x, y, rho);
        const BVector b = b_vector(x, y, yp);
        const double lhs = 2.0 * x.t - (b.b0 + b.spatial_norm());
        if (std::fabs(c - P) < 1e-10 || std::fabs(lhs) < 1e-10) continue;
        ASSERT_EQ(lhs > 0.0, c < P);
    }
}

TEST(Frames, OrthonormalAndDirectionUnit) {
    Rng rng;
    for (int i = 0; i < 500; ++i) {
        Vec3 e = rng.vec(1.0);
        e = (1.0 / norm(e)) * e;
        const auto f = frame_along(e);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) EXPECT_NEAR(dot(f[a], f[b]), a == b ? 1.0 : 0.0, 1e-14);
        EXPECT_NEAR(norm(f[2] - e), 0.0, 1e-15);
        const double u = rng.uniform(-1, 1);
        const Vec3 n = direction(f, u, rng.uniform(0, 6.28));
        EXPECT_NEAR(norm(n), 1.0, 1e-14);
        EXPECT_NEAR(dot(n, e), u, 1e-14);
    }
}

TEST(Geometry, RotationInvariance) {
    Rng rng;
    for (int i = 0; i < 2000; ++i) {
        Vec3 axis = rng.vec(1.0);
        axis = (1.0 / norm(axis)) * axis;
        const double w = rng.uniform(0, 6.28);
        const SpacetimePoint x{rng.uniform(0, 3), rng.vec(2)}, y{rng.uniform(0, 3), rng.vec(2)};
        const Vec3 yp = rng.vec(1.5);
        const SpacetimePoint xr{x.t, rotate(x.r, axis, w)}, yr{y.t, rotate(y.r, axis, w)};
        EXPECT_NEAR(interval(x, y), interval(xr, yr), 1e-12);
        const BVector b = b_vector(x, y, yp), br = b_vector(xr, yr, rotate(yp, axis, w));
        EXPECT_NEAR(b.square(), br.square(), 1e-12);
        const double c = rng.uniform(-1, 1);
        const auto r1 = r_star(b, c), r2 = r_star(br, c);
        ASSERT_EQ(r1.has_value(), r2.has_value());
        if (r1) {
            EXPECT_NEAR(*r1, *r2, 1e-10 * (1 + *r1));
        }
        const double x0 = rng.uniform(0.1, 3);
        if (r1 && std::fabs(*r1 - x0) > 1e-9) {
            EXPECT_EQ(a0_indicator(b, x0, c), a0_indicator(br, x0, c));
        }
    }
}
