#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "lcd/quadrature.hpp"

using namespace lcd;

namespace {

QuadSpec mc(long n, int strata = 2, std::uint64_t seed = 7) {
    QuadSpec s;
    s.mode = MonteCarlo{n, strata};
    s.seed = seed;
    return s;
}

QuadSpec det(int n) {
    QuadSpec s;
    s.mode = Deterministic{n};
    return s;
}

double boost_gk(const std::function<double(double)>& f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

} // namespace

TEST(CounterRngTest, OpenUnitIntervalAndReproducible) {
    CounterRng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 10000; ++i) {
        const double u = a.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
        ASSERT_EQ(u, b.uniform());
        differs |= u != c.uniform();
    }
    EXPECT_TRUE(differs);
}

TEST(QuadSpecTest, ValidateRejectsBadBudgets) {
    QuadSpec s;
    s.mode = Deterministic{1};
    EXPECT_THROW(validate(s), DomainError);
    s.mode = MonteCarlo{0, 2};
    EXPECT_THROW(validate(s), DomainError);
    s.mode = MonteCarlo{10, 2};
    s.target_rel_error = 0.0;
    EXPECT_THROW(validate(s), DomainError);
}

TEST(GaussLegendreTest, ExactForPolynomials) {
    for (int n : {2, 3, 5, 8, 16}) {
        const auto r = gauss_legendre(n);
        for (int p = 0; p <= 2 * n - 1; ++p) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i) sum += r.w[i] * std::pow(r.x[i], p);
            const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
            EXPECT_NEAR(sum, exact, 1e-14) << "n=" << n << " p=" << p;
        }
    }
}

TEST(Adaptive, MatchesBoostGaussKronrod) {
    const std::vector<std::function<double(double)>> fs{
        [](double x) { return std::exp(-x * x); },
        [](double x) { return std::sqrt(x); },
        [](double x) { return std::cos(30.0 * x) / (1.0 + x); },
        [](double x) { return std::log(x + 1e-3); }};
    for (const auto& f : fs) {
        const auto r = integrate_adaptive(f, 0.0, 2.0, 1e-13, 1e-13);
        EXPECT_TRUE(r.converged);
        EXPECT_NEAR(r.value, boost_gk(f, 0.0, 2.0), 1e-11);
    }
    EXPECT_EQ(integrate_adaptive([](double) { return 1.0; }, 1.0, 1.0).value, 0.0);
}

TEST(Integrate, ConstantOnCubeIsExact) {
    const auto r = integrate({{0, 1}, {0, 1}, {0, 1}}, [](std::span<const double>) { return 1.0; }, mc(1000));
    EXPECT_EQ(r.value, Complex(1.0, 0.0));
    EXPECT_EQ(r.std_error, 0.0);
    EXPECT_EQ(r.samples_used, 1000);
}

TEST(Integrate, DeterministicLinear) {
    const auto r = integrate({{0, 1}}, [](std::span<const double> u) { return u[0]; }, det(4));
    EXPECT_NEAR(r.value.real(), 0.5, 1e-12);
    EXPECT_EQ(r.std_error, 0.0);
}

TEST(Integrate, SeparableGaussianAgainstOneDimensionalOracle) {
    auto g = [](double x) { return std::exp(-3.0 * (x - 0.4) * (x - 0.4)); };
    const double one = boost_gk(g, 0.0, 1.0);
    const auto r = integrate({{0, 1}, {0, 1}}, [&](std::span<const double> u) { return g(u[0]) * g(u[1]); },
                             mc(20000, 4));
    EXPECT_LE(std::abs(r.value.real() - one * one), 3.0 * r.std_error);
    EXPECT_GT(r.std_error, 0.0);
    const auto d = integrate({{0, 1}, {0, 1}}, [&](std::span<const double> u) { return g(u[0]) * g(u[1]); },
                             det(20));
    EXPECT_NEAR(d.value.real(), one * one, 1e-13);
}

TEST(Integrate, ComplexIntegrand) {
    const auto r = integrate({{0, std::numbers::pi}},
                             [](std::span<const double> u) { return std::exp(Complex(0.0, u[0])); }, det(30));
    EXPECT_NEAR(r.value.real(), 0.0, 1e-13);
    EXPECT_NEAR(r.value.imag(), 2.0, 1e-13);
}

TEST(Integrate, ReproducibleAndThreadIndependent) {
    auto f = [](std::span<const double> u) { return std::sin(u[0] * 3.0) * u[1] + u[2] * u[3] * u[4]; };
    const std::array<Interval, 5> box{Interval{0, 1}, {0, 2}, {0, 1}, {-1, 1}, {0, 1}};
    QuadSpec s = mc(5000, 3, 99);
    const auto a = integrate(std::span<const Interval>(box), f, s);
    const auto b = integrate(std::span<const Interval>(box), f, s);
    s.threads = 4;
    const auto c = integrate(std::span<const Interval>(box), f, s);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
    EXPECT_EQ(a.value, c.value);
    EXPECT_EQ(a.std_error, c.std_error);
    s.seed = 100;
    EXPECT_NE(integrate(std::span<const Interval>(box), f, s).value, a.value);
}

TEST(Integrate, MonteCarloCoverage) {
    auto f = [](std::span<const double> u) { return std::exp(u[0] + u[1] * u[2]); };
    const double exact = [] {
        // int_0^1 e^x dx * int_0^1 int_0^1 e^{yz} dy dz
        auto inner = [](double y) { return y == 0.0 ? 1.0 : std::expm1(y) / y; };
        return std::expm1(1.0) * boost_gk(inner, 0.0, 1.0);
    }();
    int covered = 0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const auto r = integrate({{0, 1}, {0, 1}, {0, 1}}, f, mc(256, 2, t));
        covered += std::abs(r.value.real() - exact) <= 4.0 * r.std_error;
    }
    EXPECT_GE(covered, 990);
}

TEST(Integrate, StrataReducedToFitBudget) {
    auto f = [](std::span<const double> u) { return u[0] + u[1]; };
    const auto r = integrate({{0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}}, f, mc(100, 4));
    EXPECT_EQ(r.samples_used, 100);
    EXPECT_GT(r.std_error, 0.0);
    EXPECT_TRUE(std::isfinite(r.std_error));
}

TEST(Integrate, NonFiniteSampleReportsCoordinates) {
    auto f = [](std::span<const double> u) { return 1.0 / (u[0] - u[0]); };
    try {
        integrate({{0, 1}}, f, mc(10));
        FAIL() << "expected EvaluationError";
    } catch (const EvaluationError& e) {
        EXPECT_NE(std::string(e.what()).find('('), std::string::npos);
    }
}

TEST(Integrate, RejectsBadDomains) {
    auto f = [](std::span<const double>) { return 1.0; };
    EXPECT_THROW(integrate({{0, INFINITY}}, f, mc(10)), DomainError);
    const std::vector<Interval> big(9);
    EXPECT_THROW(integrate(std::span<const Interval>(big), f, mc(10)), DomainError);
}

TEST(SubstitutedAngular, ZeroIntegrand) {
    const BVector b{2.0, {1, 0, 0}};
    const auto r = substituted_angular_integrate(b, 3.0, [](double) { return 0.0; }, mc(100));
    EXPECT_EQ(r.value, Complex(0.0, 0.0));
}

TEST(SubstitutedAngular, UnitNormExample) {
    // |b| = 1: the integral of the weight equals twice the swept r* range.
    const BVector b{2.0, {0, 0, 1}};
    const double x0 = 5.0;
    const auto range = a0_s_range(b, x0).value();
    const auto r = substituted_angular_integrate(b, x0, [](double) { return 1.0; }, det(8));
    EXPECT_NEAR(r.value.real(), 2.0 * (range.hi - range.lo), 1e-13);
    // Direct u-integration of |b^2|/(b0+u)^2 over [-1, 1].
    const double direct = boost_gk([](double u) { return 3.0 / ((2.0 + u) * (2.0 + u)); }, -1.0, 1.0);
    EXPECT_NEAR(r.value.real(), direct, 1e-12);
}

TEST(SubstitutedAngular, EmptyRangeIsExactZero) {
    // b^2 < 0 and 2 x0 <= b0 + |b|.
    const BVector b{0.5, {2, 0, 0}};
    const auto r = substituted_angular_integrate(b, 1.0, [](double) { return 1.0; }, mc(100));
    EXPECT_EQ(r.value, Complex(0.0, 0.0));
    EXPECT_EQ(r.std_error, 0.0);
    EXPECT_THROW(substituted_angular_integrate(BVector{1.0, {}}, 1.0, [](double) { return 1.0; }, mc(10)),
                 DomainError);
}

TEST(SubstitutedAngular, AgreesWithDirectQuadrature) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto h = [](double u) { return 1.0 + std::cos(3.0 * u) + u * u; };
    int timelike = 0, spacelike = 0;
    while (timelike + spacelike < 100) {
        const BVector b{2.5 * U(gen), {1.5 * U(gen), 1.5 * U(gen), 1.5 * U(gen)}};
        const double x0 = 0.1 + 2.0 * (U(gen) + 1.0);
        const double nb = b.spatial_norm(), b2 = b.square();
        double lo, hi;
        if (b2 > 0 && b.b0 > 0) {
            lo = std::max(-1.0, b2 / (2 * x0 * nb) - b.b0 / nb);
            hi = 1.0;
            ++timelike;
        } else if (b2 < 0) {
            lo = -1.0;
            hi = std::min(1.0, b2 / (2 * x0 * nb) - b.b0 / nb);
            ++spacelike;
        } else {
            continue;
        }
        double direct = 0.0;
        if (hi > lo)
            direct = boost_gk([&](double u) { return std::fabs(b2) / std::pow(b.b0 + nb * u, 2) * h(u); }, lo, hi);
        const auto r = substituted_angular_integrate(b, x0, h, det(40));
        EXPECT_NEAR(r.value.real(), direct, 1e-6 * std::max(1.0, std::fabs(direct)));
        const auto m = substituted_angular_integrate(b, x0, h, mc(4000, 8));
        EXPECT_LE(std::fabs(m.value.real() - direct), std::max(4.0 * m.std_error, 1e-6));
    }
}
