// Acceptance suite: one PASS/FAIL line per criterion. Usage: acceptance [N ...]; no arguments runs all.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "lcd/commands.hpp"
#include "oracles.hpp"

using namespace lcd;

namespace {

struct Outcome {
    bool passed = true;
    std::string detail;
};

class Stopwatch {
public:
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count(); }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

QuadSpec mc(long n, std::uint64_t seed, int strata = 2) {
    QuadSpec q;
    q.mode = MonteCarlo{n, strata};
    q.seed = seed;
    return q;
}

bool same(const EvalResult& a, const EvalResult& b) { return a.value == b.value && a.std_error == b.std_error; }

WaveFunction plane_product(double m1, double m2, const Vec3& k1, const Vec3& k2) {
    return make_free(PlaneWaveProduct{on_shell(m1, k1), on_shell(m2, k2)});
}

// Tolerances.
constexpr double ledger_rel_tol = 1e-12;
constexpr double ledger_time_limit = 1.0;
constexpr double suprema_eq_tol = 1e-8;
constexpr double suprema_excess_tol = 1e-9;
constexpr double suprema_time_limit = 10.0;
constexpr double specfun_time_limit = 5.0;
constexpr int specfun_points = 100000;
constexpr long bound_samples = 1000000;
constexpr double bound_sigmas = 3.0;
constexpr double oracle_sigmas = 3.0;
constexpr double oracle_rel_floor = 1e-3;
constexpr double propagation_sigmas = 4.0;
constexpr double flrw_identity_tol = 1e-9;
constexpr double nparticle_rel_tol = 1e-15;

// 1. Closed-form ledger.
Outcome criterion1() {
    const Stopwatch sw;
    double worst = 0.0;
    const double pi = std::numbers::pi;
    for (double alpha : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        for (auto [m1, m2] : {std::pair{1.0, 1.0}, std::pair{0.0, 0.0}, std::pair{0.3, 2.0}}) {
            for (double lambda : {1.0 / 137.0, 1.0, 30.0}) {
                const auto b = thm3_bounds(lambda, m1, m2, alpha);
                const double a0 = lambda / (32.0 * pi * alpha);
                const double a1 = 5.0 * lambda * m1 * m1 / (16.0 * pi * alpha * alpha);
                const double a2 = 5.0 * lambda * m2 * m2 / (16.0 * pi * alpha * alpha);
                const double a12 = lambda * m1 * m1 * m2 * m2 / (80.0 * pi * alpha * alpha * alpha);
                auto rel = [](double got, double want) { return want == 0.0 ? std::fabs(got) : std::fabs(got - want) / want; };
                worst = std::max({worst, rel(b.b0, a0), rel(b.b1, a1), rel(b.b2, a2), rel(b.b12, a12),
                                  rel(b.total, a0 + a1 + a2 + a12)});
            }
        }
    }
    const auto b = thm3_bounds(1.0 / 137.0, 1.0, 1.0, 1.0);
    const double expect = 1.0 / (137.0 * 8.0 * pi) * (0.25 + 5.0 + 0.1);
    const double margin_err = std::fabs(b.total - expect) / expect;
    const double t = sw.seconds();
    const bool ok = worst <= ledger_rel_tol && margin_err <= ledger_rel_tol && b.contraction && t < ledger_time_limit;
    return {ok, "margin " + num(b.total) + ", rel err " + num(margin_err) + ", ledger max rel err " + num(worst) + ", " +
                    num(t) + " s"};
}

// 2. Suprema.
Outcome criterion2() {
    const Stopwatch sw;
    double eq = 0.0, excess = -INFINITY;
    for (double alpha : {0.25, 1.0, 4.0}) {
        const auto s = suprema(GaussPoly{alpha});
        const auto cf = suprema_closed_forms(alpha);
        eq = std::max({eq, std::fabs(s[0].value - 0.5 / std::sqrt(alpha)), std::fabs(s[1].value - 1.0 / alpha)});
        for (std::size_t i = 2; i < 7; ++i) excess = std::max(excess, s[i].value - cf[i]);
    }
    const double t = sw.seconds();
    const bool ok = eq <= suprema_eq_tol && excess <= suprema_excess_tol && t < suprema_time_limit;
    return {ok, "max |sup - closed form| " + num(eq) + ", max excess over bounds " + num(excess) + ", " + num(t) + " s"};
}

// 3. Special-function bounds.
Outcome criterion3() {
    const Stopwatch sw;
    double j = 0.0, d = 0.0, td = 0.0;
    for (int i = 0; i < specfun_points; ++i) {
        const double t = 100.0 * i / (specfun_points - 1);
        j = std::max(j, std::fabs(bessel_j1_ratio(t)));
        const double dv = dawson(t);
        d = std::max(d, std::fabs(dv));
        td = std::max(td, std::fabs(t * dv));
    }
    const double t = sw.seconds();
    const bool ok = j <= 0.5 && d < 0.6 && td < 2.0 / 3.0 && t < specfun_time_limit;
    return {ok, "max|J1(t)/t| " + num(j) + ", max|D| " + num(d) + ", max|tD| " + num(td) + ", " + num(t) + " s"};
}

// 4. a0_apply against the pointwise bound; ||psi||_g = 1 for a plane-wave product and g(0) = 1.
Outcome criterion4() {
    const Stopwatch sw;
    const WeightFamily fam = GaussPoly{1.0};
    ModelConfig cfg;
    cfg.lambda = 1.0;
    cfg.weight = fam;
    const auto psi = plane_product(1.0, 1.0, {0.5, -0.2, 0.1}, {0.0, 0.3, 0.7});
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> T(0.0, 2.0), U(-1.0, 1.0);
    double worst = -INFINITY, ratio = 0.0;
    for (int i = 0; i < 20; ++i) {
        const SpacetimePoint x{T(gen), {U(gen), U(gen), U(gen)}}, y{T(gen), {U(gen), U(gen), U(gen)}};
        cfg.quad = mc(bound_samples, 400 + i);
        const auto r = a0_apply(cfg, psi, x, y);
        const double bound = pointwise_bound_a0(cfg.lambda, fam, x.t, y.t);
        worst = std::max(worst, std::abs(r.value) - bound_sigmas * r.std_error - bound);
        if (bound > 0) ratio = std::max(ratio, std::abs(r.value) / bound);
    }
    return {worst <= 0.0,
            "max(|A0 psi| - 3 stderr - bound) " + num(worst) + ", max |A0 psi|/bound " + num(ratio) + ", " + num(sw.seconds()) + " s"};
}

// 5. Independent delta-shell oracles.
Outcome criterion5() {
    const Stopwatch sw;
    const double lambda = std::pow(4.0 * std::numbers::pi, 3);
    const auto one = constant_wave(1.0);
    const oracle::Psi one_o = [](const SpacetimePoint&, const SpacetimePoint&) { return Complex(1.0); };
    const std::vector<std::pair<SpacetimePoint, SpacetimePoint>> a0_points{
        {{1.5, {0.3, 0, 0}}, {0.7, {0, 0.2, 0}}},
        {{0.6, {0, 0, 0}}, {1.8, {1, 0.5, 0}}},
        {{1.0, {0, 0, 0.5}}, {1.2, {0.4, 0, 0}}},
        {{2.0, {0.1, 0.1, 0.1}}, {0.5, {-0.3, 0.2, 0}}},
        {{0.8, {1.5, 0, 0}}, {1.0, {0, 0, 0}}}};
    const std::vector<std::pair<SpacetimePoint, SpacetimePoint>> a1_points{
        {{1.5, {0.3, 0, 0}}, {0.7, {0, 0.2, 0}}},
        {{1.2, {0, 0.1, 0}}, {1.4, {0.2, 0, 0.3}}},
        {{2.0, {0.5, 0, 0}}, {1.0, {0, 0, 0}}}};
    std::ostringstream detail;
    bool ok = true;
    double worst = 0.0;
    auto compare = [&](const char* tag, const EvalResult& r, const oracle::Estimate& o) {
        const double diff = std::abs(r.value - o.value);
        const double tol = std::max(oracle_sigmas * std::hypot(r.std_error, o.std_error), oracle_rel_floor * std::abs(o.value));
        ok = ok && diff <= tol;
        worst = std::max(worst, diff / tol);
        detail << " " << tag << "=" << num(r.value.real()) << "/" << num(o.value.real());
    };
    ModelConfig cfg;
    cfg.lambda = lambda;
    for (std::size_t i = 0; i < a0_points.size(); ++i) {
        const auto& [x, y] = a0_points[i];
        cfg.quad = mc(4000000, 500 + i);
        compare("A0", a0_apply(cfg, one, x, y), oracle::a0_shell(lambda, x, y, one_o, 10000000, 600 + i));
    }
    cfg.m1 = 1.0;
    for (std::size_t i = 0; i < a1_points.size(); ++i) {
        const auto& [x, y] = a1_points[i];
        cfg.quad = mc(4000000, 700 + i);
        compare("A1", a1_apply(cfg, one, x, y), oracle::a1_shell(lambda, 1.0, x, y, one_o, 10000000, 800 + i));
    }
    return {ok, "worst |diff|/tol " + num(worst) + ";" + detail.str() + ", " + num(sw.seconds()) + " s"};
}

// 6. Solver structure.
Outcome criterion6() {
    SolveSpec spec;
    spec.schedule = {mc(400, 61), mc(40, 62), mc(10, 63)};
    spec.cfg.lambda = 0.5;
    spec.cfg.m1 = 1.0;
    spec.cfg.m2 = 0.5;
    spec.cfg.weight = GaussPoly{1.0};
    spec.norm_free = 1.0;
    CloudSpec cs;
    cs.count = 10;
    cs.horizon = 1.2;
    cs.radius = 0.8;
    spec.cloud = make_cloud(cs);
    const auto psi = plane_product(1.0, 0.5, {0.3, 0, 0}, {0, -0.4, 0.2});
    double defect = 0.0;
    for (int K : {1, 2}) {
        SolveSpec s = spec;
        s.K = K;
        for (const auto& p : s.cloud) defect = std::max(defect, std::abs(telescoping_defect(s, psi, K, p)));
    }
    SolveSpec z = spec;
    z.K = 2;
    cs.count = 50;
    z.cloud = make_cloud(cs);
    const auto coincidence = initial_coincidence_test(z, psi);

    SolveSpec l = spec;
    l.K = 1;
    const auto r1 = neumann_evaluate(l, psi);
    l.cfg.lambda = 2.0 * spec.cfg.lambda;
    const auto r2 = neumann_evaluate(l, psi);
    l.cfg.lambda = 3.0 * spec.cfg.lambda;
    const auto r3 = neumann_evaluate(l, psi);
    bool linear = true;
    double dev3 = 0.0;
    int nonzero = 0;
    for (std::size_t i = 0; i < r1.points.size(); ++i) {
        const Complex c1 = r1.points[i].corrections[1].value;
        linear = linear && r2.points[i].corrections[1].value == 2.0 * c1;
        if (c1 == Complex(0.0)) continue;
        ++nonzero;
        dev3 = std::max(dev3, std::abs(r3.points[i].corrections[1].value - 3.0 * c1) / std::abs(c1));
    }
    linear = linear && nonzero > 0;
    const bool ok = defect == 0.0 && coincidence.passed && coincidence.checks.size() == 50 && linear;
    return {ok, "telescoping defect " + num(defect) + ", initial coincidence " + (coincidence.passed ? "exact" : "violated") +
                    " at " + std::to_string(coincidence.checks.size()) + " pairs, S1-S0 at 2 lambda " +
                    (linear ? "exactly doubled" : "not doubled") + " (" + std::to_string(nonzero) +
                    " nonzero points, 3 lambda rel dev " + num(dev3) + ")"};
}

// 7. Finite propagation speed.
Outcome criterion7() {
    const Stopwatch sw;
    const CompactFree free = compact_support_free(0.5);
    PropagationSection ps;
    ps.radius = 0.5;
    ps.horizon = 1.5;
    ps.exterior_points = 100;
    ps.interior_points = 10;
    SolveSpec spec;
    spec.K = 2;
    spec.kind = OperatorKind::Massless;
    spec.schedule = {mc(4000, 71), mc(200, 72), mc(40, 73)};
    spec.cfg.lambda = 5.0;
    spec.cfg.m1 = spec.cfg.m2 = 0.0;
    spec.cfg.weight = GaussPoly{1.0};
    spec.norm_free = 1.0;
    spec.cloud = propagation_cloud(free.region, ps);
    const auto rep = propagation_test(spec, free);
    double worst = 0.0;
    for (const auto& c : rep.checks)
        if (c.exterior) worst = std::max(worst, std::abs(c.value) - propagation_sigmas * c.std_error);
    const bool ok = rep.passed && rep.exterior_points == 100;
    return {ok, std::to_string(rep.exterior_points) + " exterior points, max(|S2| - 4 stderr) " + num(worst) + ", " +
                    std::to_string(rep.nonzero_interior) + " nonzero interior points, " + num(sw.seconds()) + " s"};
}

// 8. FLRW reduction.
Outcome criterion8() {
    const ScaleFunction unit = [](double) { return 1.0; };
    CloudSpec cs;
    cs.count = 10;
    cs.horizon = 1.5;
    ModelConfig cfg;
    cfg.lambda = 2.0;
    const auto psi = plane_product(0.0, 0.0, {0.4, 0.1, 0}, {0, 0.2, -0.3});
    bool bit_exact = true;
    std::uint64_t k = 0;
    for (const auto& p : make_cloud(cs)) {
        cfg.quad = mc(20000, 80 + k++);
        bit_exact = bit_exact && same(a0_flrw_apply(cfg.lambda, unit, psi, p.x, p.y, cfg.quad), a0_apply(cfg, psi, p.x, p.y));
    }
    const Flrw lin{1.0, [](double eta) { return eta; }, [](double eta) { return 0.5 * eta * eta; }};
    std::vector<double> grid;
    for (int i = 0; i <= 30; ++i) grid.push_back(0.1 * i);
    const auto id = flrw_g1_identity(lin, grid);
    const bool thm5 = thm5_bound(8.0 * std::numbers::pi, 1.0) == 1.0;
    const bool ok = bit_exact && id.printed_residual <= flrw_identity_tol && thm5;
    return {ok, std::string("a=1 ") + (bit_exact ? "bit-exact" : "differs") + " at 10 points, max|G1 - g/gamma| " +
                    num(id.printed_residual) + " (max|G1 - (g-1)/gamma| " + num(id.corrected_residual) + "), thm5_bound(8pi,1) " +
                    (thm5 ? "= 1" : "!= 1")};
}

// 9. N-particle ledger and slot locality.
Outcome criterion9() {
    double worst = 0.0;
    for (double alpha : {0.5, 1.0, 3.0}) {
        for (auto [m1, m2] : {std::pair{1.0, 1.0}, std::pair{0.0, 2.0}, std::pair{0.7, 0.2}}) {
            const double n2 = thm4_bound(1.0 / 137.0, std::vector<double>{m1, m2}, alpha);
            const double t3 = thm3_bounds(1.0 / 137.0, m1, m2, alpha).total;
            worst = std::max(worst, std::fabs(n2 - t3) / t3);
        }
    }
    auto f = [](const SpacetimePoint& p) { return Complex(std::cos(p.t + p.r[0]), 0.3 * p.r[1]); };
    auto g = [](const SpacetimePoint& p) { return Complex(1.0 + p.t * p.t, -p.r[2]); };
    auto two = [](const SpacetimePoint&) { return Complex(2.0); };
    NParticleModel m{1.0, {1.0, 0.7, 0.4}, mc(20000, 91)};
    const SpacetimePoint x1{1.2, {0.3, 0, 0}}, x2{0.8, {0, 0.2, 0}}, x3{0.9, {1, 1, 1}}, x3b{1.7, {-2, 0, 0.5}};
    const std::array<SpacetimePoint, 3> pts{x1, x2, x3}, moved{x1, x2, x3b};
    bool ok = true;
    // Pair (0, 1): the third slot is a spectator.
    const auto c01 = pair_config(m, 0, 1);
    const auto r01 = npart_apply(c01, product_wave({f, g, two}), 0, 1, pts);
    const auto r2 = a_apply(c01, product_wave({f, g}), x1, x2);
    ok = ok && r01.value == 2.0 * r2.value && r01.std_error == 2.0 * r2.std_error;
    ok = ok && same(npart_apply(c01, product_wave({f, g, two}), 0, 1, moved), r01);
    // Pair (1, 2): the first slot is a spectator.
    const auto c12 = pair_config(m, 1, 2);
    const auto r12 = npart_apply(c12, product_wave({two, f, g}), 1, 2, pts);
    const auto s2 = a_apply(c12, product_wave({f, g}), x2, x3);
    ok = ok && r12.value == 2.0 * s2.value && r12.std_error == 2.0 * s2.std_error;
    ok = ok && worst <= nparticle_rel_tol;
    return {ok, "max rel |thm4(N=2) - thm3| " + num(worst) + ", N=3 slot locality " + (ok ? "exact" : "violated")};
}

// 10. CLI reproducibility.
Outcome criterion10() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "lcdyn_acceptance";
    fs::remove_all(dir);
    const std::string cfg = std::string(LCD_CONFIG_DIR) + "/default.json";
    auto run = [&](const std::string& tag, const std::string& extra) {
        const std::string cmd =
            std::string(LCDYN_PATH) + " evaluate --config " + cfg + " --out " + (dir / tag).string() + extra + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };
    auto slurp = [&](const std::string& tag) {
        std::ifstream in(dir / tag / "evaluate.csv", std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const bool ran = run("a", "") && run("b", "") && run("c", " --threads 4");
    const std::string a = slurp("a");
    const bool ok = ran && !a.empty() && a == slurp("b") && a == slurp("c");
    return {ok, std::string("two runs and a 4-thread run: ") + (ok ? "byte-identical" : "differ") + " (" +
                    std::to_string(a.size()) + " bytes)"};
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> all{
        {"ledger exactness", criterion1},     {"suprema", criterion2},         {"special-function bounds", criterion3},
        {"operator vs bound", criterion4},    {"oracle equivalence", criterion5}, {"solver structure", criterion6},
        {"finite propagation", criterion7},   {"FLRW reduction", criterion8},  {"N-particle", criterion9},
        {"reproducibility", criterion10}};
    std::vector<int> which;
    for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    if (which.empty())
        for (int i = 1; i <= 10; ++i) which.push_back(i);
    bool all_ok = true;
    for (int n : which) {
        if (n < 1 || n > 10) {
            std::cerr << "unknown criterion " << n << "\n";
            return 2;
        }
        Outcome o;
        try {
            o = all[static_cast<std::size_t>(n - 1)].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << n << " (" << all[static_cast<std::size_t>(n - 1)].first
                  << "): " << o.detail << std::endl;
        all_ok = all_ok && o.passed;
    }
    return all_ok ? 0 : 1;
}
