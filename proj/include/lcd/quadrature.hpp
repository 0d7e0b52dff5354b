#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <queue>
#include <span>
#include <sstream>
#include <thread>
#include <type_traits>
#include <variant>
#include <vector>

#include "lcd/errors.hpp"
#include "lcd/geometry.hpp"

namespace lcd {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Counter-based random numbers
// ---------------------------------------------------------------------------

/// SplitMix64 finalizer; used as a keyed hash.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Combine a stream key with a further label.
inline constexpr std::uint64_t derive_seed(std::uint64_t key, std::uint64_t label) {
    return mix64(key ^ mix64(label + 0x632be59bd9b4e019ULL));
}

/// Stateless stream: the n-th draw depends only on (key, n).
class CounterRng {
public:
    explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        const std::uint64_t bits = mix64(key_ ^ mix64(counter_++));
        return (static_cast<double>(bits >> 11) + 0.5) * 0x1p-53;
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// Specs and results
// ---------------------------------------------------------------------------

struct Deterministic {
    int points_per_axis = 8;
};

struct MonteCarlo {
    long samples = 10000;
    int strata_per_axis = 2;
};

struct QuadSpec {
    std::variant<Deterministic, MonteCarlo> mode = MonteCarlo{};
    std::uint64_t seed = 0;
    double target_rel_error = 1e-2;
    /// Worker count for stratum fan-out; never changes the result.
    int threads = 1;
};

struct EvalResult {
    Complex value{0.0, 0.0};
    double std_error = 0.0;
    long samples_used = 0;
};

inline constexpr int max_quad_dim = 8;

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

inline void validate(const QuadSpec& spec) {
    if (const auto* d = std::get_if<Deterministic>(&spec.mode)) {
        if (d->points_per_axis < 2) throw DomainError("QuadSpec: points_per_axis must be >= 2");
    } else {
        const auto& m = std::get<MonteCarlo>(spec.mode);
        if (m.samples < 1) throw DomainError("QuadSpec: samples must be >= 1");
        if (m.strata_per_axis < 1) throw DomainError("QuadSpec: strata_per_axis must be >= 1");
    }
    if (!(spec.target_rel_error > 0.0)) throw DomainError("QuadSpec: target_rel_error must be > 0");
    if (spec.threads < 1) throw DomainError("QuadSpec: threads must be >= 1");
}

inline QuadSpec with_seed(QuadSpec spec, std::uint64_t seed) {
    spec.seed = seed;
    return spec;
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes
// ---------------------------------------------------------------------------

struct GaussLegendre {
    std::vector<double> x;  // nodes on (-1, 1)
    std::vector<double> w;
};

inline GaussLegendre gauss_legendre(int n) {
    GaussLegendre r{std::vector<double>(n), std::vector<double>(n)};
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::fabs(dz) < 1e-16) break;
        }
        r.x[i] = -z;
        r.x[n - 1 - i] = z;
        r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return r;
}

// ---------------------------------------------------------------------------
// Adaptive 1-D Gauss-Kronrod (7/15)
// ---------------------------------------------------------------------------

struct AdaptiveResult {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    bool converged = false;
};

namespace detail {

inline constexpr std::array<double, 8> gk15_x{
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> gk15_wk{
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gk15_wg{
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    const double fc = f(c);
    double k = fc * gk15_wk[7], g = fc * gk15_wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * gk15_x[j];
        const double fs = f(c - dx) + f(c + dx);
        k += gk15_wk[j] * fs;
        if (j % 2 == 1) g += gk15_wg[j / 2] * fs;
    }
    return {a, b, k * h, std::fabs((k - g) * h)};
}

} // namespace detail

/// Globally adaptive bisection on [a, b] until error <= max(abs_tol, rel_tol*|I|).
template <class F>
AdaptiveResult integrate_adaptive(F&& f, double a, double b, double abs_tol = 1e-12,
                                  double rel_tol = 1e-12, int max_panels = 2000,
                                  int initial_panels = 1) {
    AdaptiveResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    std::priority_queue<detail::Panel> heap;
    double value = 0.0, error = 0.0;
    for (int i = 0; i < initial_panels; ++i) {
        const double lo = a + (b - a) * i / initial_panels;
        const double hi = (i + 1 == initial_panels) ? b : a + (b - a) * (i + 1) / initial_panels;
        auto p = detail::gk15(f, lo, hi);
        value += p.value;
        error += p.error;
        heap.push(p);
    }
    int panels = initial_panels;
    while (error > std::max(abs_tol, rel_tol * std::fabs(value)) && panels < max_panels) {
        const auto worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;
        }
        const auto l = detail::gk15(f, worst.a, mid);
        const auto r = detail::gk15(f, mid, worst.b);
        value += l.value + r.value - worst.value;
        error += l.error + r.error - worst.error;
        heap.push(l);
        heap.push(r);
        ++panels;
    }
    // Re-sum to remove drift from the running updates.
    value = 0.0;
    error = 0.0;
    while (!heap.empty()) {
        value += heap.top().value;
        error += heap.top().error;
        heap.pop();
    }
    out.value = value;
    out.error = error;
    out.evaluations = 15L * (2L * panels - initial_panels);
    out.converged = error <= std::max(abs_tol, rel_tol * std::fabs(value));
    return out;
}

// ---------------------------------------------------------------------------
// Multi-dimensional integration on a box
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_point(std::span<const double> u) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < u.size(); ++i) os << (i ? ", " : "") << u[i];
    os << ')';
    return os.str();
}

template <class F>
Complex sample(F& f, std::span<const double> u) {
    Complex v;
    if constexpr (std::is_convertible_v<std::invoke_result_t<F&, std::span<const double>>, double>) {
        v = Complex(f(u), 0.0);
    } else {
        v = f(u);
    }
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw EvaluationError("integrate: non-finite integrand at " + format_point(u));
    return v;
}

struct StratumSum {
    Complex mean;
    double var_of_mean;  // variance of the stratum mean (re + im)
};

template <class F>
StratumSum run_stratum(F& f, std::span<const Interval> box, long index, long n, int s,
                       std::uint64_t seed) {
    const std::size_t d = box.size();
    std::array<int, max_quad_dim> digit{};
    long rest = index;
    for (std::size_t a = 0; a < d; ++a) {
        digit[a] = static_cast<int>(rest % s);
        rest /= s;
    }
    CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
    std::array<double, max_quad_dim> u{};
    double mr = 0.0, mi = 0.0, m2 = 0.0;
    for (long j = 0; j < n; ++j) {
        for (std::size_t a = 0; a < d; ++a) {
            const double v = (digit[a] + rng.uniform()) / s;
            u[a] = box[a].lo + (box[a].hi - box[a].lo) * v;
        }
        const Complex fv = sample(f, std::span<const double>(u.data(), d));
        // Welford update, real and imaginary parts share the count.
        const double dr = fv.real() - mr, di = fv.imag() - mi;
        mr += dr / static_cast<double>(j + 1);
        mi += di / static_cast<double>(j + 1);
        m2 += dr * (fv.real() - mr) + di * (fv.imag() - mi);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) / static_cast<double>(n) : 0.0;
    return {Complex(mr, mi), var};
}

} // namespace detail

/// Integrate f over the box. f takes std::span<const double> and returns a real or
/// complex value. Deterministic mode uses a tensor Gauss-Legendre rule; Monte Carlo
/// mode uses stratified sampling with per-stratum variance pooling.
template <class F>
EvalResult integrate(std::span<const Interval> box, F&& f, const QuadSpec& spec) {
    const std::size_t d = box.size();
    if (d == 0 || d > static_cast<std::size_t>(max_quad_dim))
        throw DomainError("integrate: dimension must be in [1, 8]");
    double volume = 1.0;
    for (const auto& iv : box) {
        if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi)) throw DomainError("integrate: unbounded domain");
        volume *= iv.hi - iv.lo;
    }
    EvalResult out;

    if (const auto* det = std::get_if<Deterministic>(&spec.mode)) {
        const int n = det->points_per_axis;
        if (n < 2) throw DomainError("integrate: points_per_axis must be >= 2");
        const auto rule = gauss_legendre(n);
        std::array<int, max_quad_dim> idx{};
        std::array<double, max_quad_dim> u{};
        Complex sum = 0.0;
        long count = 0;
        while (true) {
            double w = 1.0;
            for (std::size_t a = 0; a < d; ++a) {
                const double half = 0.5 * (box[a].hi - box[a].lo);
                u[a] = box[a].lo + half * (1.0 + rule.x[idx[a]]);
                w *= half * rule.w[idx[a]];
            }
            sum += w * detail::sample(f, std::span<const double>(u.data(), d));
            ++count;
            std::size_t a = 0;
            while (a < d && ++idx[a] == n) idx[a++] = 0;
            if (a == d) break;
        }
        out.value = sum;
        out.samples_used = count;
        return out;
    }

    const auto& mc = std::get<MonteCarlo>(spec.mode);
    if (mc.samples < 1) throw DomainError("integrate: samples must be >= 1");
    int s = std::max(1, mc.strata_per_axis);
    auto strata_count = [d](int per_axis) {
        long total = 1;
        for (std::size_t a = 0; a < d; ++a) total *= per_axis;
        return total;
    };
    while (s > 1 && strata_count(s) * 2 > mc.samples) --s;
    const long nstrata = strata_count(s);
    const long base = mc.samples / nstrata;
    const long extra = mc.samples % nstrata;
    auto count_of = [&](long h) { return base + (h < extra ? 1 : 0); };
    const double cell = volume / static_cast<double>(nstrata);

    Complex total = 0.0;
    double var = 0.0;
    const int workers = static_cast<int>(std::min<long>(std::max(1, spec.threads), nstrata));
    if (workers == 1) {
        for (long h = 0; h < nstrata; ++h) {
            const auto r = detail::run_stratum(f, box, h, count_of(h), s, spec.seed);
            total += cell * r.mean;
            var += cell * cell * r.var_of_mean;
        }
    } else {
        std::vector<detail::StratumSum> parts(static_cast<std::size_t>(nstrata));
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    const long lo = nstrata * w / workers, hi = nstrata * (w + 1) / workers;
                    for (long h = lo; h < hi; ++h)
                        parts[static_cast<std::size_t>(h)] =
                            detail::run_stratum(f, box, h, count_of(h), s, spec.seed);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
        for (const auto& r : parts) {
            total += cell * r.mean;
            var += cell * cell * r.var_of_mean;
        }
    }
    out.value = total;
    out.std_error = std::sqrt(var);
    if (mc.samples == 1) out.std_error = std::abs(total);
    out.samples_used = mc.samples;
    return out;
}

template <class F>
EvalResult integrate(std::initializer_list<Interval> box, F&& f, const QuadSpec& spec) {
    return integrate(std::span<const Interval>(box.begin(), box.size()), std::forward<F>(f), spec);
}

/// Scale an estimate by a real constant.
inline EvalResult scaled(EvalResult r, double c) {
    r.value *= c;
    r.std_error *= std::fabs(c);
    return r;
}

/// Node in s for a unit-interval coordinate v, with its Jacobian ds/dv. Monte Carlo
/// samples s uniformly; deterministic rules grade the nodes geometrically toward the
/// lower end, where u(s) = (b^2/(2s) - b0)/|b| varies fastest.
struct SNode {
    double s;
    double jacobian;
};

inline SNode s_node(const SRange& r, double v, bool graded) {
    if (!graded || !(r.lo > 0.0)) return {r.lo + (r.hi - r.lo) * v, r.hi - r.lo};
    const double span = std::log(r.hi / r.lo);
    const double s = r.lo * std::exp(span * v);
    return {s, s * span};
}

inline bool is_deterministic(const QuadSpec& spec) { return std::holds_alternative<Deterministic>(spec.mode); }

/// int du |b^2| / (b0 + |b| u)^2 h(u) over the admissible A0 range of u = cos(theta),
/// taken through the substitution s = r*(u): the integrand becomes (2/|b|) h(u(s)) ds.
/// Empty range gives exactly zero.
template <class H>
EvalResult substituted_angular_integrate(const BVector& b, double x0, H&& h, const QuadSpec& spec) {
    const double nb = b.spatial_norm();
    if (!(nb > 0.0)) throw DomainError("substituted_angular_integrate: |b| must be > 0");
    const auto range = a0_s_range(b, x0);
    if (!range) return {};
    const double jac = 2.0 / nb;
    const bool graded = is_deterministic(spec);
    const std::array<Interval, 1> box{Interval{0.0, 1.0}};
    return integrate(std::span<const Interval>(box), [&](std::span<const double> v) {
        const SNode n = s_node(*range, v[0], graded);
        return jac * n.jacobian * h(u_of_s(b, n.s));
    }, spec);
}

} // namespace lcd
