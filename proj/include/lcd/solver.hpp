#pragma once

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lcd/errors.hpp"
#include "lcd/fields.hpp"
#include "lcd/operators.hpp"
#include "lcd/weights.hpp"

namespace lcd {

enum class OperatorKind { Full, Massless, Flrw };

struct SolveSpec {
    int K = 1;
    /// Quadrature per recursion depth; depth d uses schedule[min(d, size - 1)].
    std::vector<QuadSpec> schedule{QuadSpec{}};
    PointCloud cloud;
    ModelConfig cfg{};
    OperatorKind kind = OperatorKind::Full;
    /// Scale factor for OperatorKind::Flrw; taken from an Flrw weight when empty.
    ScaleFunction scale;
    /// Known weighted norm of the free solution; estimated on a cloud when absent.
    std::optional<double> norm_free;
    /// Cap on free-solution evaluations per point (0: unlimited).
    std::uint64_t max_evaluations = 0;
    /// Worker threads over cloud points.
    int threads = 1;
};

inline void validate(const SolveSpec& s) {
    if (s.K < 0) throw DomainError("SolveSpec: K must be >= 0");
    if (s.schedule.empty()) throw DomainError("SolveSpec: empty quadrature schedule");
    if (static_cast<int>(s.schedule.size()) < s.K)
        throw DomainError("SolveSpec: schedule shorter than the truncation order");
    for (const auto& q : s.schedule) validate(q);
    if (s.threads < 1) throw DomainError("SolveSpec: threads must be >= 1");
    validate(s.cfg);
}

/// Exhausted evaluation budget inside the recursion.
struct BudgetExhausted : ConvergenceError {
    using ConvergenceError::ConvergenceError;
};

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

struct NormBound {
    double value = 0.0;
    bool contraction = false;
    std::string source;
};

/// Operator-norm bound from the ledger for the configured family and operator.
inline NormBound operator_norm_bound(const ModelConfig& cfg, OperatorKind kind) {
    if (kind == OperatorKind::Flrw) {
        const auto* f = std::get_if<Flrw>(&cfg.weight);
        if (!f) return {INFINITY, false, "unavailable: FLRW operator needs an Flrw weight"};
        const double v = thm5_bound(cfg.lambda, f->gamma);
        return {v, v < 1.0, "thm5"};
    }
    const double m1 = kind == OperatorKind::Massless ? 0.0 : cfg.m1;
    const double m2 = kind == OperatorKind::Massless ? 0.0 : cfg.m2;
    if (const auto* gp = std::get_if<GaussPoly>(&cfg.weight)) {
        const auto r = thm3_bounds(cfg.lambda, m1, m2, gp->alpha);
        return {r.total, r.contraction, "thm3"};
    }
    try {
        const auto r = thm1_bounds(cfg.lambda, m1, m2, cfg.weight);
        return {r.total, r.contraction, "thm1"};
    } catch (const BoundsUnavailable& e) {
        return {INFINITY, false, std::string("unavailable: ") + e.what()};
    }
}

struct TailBound {
    bool certified = false;
    double value = INFINITY;
};

/// |psi - S_K|(x, y) <= normA^(K+1) / (1 - normA) ||psi_free||_g g(x0) g(y0), for normA < 1.
inline TailBound tail_bound(int K, double normA, double norm_free, double gx = 1.0, double gy = 1.0) {
    if (K < 0) throw DomainError("tail_bound: K must be >= 0");
    if (!(normA >= 0.0) || !(normA < 1.0)) return {};
    return {true, std::pow(normA, K + 1) / (1.0 - normA) * norm_free * gx * gy};
}

// ---------------------------------------------------------------------------
// Staged Neumann evaluator
// ---------------------------------------------------------------------------

/// Seed of the depth-d estimator at point p; depth 0 keeps the schedule seed.
inline std::uint64_t stage_seed(std::uint64_t base, int depth, const PointPair& p) {
    if (depth == 0) return base;
    std::uint64_t h = derive_seed(base, static_cast<std::uint64_t>(depth));
    for (double v : {p.x.t, p.x.r[0], p.x.r[1], p.x.r[2], p.y.t, p.y.r[0], p.y.r[1], p.y.r[2]})
        h = derive_seed(h, std::bit_cast<std::uint64_t>(v));
    return h;
}

/// Evaluates S_r = psi_free + A S_{r-1} at depth d. Every stage is a pure function of its
/// point: inner estimators are seeded from (schedule seed, depth, point).
class NeumannEvaluator {
public:
    NeumannEvaluator(const SolveSpec& spec, WaveFunction free) : spec_(spec), free_(std::move(free)) {
        detail::require_arity(free_, 2, "NeumannEvaluator");
        if (spec_.kind == OperatorKind::Flrw && !spec_.scale) {
            const auto* f = std::get_if<Flrw>(&spec_.cfg.weight);
            if (!f) throw DomainError("NeumannEvaluator: FLRW operator needs a scale factor");
            scale_ = f->scale_factor;
        } else {
            scale_ = spec_.scale;
        }
    }

    QuadSpec level_spec(int depth, const PointPair& p) const {
        QuadSpec q = spec_.schedule[static_cast<std::size_t>(std::min<int>(depth, static_cast<int>(spec_.schedule.size()) - 1))];
        q.seed = stage_seed(q.seed, depth, p);
        q.threads = 1;
        return q;
    }

    /// Operator application at depth d with the depth-d quadrature.
    EvalResult apply(int depth, const WaveFunction& w, const PointPair& p) const {
        const QuadSpec q = level_spec(depth, p);
        switch (spec_.kind) {
        case OperatorKind::Massless: {
            ModelConfig c = spec_.cfg;
            c.quad = q;
            return a0_apply(c, w, p.x, p.y);
        }
        case OperatorKind::Flrw:
            return a0_flrw_apply(spec_.cfg.lambda, scale_, w, p.x, p.y, q);
        case OperatorKind::Full:
        default: {
            ModelConfig c = spec_.cfg;
            c.quad = q;
            return a_apply(c, w, p.x, p.y);
        }
        }
    }

    /// S_r as a wave function evaluated at depth d.
    WaveFunction stage(int depth, int r) const {
        return make_wave([this, depth, r](const SpacetimePoint& x, const SpacetimePoint& y) { return value(depth, r, {x, y}).value; },
                         "neumann:S" + std::to_string(r) + "@" + std::to_string(depth));
    }

    EvalResult value(int depth, int r, const PointPair& p) const { return value_and_correction(depth, r, p).first; }

    /// (S_r, A S_{r-1}) at depth d.
    std::pair<EvalResult, EvalResult> value_and_correction(int depth, int r, const PointPair& p) const {
        const Complex f = free_value(p);
        if (r == 0) return {{f, 0.0, 0}, {}};
        const EvalResult a = apply(depth, stage(depth + 1, r - 1), p);
        return {{f + a.value, a.std_error, a.samples_used}, a};
    }

    Complex free_value(const PointPair& p) const {
        if (spec_.max_evaluations > 0 && ++evaluations_ > spec_.max_evaluations)
            throw BudgetExhausted("neumann: evaluation budget exhausted");
        return free_(p.x, p.y);
    }

    const WaveFunction& free() const { return free_; }
    const ScaleFunction& scale() const { return scale_; }
    void reset_budget() const { evaluations_ = 0; }

private:
    const SolveSpec& spec_;
    WaveFunction free_;
    ScaleFunction scale_;
    mutable std::uint64_t evaluations_ = 0;
};

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct PointReport {
    PointPair point;
    /// Partial sums S_0 .. S_K for the stages that completed.
    std::vector<EvalResult> stages;
    /// corrections[k] = (A S_{k-1}) estimate, so stages[k] = psi_free + corrections[k]; corrections[0] = 0.
    std::vector<EvalResult> corrections;
    double weight = 1.0;  // g(x0) g(y0)
    TailBound tail;
    /// psi-frame value S_K / (a a) for FLRW solves at positive times.
    std::optional<Complex> psi_frame;
    std::optional<int> failed_stage;
    std::string failure;
};

struct SolveReport {
    int K = 0;
    std::vector<PointReport> points;
    NormBound norm_a;
    double norm_free = 0.0;
    std::string norm_free_source;
    std::vector<std::string> warnings;

    bool certified() const { return norm_a.contraction; }
    std::optional<int> failed_stage() const {
        std::optional<int> f;
        for (const auto& p : points)
            if (p.failed_stage) f = f ? std::min(*f, *p.failed_stage) : *p.failed_stage;
        return f;
    }
};

namespace detail {

// Runs f(i) for i in [0, n) on the given number of workers; results are written by index.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex m;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard lock(m);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

inline double point_weight(const WeightFamily& fam, const PointPair& p) {
    try {
        return g_value(fam, p.x.t) * g_value(fam, p.y.t);
    } catch (const std::exception&) {
        return INFINITY;
    }
}

} // namespace detail

/// Partial sums S_k = sum_{j <= k} A^j psi_free, k = 0..K, at every cloud point.
inline SolveReport neumann_evaluate(const SolveSpec& spec, const WaveFunction& free) {
    validate(spec);
    SolveReport rep;
    rep.K = spec.K;
    rep.norm_a = operator_norm_bound(spec.cfg, spec.kind);
    if (!rep.norm_a.contraction)
        rep.warnings.push_back("no contraction (norm bound " + std::to_string(rep.norm_a.value) + ", " +
                               rep.norm_a.source + "): tail bounds uncertified");
    if (spec.norm_free) {
        rep.norm_free = *spec.norm_free;
        rep.norm_free_source = "given";
    } else {
        rep.norm_free = norm_estimate(free, spec.cfg.weight);
        rep.norm_free_source = "estimated";
    }
    rep.points.resize(spec.cloud.size());
    detail::parallel_for(spec.cloud.size(), spec.threads, [&](std::size_t i) {
        const NeumannEvaluator ev(spec, free);
        PointReport& pr = rep.points[i];
        pr.point = spec.cloud[i];
        pr.weight = detail::point_weight(spec.cfg.weight, pr.point);
        for (int k = 0; k <= spec.K; ++k) {
            ev.reset_budget();
            try {
                const auto [sk, ak] = ev.value_and_correction(0, k, pr.point);
                pr.stages.push_back(sk);
                pr.corrections.push_back(ak);
            } catch (const ConvergenceError& e) {
                pr.failed_stage = k;
                pr.failure = e.what();
                break;
            }
        }
        pr.tail = tail_bound(static_cast<int>(pr.stages.size()) - 1, rep.norm_a.value, rep.norm_free, 1.0, pr.weight);
        if (pr.stages.empty()) pr.tail = {};
    });
    return rep;
}

/// S_K - (psi_free + A S_{K-1}) with both sides formed by the same arithmetic; zero for a pure evaluator.
inline Complex telescoping_defect(const SolveSpec& spec, const WaveFunction& free, int K, const PointPair& p) {
    if (K < 1) throw DomainError("telescoping_defect: K must be >= 1");
    const NeumannEvaluator ev(spec, free);
    const Complex sk = ev.value(0, K, p).value;
    const EvalResult a = ev.apply(0, ev.stage(1, K - 1), p);
    return sk - (ev.free_value(p) + a.value);
}

/// R = S_K - psi_free - A S_K per point, estimated as one integral with common randomness.
/// By telescoping R = -A^(K+1) psi_free.
inline std::vector<EvalResult> residual_check(const SolveSpec& spec, const WaveFunction& free) {
    validate(spec);
    std::vector<EvalResult> out(spec.cloud.size());
    detail::parallel_for(spec.cloud.size(), spec.threads, [&](std::size_t i) {
        const NeumannEvaluator ev(spec, free);
        const int K = spec.K;
        const WaveFunction outer = ev.stage(1, K);
        const std::optional<WaveFunction> inner = K >= 1 ? std::optional(ev.stage(1, K - 1)) : std::nullopt;
        const WaveFunction diff = make_wave(
            [&](const SpacetimePoint& x, const SpacetimePoint& y) { return (inner ? (*inner)(x, y) : Complex(0.0)) - outer(x, y); },
            "residual");
        out[i] = ev.apply(0, diff, spec.cloud[i]);
    });
    return out;
}

// ---------------------------------------------------------------------------
// Structural tests
// ---------------------------------------------------------------------------

struct PointCheck {
    PointPair point;
    Complex value;
    double std_error = 0.0;
    bool exterior = false;
    bool ok = true;
};

struct PropagationReport {
    std::vector<PointCheck> checks;
    bool passed = true;
    std::size_t exterior_points = 0;
    std::size_t nonzero_interior = 0;
    std::vector<std::size_t> offending;
};

/// Evaluates S_K on the cloud and requires |S_K| <= 4 stderr wherever the point lies outside
/// the causally grown support of the initial data.
inline PropagationReport propagation_test(const SolveSpec& spec, const CompactFree& free) {
    if (spec.cfg.m1 != 0.0 || spec.cfg.m2 != 0.0) throw DomainError("propagation_test: massless configuration required");
    const SolveReport rep = neumann_evaluate(spec, free.psi);
    PropagationReport out;
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
        const auto& pr = rep.points[i];
        PointCheck c;
        c.point = pr.point;
        if (pr.stages.empty()) {
            c.ok = false;
        } else {
            c.value = pr.stages.back().value;
            c.std_error = pr.stages.back().std_error;
        }
        c.exterior = free.region.outside_grown(pr.point.x, pr.point.y);
        if (c.exterior) {
            ++out.exterior_points;
            c.ok = c.ok && std::abs(c.value) <= 4.0 * c.std_error;
        } else if (std::abs(c.value) > 0.0) {
            ++out.nonzero_interior;
        }
        if (!c.ok) {
            out.passed = false;
            out.offending.push_back(i);
        }
        out.checks.push_back(c);
    }
    return out;
}

struct CoincidenceReport {
    std::vector<PointCheck> checks;
    bool passed = true;
};

/// S_K(0, x, 0, y) must equal psi_free(0, x, 0, y) exactly.
inline CoincidenceReport initial_coincidence_test(const SolveSpec& spec, const WaveFunction& free) {
    SolveSpec s = spec;
    for (auto& p : s.cloud) {
        p.x.t = 0.0;
        p.y.t = 0.0;
    }
    const SolveReport rep = neumann_evaluate(s, free);
    CoincidenceReport out;
    for (const auto& pr : rep.points) {
        PointCheck c;
        c.point = pr.point;
        c.value = pr.stages.empty() ? Complex(NAN) : pr.stages.back().value;
        c.std_error = pr.stages.empty() ? 0.0 : pr.stages.back().std_error;
        c.ok = !pr.stages.empty() && c.value == free(pr.point.x, pr.point.y) && c.std_error == 0.0;
        out.passed = out.passed && c.ok;
        out.checks.push_back(c);
    }
    return out;
}

/// chi = chi_free + A0~ chi, with psi-frame values psi = chi / (a a) where both times are positive.
inline SolveReport flrw_solve(SolveSpec spec, const WaveFunction& chi_free) {
    spec.kind = OperatorKind::Flrw;
    if (spec.cfg.m1 != 0.0 || spec.cfg.m2 != 0.0) throw DomainError("flrw_solve: massless configuration required");
    SolveReport rep = neumann_evaluate(spec, chi_free);
    const ScaleFunction a = spec.scale ? spec.scale : std::get<Flrw>(spec.cfg.weight).scale_factor;
    bool refused = false;
    for (auto& pr : rep.points) {
        if (pr.stages.empty()) continue;
        const double d = a(pr.point.x.t) * a(pr.point.y.t);
        if (d == 0.0) {
            refused = true;
            continue;
        }
        pr.psi_frame = pr.stages.back().value / d;
    }
    if (refused) rep.warnings.push_back("psi frame refused where a(eta) = 0; psi diverges like 1/(a(eta1) a(eta2))");
    return rep;
}

} // namespace lcd
