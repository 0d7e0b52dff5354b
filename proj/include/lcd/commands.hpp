#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "lcd/config.hpp"
#include "lcd/fields.hpp"
#include "lcd/report.hpp"
#include "lcd/solver.hpp"
#include "lcd/specfun.hpp"
#include "lcd/weights.hpp"

namespace lcd {

enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_usage = 2 };

namespace detail {

inline std::filesystem::path prepare_out(const RunConfig& c) {
    const std::filesystem::path dir(c.io.out_dir);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "config.json") << serialize(c);
    return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw EvaluationError("cannot write '" + p.string() + "'");
    out << text;
}

inline std::string join_masses(std::span<const double> masses) {
    std::string s;
    for (std::size_t i = 0; i < masses.size(); ++i) s += (i ? ";" : "") + format_number(masses[i]);
    return s;
}

inline double gauss_alpha(const RunConfig& c) {
    return c.model.weight.family == "gauss_poly" ? c.model.weight.parameter : 1.0;
}

inline RunConfig massless(RunConfig c) {
    std::fill(c.model.masses.begin(), c.model.masses.end(), 0.0);
    return c;
}

} // namespace detail

// ---------------------------------------------------------------------------
// bounds
// ---------------------------------------------------------------------------

struct BoundsRow {
    std::string kind;
    std::string family;
    double parameter = 0.0;
    double lambda = 0.0;
    std::vector<double> masses;
    std::optional<BoundReport> ledger;
    double total = 0.0;
    bool contraction = false;
    std::string note;
};

inline BoundsRow ledger_row(const std::string& kind, const ModelConfig& m, const WeightFamily& fam) {
    BoundsRow r{kind, family_name(fam), family_parameter(fam), m.lambda, {m.m1, m.m2}, std::nullopt, INFINITY, false, ""};
    try {
        const BoundReport b = std::holds_alternative<GaussPoly>(fam)
                                  ? thm3_bounds(m.lambda, m.m1, m.m2, std::get<GaussPoly>(fam).alpha)
                                  : thm1_bounds(m.lambda, m.m1, m.m2, fam);
        r.ledger = b;
        r.total = b.total;
        r.contraction = b.contraction;
    } catch (const BoundsUnavailable& e) {
        r.note = std::string("unavailable: ") + e.what();
    }
    return r;
}

inline std::vector<BoundsRow> bounds_rows(const RunConfig& c) {
    const ModelConfig m = make_model(c);
    std::vector<BoundsRow> rows;
    rows.push_back(ledger_row("model", m, m.weight));
    for (double v : c.bounds.values) {
        if (c.bounds.sweep == "alpha") rows.push_back(ledger_row("sweep", m, GaussPoly{v}));
        if (c.bounds.sweep == "gamma") rows.push_back(ledger_row("sweep", m, Exponential{v}));
    }
    if (!c.bounds.n_masses.empty()) {
        const double alpha = detail::gauss_alpha(c);
        const double t = thm4_bound(m.lambda, c.bounds.n_masses, alpha);
        rows.push_back({"n_particle", "gauss_poly", alpha, m.lambda, c.bounds.n_masses, std::nullopt, t, t < 1.0, ""});
    }
    const double f = thm5_bound(m.lambda, c.flrw.gamma);
    rows.push_back({"flrw", "flrw", c.flrw.gamma, m.lambda, {0.0, 0.0}, std::nullopt, f, f < 1.0, ""});
    return rows;
}

inline int cmd_bounds(const RunConfig& c, std::ostream& log = std::cout) {
    const auto rows = bounds_rows(c);
    const auto dir = detail::prepare_out(c);
    std::ostringstream csv_text;
    CsvWriter csv(csv_text, {"kind", "family", "parameter", "lambda", "masses", "a0", "a1", "a2", "a12", "total", "contraction"});
    Json j = Json::array();
    for (const auto& r : rows) {
        auto part = [&](double BoundReport::*f) { return r.ledger ? format_number((*r.ledger).*f) : std::string(""); };
        csv.row({r.kind, r.family, format_number(r.parameter), format_number(r.lambda), detail::join_masses(r.masses),
                 part(&BoundReport::b0), part(&BoundReport::b1), part(&BoundReport::b2), part(&BoundReport::b12),
                 format_number(r.total), r.contraction ? "true" : "false"});
        Json rj{{"kind", r.kind},
                {"family", r.family},
                {"parameter", r.parameter},
                {"lambda", r.lambda},
                {"masses", r.masses},
                {"total", number_json(r.total)},
                {"contraction", r.contraction}};
        if (r.ledger) rj["ledger"] = bound_report_json(*r.ledger);
        if (!r.note.empty()) rj["note"] = r.note;
        j.push_back(rj);
        log << r.kind << " " << r.family << "(" << format_number(r.parameter) << "): total " << format_number(r.total)
            << (r.contraction ? " contraction" : " no contraction") << (r.note.empty() ? "" : " [" + r.note + "]") << "\n";
    }
    if (c.model.weight.family == "gauss_poly") {
        const double margin = thm3_margin(c.model.lambda, c.model.masses[0], c.model.masses[1], c.model.weight.parameter);
        log << "contraction margin " << format_number(margin) << "\n";
    }
    if (c.io.csv) detail::write_text(dir / "bounds.csv", csv_text.str());
    if (c.io.json) detail::write_text(dir / "bounds.json", j.dump(2) + "\n");
    return exit_ok;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

inline int cmd_evaluate(const RunConfig& c, std::ostream& log = std::cout) {
    const SolveSpec spec = make_solve_spec(c);
    const WaveFunction free = make_free(make_free_spec(c));
    const SolveReport rep = neumann_evaluate(spec, free);
    const auto dir = detail::prepare_out(c);
    if (c.io.csv) {
        std::ostringstream s;
        write_solve_csv(s, rep);
        detail::write_text(dir / "evaluate.csv", s.str());
    }
    if (c.io.json) {
        std::vector<EvalResult> residuals;
        if (c.solve.residuals) residuals = residual_check(spec, free);
        detail::write_text(dir / "evaluate.json", solve_json(rep, c.solve.residuals ? &residuals : nullptr).dump(2) + "\n");
    }
    for (const auto& w : rep.warnings) log << "warning: " << w << "\n";
    log << "evaluated " << rep.points.size() << " points to K=" << rep.K << ", norm bound " << format_number(rep.norm_a.value)
        << " (" << rep.norm_a.source << ")\n";
    if (const auto f = rep.failed_stage()) {
        log << "budget exhausted at stage " << *f << "\n";
        return exit_failure;
    }
    return exit_ok;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool passed = true;
    double measured = 0.0;
    double threshold = 0.0;
    std::string note;
};

inline std::vector<CheckResult> verify_checks(const RunConfig& c) {
    std::vector<CheckResult> out;
    const ModelConfig model = make_model(c);
    const double alpha = detail::gauss_alpha(c);

    {
        const auto b = thm3_bounds(model.lambda, model.m1, model.m2, alpha);
        const double m = thm3_margin(model.lambda, model.m1, model.m2, alpha);
        const double rel = std::fabs(b.total - m) / m;
        out.push_back({"ledger_closed_form", rel <= 1e-12, rel, 1e-12, ""});
    }
    {
        const auto sup = suprema(GaussPoly{alpha});
        const auto cf = suprema_closed_forms(alpha);
        double eq = 0.0, over = -INFINITY;
        for (int i = 0; i < 2; ++i) eq = std::max(eq, std::fabs(sup[i].value - cf[i]));
        for (std::size_t i = 2; i < 7; ++i) over = std::max(over, sup[i].value - cf[i]);
        out.push_back({"suprema_closed_forms", eq <= 1e-8, eq, 1e-8, ""});
        out.push_back({"suprema_bounds", over <= 1e-9, over, 1e-9, "max excess over closed-form bound"});
    }
    {
        // d/dt g_{n+1} = g_n by central differences, relative.
        double worst = 0.0;
        const WeightFamily fam = model.weight;
        for (int n = 0; n < 3; ++n) {
            for (double t : {0.1, 0.5, 1.0, 1.7}) {
                const double h = 1e-5 * std::max(1.0, t);
                const double d = (g_eval(fam, n + 1, t + h) - g_eval(fam, n + 1, t - h)) / (2 * h);
                worst = std::max(worst, std::fabs(d - g_eval(fam, n, t)) / g_eval(fam, n, t));
            }
            worst = std::max(worst, std::fabs(g_eval(fam, n + 1, 0.0)));
        }
        out.push_back({"g_n_recurrence", worst <= 1e-6, worst, 1e-6, ""});
    }
    {
        double j = 0.0, d = 0.0, td = 0.0;
        const int n = 100000;
        for (int i = 0; i <= n; ++i) {
            const double t = 100.0 * i / n;
            j = std::max(j, std::fabs(bessel_j1_ratio(t)));
            d = std::max(d, std::fabs(dawson(t)));
            td = std::max(td, std::fabs(t * dawson(t)));
        }
        out.push_back({"bessel_ratio_bound", j <= 0.5, j, 0.5, ""});
        out.push_back({"dawson_bound", d < 0.6, d, 0.6, ""});
        out.push_back({"t_dawson_bound", td < 2.0 / 3.0, td, 2.0 / 3.0, ""});
    }
    const RunConfig base = c;
    const WaveFunction free = make_free(make_free_spec(base));
    {
        CloudSpec cs = c.solve.cloud;
        cs.count = c.verify.a0_points;
        ModelConfig m = model;
        m.quad.mode = MonteCarlo{c.verify.a0_samples, 2};
        const double nf = c.solve.norm_free ? *c.solve.norm_free : norm_estimate(free, m.weight);
        double worst = -INFINITY;
        for (const auto& p : make_cloud(cs)) {
            const auto r = a0_apply(m, free, p.x, p.y);
            const double bound = pointwise_bound_a0(m.lambda, m.weight, p.x.t, p.y.t) * nf;
            worst = std::max(worst, (std::abs(r.value) - 3.0 * r.std_error) - bound);
        }
        out.push_back({"a0_pointwise_bound", worst <= 0.0, worst, 0.0, "max of |A0 psi| - 3 stderr - bound"});
    }
    SolveSpec spec = make_solve_spec(base);
    spec.cloud.resize(std::min(spec.cloud.size(), c.verify.structure_points));
    {
        double worst = 0.0;
        for (int K = 1; K <= std::min<int>(2, static_cast<int>(spec.schedule.size())); ++K) {
            SolveSpec s = spec;
            s.K = K;
            for (const auto& p : s.cloud) worst = std::max(worst, std::abs(telescoping_defect(s, free, K, p)));
        }
        out.push_back({"telescoping", worst == 0.0, worst, 0.0, ""});
    }
    {
        const auto r = initial_coincidence_test(spec, free);
        double worst = 0.0;
        for (const auto& ch : r.checks) worst = std::max(worst, std::abs(ch.value - free(ch.point.x, ch.point.y)));
        out.push_back({"initial_coincidence", r.passed, worst, 0.0, ""});
    }
    {
        const NormBound nb = operator_norm_bound(model, spec.kind);
        out.push_back({"tail_certificate", true, nb.value, 1.0, nb.contraction ? "certified" : "uncertified"});
    }
    return out;
}

inline int cmd_verify(const RunConfig& c, std::ostream& log = std::cout) {
    const auto checks = verify_checks(c);
    const auto dir = detail::prepare_out(c);
    std::ostringstream csv_text;
    CsvWriter csv(csv_text, {"check", "passed", "measured", "threshold", "note"});
    Json j = Json::array();
    bool all = true;
    for (const auto& ch : checks) {
        all = all && ch.passed;
        csv.row({ch.name, ch.passed ? "true" : "false", format_number(ch.measured), format_number(ch.threshold), ch.note});
        j.push_back({{"check", ch.name},
                     {"passed", ch.passed},
                     {"measured", number_json(ch.measured)},
                     {"threshold", ch.threshold},
                     {"note", ch.note}});
        log << (ch.passed ? "PASS " : "FAIL ") << ch.name << " measured=" << format_number(ch.measured)
            << " threshold=" << format_number(ch.threshold) << (ch.note.empty() ? "" : " (" + ch.note + ")") << "\n";
    }
    if (c.io.csv) detail::write_text(dir / "verify.csv", csv_text.str());
    if (c.io.json) detail::write_text(dir / "verify.json", Json{{"passed", all}, {"checks", j}}.dump(2) + "\n");
    return all ? exit_ok : exit_failure;
}

// ---------------------------------------------------------------------------
// propagation
// ---------------------------------------------------------------------------

/// Halton candidates in the spatial region reachable within the horizon, split into points
/// outside the grown support and points inside it.
inline PointCloud propagation_cloud(const SupportRegion& region, const PropagationSection& p) {
    CloudSpec cs;
    cs.count = 400 * (p.exterior_points + p.interior_points) + 1000;
    cs.horizon = p.horizon;
    cs.radius = p.radius + p.horizon + 0.5;
    cs.center1 = region.center1;
    cs.center2 = region.center2;
    PointCloud ext, in;
    for (const auto& q : make_cloud(cs)) {
        if (region.outside_grown(q.x, q.y)) {
            if (ext.size() < p.exterior_points) ext.push_back(q);
        } else if (in.size() < p.interior_points) {
            in.push_back(q);
        }
        if (ext.size() == p.exterior_points && in.size() == p.interior_points) break;
    }
    ext.insert(ext.end(), in.begin(), in.end());
    return ext;
}

inline int cmd_propagation(const RunConfig& c, std::ostream& log = std::cout) {
    const RunConfig m0 = detail::massless(c);
    const CompactFree free = compact_support_free(c.propagation.radius, c.free.center1, c.free.center2, c.free.amplitude);
    SolveSpec spec = make_solve_spec(m0);
    spec.K = c.propagation.K;
    spec.kind = OperatorKind::Massless;
    spec.cloud = propagation_cloud(free.region, c.propagation);
    const auto rep = propagation_test(spec, free);
    const auto dir = detail::prepare_out(c);
    std::ostringstream csv_text;
    CsvWriter csv(csv_text, with(point_header(), {"exterior", "real", "imag", "stderr", "ok"}));
    Json pts = Json::array();
    for (const auto& ch : rep.checks) {
        csv.row(with(point_fields(ch.point), {ch.exterior ? "true" : "false", format_number(ch.value.real()),
                                              format_number(ch.value.imag()), format_number(ch.std_error), ch.ok ? "true" : "false"}));
        pts.push_back({{"point", point_json(ch.point)},
                       {"exterior", ch.exterior},
                       {"value", complex_json(ch.value)},
                       {"stderr", ch.std_error},
                       {"ok", ch.ok}});
    }
    if (c.io.csv) detail::write_text(dir / "propagation.csv", csv_text.str());
    if (c.io.json)
        detail::write_text(dir / "propagation.json", Json{{"passed", rep.passed},
                                                          {"exterior_points", rep.exterior_points},
                                                          {"nonzero_interior", rep.nonzero_interior},
                                                          {"offending", rep.offending},
                                                          {"checks", pts}}
                                                             .dump(2) + "\n");
    log << "propagation: " << rep.exterior_points << " exterior points, " << rep.nonzero_interior
        << " nonzero interior points, " << (rep.passed ? "passed" : "FAILED") << "\n";
    for (auto i : rep.offending) log << "offending point " << i << "\n";
    return rep.passed ? exit_ok : exit_failure;
}

// ---------------------------------------------------------------------------
// flrw
// ---------------------------------------------------------------------------

inline SolveSpec flrw_spec(const RunConfig& c) {
    const RunConfig m0 = detail::massless(c);
    SolveSpec spec = make_solve_spec(m0);
    spec.K = c.flrw.K;
    auto [a, ia] = make_scale(c.flrw.scale);
    spec.scale = a;
    if (c.flrw.scale.kind == "power") spec.cfg.weight = Flrw{c.flrw.gamma, a, ia};
    return spec;
}

inline int cmd_flrw(const RunConfig& c, std::ostream& log = std::cout) {
    const SolveSpec spec = flrw_spec(c);
    const WaveFunction chi = make_free(make_free_spec(detail::massless(c)));
    const SolveReport rep = flrw_solve(spec, chi);
    const auto dir = detail::prepare_out(c);
    std::ostringstream csv_text;
    CsvWriter csv(csv_text, with(point_header(), {"k", "chi_real", "chi_imag", "stderr", "tail_bound", "psi_real", "psi_imag"}));
    for (const auto& p : rep.points) {
        for (std::size_t k = 0; k < p.stages.size(); ++k) {
            const bool last = k + 1 == p.stages.size() && p.psi_frame;
            csv.row(with(point_fields(p.point),
                         {std::to_string(k), format_number(p.stages[k].value.real()), format_number(p.stages[k].value.imag()),
                          format_number(p.stages[k].std_error), tail_field(stage_tail(rep, p, static_cast<int>(k))),
                          last ? format_number(p.psi_frame->real()) : "", last ? format_number(p.psi_frame->imag()) : ""}));
        }
    }
    if (c.io.csv) detail::write_text(dir / "flrw.csv", csv_text.str());
    if (c.io.json) detail::write_text(dir / "flrw.json", solve_json(rep).dump(2) + "\n");
    for (const auto& w : rep.warnings) log << "warning: " << w << "\n";
    log << "flrw: " << rep.points.size() << " points to K=" << rep.K << ", norm bound " << format_number(rep.norm_a.value)
        << " (" << rep.norm_a.source << ")\n";
    if (rep.failed_stage()) return exit_failure;
    return exit_ok;
}

} // namespace lcd
