#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "lcd/config.hpp"
#include "lcd/solver.hpp"

namespace lcd {

/// Shortest-independent, locale-free formatting with 17 significant digits.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    if (r.ec != std::errc{}) throw RangeError("format_number: buffer too small");
    return std::string(buf, r.ptr);
}

/// Comma-separated writer; fields are emitted verbatim, so callers pass only numbers and plain tokens.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) { row(header); }

    void row(const std::vector<std::string>& fields) {
        if (fields.size() != columns_) throw DomainError("CsvWriter: row width does not match the header");
        for (std::size_t i = 0; i < fields.size(); ++i) out_ << (i ? "," : "") << fields[i];
        out_ << '\n';
    }

private:
    std::ostream& out_;
    std::size_t columns_;
};

inline std::vector<std::string> point_fields(const PointPair& p) {
    return {format_number(p.x.t),    format_number(p.x.r[0]), format_number(p.x.r[1]), format_number(p.x.r[2]),
            format_number(p.y.t),    format_number(p.y.r[0]), format_number(p.y.r[1]), format_number(p.y.r[2])};
}

inline const std::vector<std::string>& point_header() {
    static const std::vector<std::string> h{"x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3"};
    return h;
}

inline std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline Json point_json(const PointPair& p) {
    return Json{{"x", {p.x.t, p.x.r[0], p.x.r[1], p.x.r[2]}}, {"y", {p.y.t, p.y.r[0], p.y.r[1], p.y.r[2]}}};
}

inline Json complex_json(const Complex& c) { return Json::array({c.real(), c.imag()}); }

/// Finite doubles stay numbers; non-finite ones become strings so the JSON stays valid.
inline Json number_json(double v) { return std::isfinite(v) ? Json(v) : Json(format_number(v)); }

inline Json norm_bound_json(const NormBound& n) {
    return Json{{"value", number_json(n.value)}, {"contraction", n.contraction}, {"source", n.source}};
}

/// Per-stage tail certificate at a point: normA^(k+1)/(1 - normA) ||psi_free||_g g(x0) g(y0).
inline TailBound stage_tail(const SolveReport& rep, const PointReport& p, int k) {
    return tail_bound(k, rep.norm_a.value, rep.norm_free, 1.0, p.weight);
}

inline std::string tail_field(const TailBound& t) { return t.certified ? format_number(t.value) : "uncertified"; }

inline void write_solve_csv(std::ostream& out, const SolveReport& rep) {
    CsvWriter csv(out, with(point_header(), {"k", "real", "imag", "stderr", "tail_bound"}));
    for (const auto& p : rep.points) {
        for (std::size_t k = 0; k < p.stages.size(); ++k) {
            const auto& s = p.stages[k];
            csv.row(with(point_fields(p.point), {std::to_string(k), format_number(s.value.real()), format_number(s.value.imag()),
                                                 format_number(s.std_error), tail_field(stage_tail(rep, p, static_cast<int>(k)))}));
        }
    }
}

inline Json solve_json(const SolveReport& rep, const std::vector<EvalResult>* residuals = nullptr) {
    Json points = Json::array();
    for (std::size_t i = 0; i < rep.points.size(); ++i) {
        const auto& p = rep.points[i];
        Json stages = Json::array();
        for (std::size_t k = 0; k < p.stages.size(); ++k) {
            const auto t = stage_tail(rep, p, static_cast<int>(k));
            stages.push_back({{"k", k},
                              {"value", complex_json(p.stages[k].value)},
                              {"stderr", p.stages[k].std_error},
                              {"tail_bound", t.certified ? Json(t.value) : Json("uncertified")}});
        }
        Json pj{{"point", point_json(p.point)}, {"weight", number_json(p.weight)}, {"stages", stages}};
        if (p.psi_frame) pj["psi_frame"] = complex_json(*p.psi_frame);
        if (p.failed_stage) {
            pj["failed_stage"] = *p.failed_stage;
            pj["failure"] = p.failure;
        }
        if (residuals) pj["residual"] = {{"value", complex_json((*residuals)[i].value)}, {"stderr", (*residuals)[i].std_error}};
        points.push_back(pj);
    }
    Json j{{"K", rep.K},
           {"norm_a", norm_bound_json(rep.norm_a)},
           {"norm_free", number_json(rep.norm_free)},
           {"norm_free_source", rep.norm_free_source},
           {"certified", rep.certified()},
           {"warnings", rep.warnings},
           {"points", points}};
    if (const auto f = rep.failed_stage()) j["failed_stage"] = *f;
    return j;
}

inline Json bound_report_json(const BoundReport& b) {
    return Json{{"family", b.family},
                {"parameter", b.parameter},
                {"lambda", b.lambda},
                {"m1", b.m1},
                {"m2", b.m2},
                {"a0", number_json(b.b0)},
                {"a1", number_json(b.b1)},
                {"a2", number_json(b.b2)},
                {"a12", number_json(b.b12)},
                {"total", number_json(b.total)},
                {"contraction", b.contraction}};
}

} // namespace lcd
