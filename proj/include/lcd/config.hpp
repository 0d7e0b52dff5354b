#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lcd/errors.hpp"
#include "lcd/fields.hpp"
#include "lcd/solver.hpp"
#include "lcd/weights.hpp"

namespace lcd {

using Json = nlohmann::ordered_json;

/// Malformed or precondition-violating configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// a(eta) = eta^p, or a = 1 for kind "unit".
struct ScaleConfig {
    std::string kind = "power";
    double exponent = 1.0;
};

struct WeightConfig {
    std::string family = "gauss_poly";
    double parameter = 1.0;
    ScaleConfig scale{};
};

struct ModelSection {
    double lambda = 1.0 / 137.0;
    std::vector<double> masses{1.0, 1.0};
    WeightConfig weight{};
};

struct LevelConfig {
    std::string mode = "monte_carlo";
    long samples = 4000;
    int strata_per_axis = 2;
    int points_per_axis = 8;
    double target_rel_error = 1e-2;
};

struct QuadratureSection {
    std::uint64_t seed = 1;
    std::vector<LevelConfig> levels{LevelConfig{}};
};

struct SolveSection {
    int K = 1;
    std::string op = "full";
    CloudSpec cloud{};
    std::optional<double> norm_free;
    std::uint64_t max_evaluations = 0;
    int threads = 1;
    /// Residual estimates in the JSON report; they cost one more recursion level.
    bool residuals = false;
};

struct FreeTerm {
    Complex coefficient{1.0, 0.0};
    Vec3 k1{};
    Vec3 k2{};
};

struct FreeSection {
    std::string type = "plane_wave_product";
    Vec3 k1{};
    Vec3 k2{};
    std::vector<FreeTerm> terms;
    double radius = 0.5;
    Vec3 center1{};
    Vec3 center2{};
    double amplitude = 1.0;
};

struct BoundsSection {
    std::string sweep = "none";
    std::vector<double> values;
    std::vector<double> n_masses;
};

struct PropagationSection {
    double radius = 0.5;
    double horizon = 1.5;
    std::size_t exterior_points = 100;
    std::size_t interior_points = 10;
    int K = 2;
};

struct FlrwSection {
    double gamma = 1.0;
    ScaleConfig scale{};
    int K = 1;
};

struct VerifySection {
    std::size_t a0_points = 5;
    long a0_samples = 20000;
    std::size_t structure_points = 3;
};

struct IoSection {
    std::string out_dir = "out";
    bool csv = true;
    bool json = true;
};

struct RunConfig {
    ModelSection model;
    QuadratureSection quadrature;
    SolveSection solve;
    FreeSection free;
    BoundsSection bounds;
    PropagationSection propagation;
    FlrwSection flrw;
    VerifySection verify;
    IoSection io;
};

namespace detail {

inline void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw ConfigError(path + ": unknown key '" + k + "'");
    }
}

template <class T>
void read(const Json& j, const char* key, T& out, const std::string& path) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
        if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned())
            throw ConfigError(path + "." + key + ": expected a nonnegative integer");
    } else {
        if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
    }
    out = v.get<T>();
}

inline void read_vec3(const Json& j, const char* key, Vec3& out, const std::string& path) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_array() || v.size() != 3) throw ConfigError(path + "." + key + ": expected an array of 3 numbers");
    for (std::size_t i = 0; i < 3; ++i) {
        if (!v[i].is_number()) throw ConfigError(path + "." + key + ": expected an array of 3 numbers");
        out[i] = v[i].get<double>();
    }
}

inline void read_list(const Json& j, const char* key, std::vector<double>& out, const std::string& path) {
    if (!j.contains(key)) return;
    const Json& v = j.at(key);
    if (!v.is_array()) throw ConfigError(path + "." + key + ": expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
        if (!e.is_number()) throw ConfigError(path + "." + key + ": expected an array of numbers");
        out.push_back(e.get<double>());
    }
}

inline Json vec3_json(const Vec3& v) { return Json::array({v[0], v[1], v[2]}); }

inline ScaleConfig parse_scale(const Json& j, const std::string& path) {
    check_keys(j, {"kind", "exponent"}, path);
    ScaleConfig s;
    read(j, "kind", s.kind, path);
    read(j, "exponent", s.exponent, path);
    return s;
}

inline Json scale_json(const ScaleConfig& s) {
    Json j{{"kind", s.kind}};
    if (s.kind == "power") j["exponent"] = s.exponent;
    return j;
}

} // namespace detail

/// Scale factor a(eta) and its integral from the config description.
inline std::pair<ScaleFunction, ScaleFunction> make_scale(const ScaleConfig& s) {
    if (s.kind == "unit") return {[](double) { return 1.0; }, [](double t) { return t; }};
    if (s.kind != "power") throw ConfigError("scale.kind: expected 'power' or 'unit', got '" + s.kind + "'");
    if (!(s.exponent > 0.0)) throw ConfigError("scale.exponent: must be > 0");
    const double p = s.exponent;
    return {[p](double t) { return std::pow(t, p); }, [p](double t) { return std::pow(t, p + 1.0) / (p + 1.0); }};
}

inline WeightFamily make_weight(const WeightConfig& w) {
    if (w.family == "gauss_poly") return GaussPoly{w.parameter};
    if (w.family == "exponential") return Exponential{w.parameter};
    if (w.family == "flrw") {
        if (w.scale.kind == "unit") throw ConfigError("model.weight: the flrw family needs a scale factor with a(0) = 0");
        auto [a, ia] = make_scale(w.scale);
        return Flrw{w.parameter, a, ia};
    }
    throw ConfigError("model.weight.family: expected 'gauss_poly', 'exponential' or 'flrw', got '" + w.family + "'");
}

inline QuadSpec make_level(const LevelConfig& l, std::uint64_t seed) {
    QuadSpec q;
    if (l.mode == "monte_carlo") {
        q.mode = MonteCarlo{l.samples, l.strata_per_axis};
    } else if (l.mode == "deterministic") {
        q.mode = Deterministic{l.points_per_axis};
    } else {
        throw ConfigError("quadrature.levels.mode: expected 'monte_carlo' or 'deterministic', got '" + l.mode + "'");
    }
    q.seed = seed;
    q.target_rel_error = l.target_rel_error;
    return q;
}

/// Level 0 uses the configured seed; deeper levels derive theirs from it.
inline std::vector<QuadSpec> make_schedule(const QuadratureSection& q) {
    std::vector<QuadSpec> out;
    for (std::size_t i = 0; i < q.levels.size(); ++i)
        out.push_back(make_level(q.levels[i], i == 0 ? q.seed : derive_seed(q.seed, i)));
    return out;
}

inline ModelConfig make_model(const RunConfig& c) {
    if (c.model.masses.size() < 2) throw ConfigError("model.masses: at least two masses required");
    ModelConfig m;
    m.lambda = c.model.lambda;
    m.m1 = c.model.masses[0];
    m.m2 = c.model.masses[1];
    m.weight = make_weight(c.model.weight);
    m.quad = make_schedule(c.quadrature).at(0);
    return m;
}

inline OperatorKind make_kind(const std::string& op) {
    if (op == "full") return OperatorKind::Full;
    if (op == "massless") return OperatorKind::Massless;
    throw ConfigError("solve.operator: expected 'full' or 'massless', got '" + op + "'");
}

inline FreeSolutionSpec make_free_spec(const RunConfig& c) {
    const auto& f = c.free;
    const double m1 = c.model.masses.at(0), m2 = c.model.masses.at(1);
    if (f.type == "plane_wave_product") return PlaneWaveProduct{on_shell(m1, f.k1), on_shell(m2, f.k2)};
    if (f.type == "superposition") {
        PacketSuperposition s;
        for (const auto& t : f.terms) s.terms.push_back({t.coefficient, {on_shell(m1, t.k1), on_shell(m2, t.k2)}});
        return s;
    }
    if (f.type == "spherical_packet") {
        if (m1 != 0.0 || m2 != 0.0) throw ConfigError("free: spherical_packet requires massless particles");
        return SphericalPacketMassless{BumpProfile{f.radius}, f.center1, f.center2, f.amplitude};
    }
    throw ConfigError("free.type: expected 'plane_wave_product', 'superposition' or 'spherical_packet', got '" + f.type +
                      "'");
}

inline SolveSpec make_solve_spec(const RunConfig& c) {
    SolveSpec s;
    s.K = c.solve.K;
    s.schedule = make_schedule(c.quadrature);
    s.cfg = make_model(c);
    s.kind = make_kind(c.solve.op);
    s.cloud = make_cloud(c.solve.cloud);
    s.norm_free = c.solve.norm_free;
    s.max_evaluations = c.solve.max_evaluations;
    s.threads = c.solve.threads;
    return s;
}

/// Checks every section against the library preconditions; throws ConfigError.
inline void validate(const RunConfig& c) {
    try {
        const SolveSpec s = make_solve_spec(c);
        validate(s);
        validate(s.cfg.weight);
        validate(make_free_spec(c));
        for (double m : c.model.masses)
            if (!(m >= 0.0) || !std::isfinite(m)) throw DomainError("model.masses: masses must be finite and >= 0");
        if (c.bounds.sweep != "none" && c.bounds.sweep != "alpha" && c.bounds.sweep != "gamma")
            throw ConfigError("bounds.sweep: expected 'none', 'alpha' or 'gamma'");
        for (double v : c.bounds.values)
            if (!(v > 0.0)) throw ConfigError("bounds.values: sweep values must be > 0");
        if (!c.bounds.n_masses.empty() && c.bounds.n_masses.size() < 2)
            throw ConfigError("bounds.n_masses: at least two masses required");
        if (!(c.propagation.radius > 0.0) || !(c.propagation.horizon > 0.0) || c.propagation.K < 0)
            throw ConfigError("propagation: radius and horizon must be > 0, K >= 0");
        if (static_cast<int>(s.schedule.size()) < c.propagation.K)
            throw ConfigError("propagation.K: quadrature schedule shorter than the truncation order");
        if (!(c.flrw.gamma > 0.0) || c.flrw.K < 0) throw ConfigError("flrw: gamma must be > 0, K >= 0");
        if (static_cast<int>(s.schedule.size()) < c.flrw.K)
            throw ConfigError("flrw.K: quadrature schedule shorter than the truncation order");
        make_scale(c.flrw.scale);
        if (c.verify.a0_samples < 1) throw ConfigError("verify.a0_samples: must be >= 1");
        if (c.io.out_dir.empty()) throw ConfigError("io.out_dir: must be nonempty");
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

inline RunConfig parse_config(const Json& j) {
    using detail::check_keys;
    using detail::read;
    RunConfig c;
    try {
        check_keys(j, {"model", "quadrature", "solve", "free", "bounds", "propagation", "flrw", "verify", "io"}, "config");
        if (j.contains("model")) {
            const Json& m = j["model"];
            check_keys(m, {"lambda", "masses", "weight"}, "model");
            read(m, "lambda", c.model.lambda, "model");
            detail::read_list(m, "masses", c.model.masses, "model");
            if (m.contains("weight")) {
                const Json& w = m["weight"];
                check_keys(w, {"family", "parameter", "scale"}, "model.weight");
                read(w, "family", c.model.weight.family, "model.weight");
                read(w, "parameter", c.model.weight.parameter, "model.weight");
                if (w.contains("scale")) c.model.weight.scale = detail::parse_scale(w["scale"], "model.weight.scale");
            }
        }
        if (j.contains("quadrature")) {
            const Json& q = j["quadrature"];
            check_keys(q, {"seed", "levels"}, "quadrature");
            read(q, "seed", c.quadrature.seed, "quadrature");
            if (q.contains("levels")) {
                if (!q["levels"].is_array() || q["levels"].empty())
                    throw ConfigError("quadrature.levels: expected a nonempty array");
                c.quadrature.levels.clear();
                for (const auto& l : q["levels"]) {
                    check_keys(l, {"mode", "samples", "strata_per_axis", "points_per_axis", "target_rel_error"},
                               "quadrature.levels");
                    LevelConfig lc;
                    read(l, "mode", lc.mode, "quadrature.levels");
                    read(l, "samples", lc.samples, "quadrature.levels");
                    read(l, "strata_per_axis", lc.strata_per_axis, "quadrature.levels");
                    read(l, "points_per_axis", lc.points_per_axis, "quadrature.levels");
                    read(l, "target_rel_error", lc.target_rel_error, "quadrature.levels");
                    c.quadrature.levels.push_back(lc);
                }
            }
        }
        if (j.contains("solve")) {
            const Json& s = j["solve"];
            check_keys(s, {"K", "operator", "cloud", "norm_free", "max_evaluations", "threads", "residuals"}, "solve");
            read(s, "K", c.solve.K, "solve");
            read(s, "operator", c.solve.op, "solve");
            read(s, "max_evaluations", c.solve.max_evaluations, "solve");
            read(s, "threads", c.solve.threads, "solve");
            read(s, "residuals", c.solve.residuals, "solve");
            if (s.contains("norm_free") && !s["norm_free"].is_null()) {
                double v = 0.0;
                read(s, "norm_free", v, "solve");
                c.solve.norm_free = v;
            }
            if (s.contains("cloud")) {
                const Json& cl = s["cloud"];
                check_keys(cl, {"count", "horizon", "radius", "center1", "center2", "zero_time", "offset"}, "solve.cloud");
                read(cl, "count", c.solve.cloud.count, "solve.cloud");
                read(cl, "horizon", c.solve.cloud.horizon, "solve.cloud");
                read(cl, "radius", c.solve.cloud.radius, "solve.cloud");
                detail::read_vec3(cl, "center1", c.solve.cloud.center1, "solve.cloud");
                detail::read_vec3(cl, "center2", c.solve.cloud.center2, "solve.cloud");
                read(cl, "zero_time", c.solve.cloud.zero_time, "solve.cloud");
                read(cl, "offset", c.solve.cloud.offset, "solve.cloud");
            }
        }
        if (j.contains("free")) {
            const Json& f = j["free"];
            check_keys(f, {"type", "k1", "k2", "terms", "radius", "center1", "center2", "amplitude"}, "free");
            read(f, "type", c.free.type, "free");
            detail::read_vec3(f, "k1", c.free.k1, "free");
            detail::read_vec3(f, "k2", c.free.k2, "free");
            read(f, "radius", c.free.radius, "free");
            detail::read_vec3(f, "center1", c.free.center1, "free");
            detail::read_vec3(f, "center2", c.free.center2, "free");
            read(f, "amplitude", c.free.amplitude, "free");
            if (f.contains("terms")) {
                if (!f["terms"].is_array()) throw ConfigError("free.terms: expected an array");
                for (const auto& t : f["terms"]) {
                    check_keys(t, {"re", "im", "k1", "k2"}, "free.terms");
                    double re = 0.0, im = 0.0;
                    FreeTerm ft;
                    read(t, "re", re, "free.terms");
                    read(t, "im", im, "free.terms");
                    ft.coefficient = {re, im};
                    detail::read_vec3(t, "k1", ft.k1, "free.terms");
                    detail::read_vec3(t, "k2", ft.k2, "free.terms");
                    c.free.terms.push_back(ft);
                }
            }
        }
        if (j.contains("bounds")) {
            const Json& b = j["bounds"];
            check_keys(b, {"sweep", "values", "n_masses"}, "bounds");
            read(b, "sweep", c.bounds.sweep, "bounds");
            detail::read_list(b, "values", c.bounds.values, "bounds");
            detail::read_list(b, "n_masses", c.bounds.n_masses, "bounds");
        }
        if (j.contains("propagation")) {
            const Json& p = j["propagation"];
            check_keys(p, {"radius", "horizon", "exterior_points", "interior_points", "K"}, "propagation");
            read(p, "radius", c.propagation.radius, "propagation");
            read(p, "horizon", c.propagation.horizon, "propagation");
            read(p, "exterior_points", c.propagation.exterior_points, "propagation");
            read(p, "interior_points", c.propagation.interior_points, "propagation");
            read(p, "K", c.propagation.K, "propagation");
        }
        if (j.contains("flrw")) {
            const Json& f = j["flrw"];
            check_keys(f, {"gamma", "scale", "K"}, "flrw");
            read(f, "gamma", c.flrw.gamma, "flrw");
            read(f, "K", c.flrw.K, "flrw");
            if (f.contains("scale")) c.flrw.scale = detail::parse_scale(f["scale"], "flrw.scale");
        }
        if (j.contains("verify")) {
            const Json& v = j["verify"];
            check_keys(v, {"a0_points", "a0_samples", "structure_points"}, "verify");
            read(v, "a0_points", c.verify.a0_points, "verify");
            read(v, "a0_samples", c.verify.a0_samples, "verify");
            read(v, "structure_points", c.verify.structure_points, "verify");
        }
        if (j.contains("io")) {
            const Json& o = j["io"];
            check_keys(o, {"out_dir", "csv", "json"}, "io");
            read(o, "out_dir", c.io.out_dir, "io");
            read(o, "csv", c.io.csv, "io");
            read(o, "json", c.io.json, "io");
        }
    } catch (const Json::exception& e) {
        throw ConfigError(e.what());
    }
    validate(c);
    return c;
}

inline RunConfig parse_config_text(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

inline Json to_json(const RunConfig& c) {
    using detail::vec3_json;
    Json weight{{"family", c.model.weight.family}, {"parameter", c.model.weight.parameter}};
    if (c.model.weight.family == "flrw") weight["scale"] = detail::scale_json(c.model.weight.scale);
    Json levels = Json::array();
    for (const auto& l : c.quadrature.levels) {
        Json lj{{"mode", l.mode}};
        if (l.mode == "deterministic") {
            lj["points_per_axis"] = l.points_per_axis;
        } else {
            lj["samples"] = l.samples;
            lj["strata_per_axis"] = l.strata_per_axis;
        }
        lj["target_rel_error"] = l.target_rel_error;
        levels.push_back(lj);
    }
    const auto& cl = c.solve.cloud;
    Json solve{{"K", c.solve.K},
               {"operator", c.solve.op},
               {"cloud",
                {{"count", cl.count},
                 {"horizon", cl.horizon},
                 {"radius", cl.radius},
                 {"center1", vec3_json(cl.center1)},
                 {"center2", vec3_json(cl.center2)},
                 {"zero_time", cl.zero_time},
                 {"offset", cl.offset}}},
               {"norm_free", c.solve.norm_free ? Json(*c.solve.norm_free) : Json(nullptr)},
               {"max_evaluations", c.solve.max_evaluations},
               {"threads", c.solve.threads},
               {"residuals", c.solve.residuals}};
    Json free{{"type", c.free.type}};
    if (c.free.type == "plane_wave_product") {
        free["k1"] = vec3_json(c.free.k1);
        free["k2"] = vec3_json(c.free.k2);
    } else if (c.free.type == "superposition") {
        Json terms = Json::array();
        for (const auto& t : c.free.terms)
            terms.push_back({{"re", t.coefficient.real()}, {"im", t.coefficient.imag()}, {"k1", vec3_json(t.k1)}, {"k2", vec3_json(t.k2)}});
        free["terms"] = terms;
    } else {
        free["radius"] = c.free.radius;
        free["center1"] = vec3_json(c.free.center1);
        free["center2"] = vec3_json(c.free.center2);
        free["amplitude"] = c.free.amplitude;
    }
    return Json{{"model", {{"lambda", c.model.lambda}, {"masses", c.model.masses}, {"weight", weight}}},
                {"quadrature", {{"seed", c.quadrature.seed}, {"levels", levels}}},
                {"solve", solve},
                {"free", free},
                {"bounds", {{"sweep", c.bounds.sweep}, {"values", c.bounds.values}, {"n_masses", c.bounds.n_masses}}},
                {"propagation",
                 {{"radius", c.propagation.radius},
                  {"horizon", c.propagation.horizon},
                  {"exterior_points", c.propagation.exterior_points},
                  {"interior_points", c.propagation.interior_points},
                  {"K", c.propagation.K}}},
                {"flrw", {{"gamma", c.flrw.gamma}, {"scale", detail::scale_json(c.flrw.scale)}, {"K", c.flrw.K}}},
                {"verify",
                 {{"a0_points", c.verify.a0_points},
                  {"a0_samples", c.verify.a0_samples},
                  {"structure_points", c.verify.structure_points}}},
                {"io", {{"out_dir", c.io.out_dir}, {"csv", c.io.csv}, {"json", c.io.json}}}};
}

inline std::string serialize(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

} // namespace lcd
