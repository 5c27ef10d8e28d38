#pragma once

// JSON run configuration. Strict parsing: unknown keys are rejected at every
// level, types and invariants are checked up front. The shipped
// schema/config.schema.json mirrors these rules.

#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "cellflow/errors.hpp"
#include "cellflow/geometry.hpp"
#include "cellflow/picard.hpp"
#include "cellflow/rheology.hpp"

namespace cellflow {

struct SolverConfig {
    int max_iter = 100;
    double tol_rel = 1e-8;
    double relax = 1.0;
    double tol_linear = 1e-10;
    double delta_reg = 1e-6; // power-law shear floor

    PicardOptions picard() const { return {max_iter, tol_rel, relax, tol_linear}; }
};

struct SweepConfig {
    double f1_start = 0.05;
    double f1_stop = 1.0;
    int f1_count = 20;
    int theta_count = 16;
    // Operator family driving the sweep: "auto" follows regime_select;
    // "carreau"/"power" force the nonlinear pipeline (the r = 2 reference
    // curves of the experiments run through the forced family).
    std::string family = "auto";
};

struct RunConfig {
    CellSpec cell;
    Carreau fluid{1.0, 1e-3, 1.0, 1.7};
    double gamma = 1.0;
    SolverConfig solver;
    SweepConfig sweep;
    std::string out_dir = "out";
    bool deterministic_seedless = true;
};

namespace config_detail {

inline void reject_unknown(const nlohmann::json& obj, const std::set<std::string>& allowed,
                           const std::string& where) {
    if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("config: unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("config: bad value type for '" + std::string(key) + "' in " + where);
    }
}

} // namespace config_detail

inline RunConfig parse_config(const nlohmann::json& j) {
    using namespace config_detail;
    RunConfig cfg;
    reject_unknown(j, {"cell", "fluid", "gamma", "solver", "sweep", "output",
                       "deterministic_seedless"},
                   "config");

    if (j.contains("cell")) {
        const auto& c = j.at("cell");
        reject_unknown(c, {"shape", "n_seg", "h", "n_layers", "clearance"}, "cell");
        if (c.contains("shape")) {
            const auto& s = c.at("shape");
            reject_unknown(s, {"kind", "radius", "semi_major", "semi_minor", "angle"},
                           "cell.shape");
            std::string kind = "disk";
            read(s, "kind", kind, "cell.shape");
            if (kind == "none") {
                cfg.cell.shape.reset();
            } else if (kind == "disk") {
                double radius = 0.1, angle = 0.0;
                read(s, "radius", radius, "cell.shape");
                read(s, "angle", angle, "cell.shape");
                cfg.cell.shape = InclusionShape::disk(radius);
                cfg.cell.shape->angle = angle;
            } else if (kind == "ellipse") {
                double a = 0.3, b = 0.1, angle = 0.0;
                read(s, "semi_major", a, "cell.shape");
                read(s, "semi_minor", b, "cell.shape");
                read(s, "angle", angle, "cell.shape");
                cfg.cell.shape = InclusionShape::ellipse(a, b, angle);
            } else {
                throw ConfigError("config: cell.shape.kind must be disk, ellipse or none");
            }
        }
        read(c, "n_seg", cfg.cell.n_seg, "cell");
        read(c, "h", cfg.cell.h, "cell");
        read(c, "n_layers", cfg.cell.n_layers, "cell");
        read(c, "clearance", cfg.cell.clearance, "cell");
    }

    if (j.contains("fluid")) {
        const auto& f = j.at("fluid");
        reject_unknown(f, {"eta0", "eta_inf", "lambda", "r"}, "fluid");
        read(f, "eta0", cfg.fluid.eta0, "fluid");
        read(f, "eta_inf", cfg.fluid.eta_inf, "fluid");
        read(f, "lambda", cfg.fluid.lambda, "fluid");
        read(f, "r", cfg.fluid.r, "fluid");
    }
    read(j, "gamma", cfg.gamma, "config");

    if (j.contains("solver")) {
        const auto& s = j.at("solver");
        reject_unknown(s, {"max_iter", "tol_rel", "relax", "tol_linear", "delta_reg"}, "solver");
        read(s, "max_iter", cfg.solver.max_iter, "solver");
        read(s, "tol_rel", cfg.solver.tol_rel, "solver");
        read(s, "relax", cfg.solver.relax, "solver");
        read(s, "tol_linear", cfg.solver.tol_linear, "solver");
        read(s, "delta_reg", cfg.solver.delta_reg, "solver");
    }

    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        reject_unknown(s, {"f1_start", "f1_stop", "f1_count", "theta_count", "family"}, "sweep");
        read(s, "f1_start", cfg.sweep.f1_start, "sweep");
        read(s, "f1_stop", cfg.sweep.f1_stop, "sweep");
        read(s, "f1_count", cfg.sweep.f1_count, "sweep");
        read(s, "theta_count", cfg.sweep.theta_count, "sweep");
        read(s, "family", cfg.sweep.family, "sweep");
        if (cfg.sweep.family != "auto" && cfg.sweep.family != "carreau" &&
            cfg.sweep.family != "power")
            throw ConfigError("config: sweep.family must be auto, carreau or power");
    }

    if (j.contains("output")) {
        const auto& o = j.at("output");
        reject_unknown(o, {"dir"}, "output");
        read(o, "dir", cfg.out_dir, "output");
    }
    read(j, "deterministic_seedless", cfg.deterministic_seedless, "config");
    if (!cfg.deterministic_seedless)
        throw ConfigError("config: deterministic_seedless=false is meaningless, no RNG exists");

    // Invariants.
    try {
        cfg.cell.validate();
        validate(cfg.fluid);
    } catch (const ClearanceViolation&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.solver.max_iter < 1) throw ConfigError("config: solver.max_iter must be positive");
    if (!(cfg.solver.tol_rel > 0.0) || !(cfg.solver.tol_linear > 0.0))
        throw ConfigError("config: solver tolerances must be positive");
    if (!(cfg.solver.relax > 0.0 && cfg.solver.relax <= 1.0))
        throw ConfigError("config: solver.relax must lie in (0, 1]");
    if (cfg.solver.delta_reg < 0.0) throw ConfigError("config: solver.delta_reg must be nonnegative");
    if (cfg.sweep.f1_count < 2 || cfg.sweep.theta_count < 2)
        throw ConfigError("config: sweep counts must be at least 2");
    if (!(cfg.sweep.f1_start > 0.0) || !(cfg.sweep.f1_stop > cfg.sweep.f1_start))
        throw ConfigError("config: sweep amplitude range must satisfy 0 < start < stop");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_config(j);
}

} // namespace cellflow
