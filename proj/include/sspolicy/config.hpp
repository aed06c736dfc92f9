#pragma once

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "sspolicy/characteristics.hpp"
#include "sspolicy/costs.hpp"
#include "sspolicy/diffusion.hpp"
#include "sspolicy/expression.hpp"
#include "sspolicy/models.hpp"
#include "sspolicy/qvi.hpp"
#include "sspolicy/simulator.hpp"
#include "sspolicy/solver.hpp"

namespace sspolicy {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using json = nlohmann::json;

enum class ModelKind { dbm, reflected_dbm, gbm, expression };

struct PolicyConfig {
    /// optimal | order_up_to | delayed_trigger | just_in_time
    std::string type = "optimal";
    double y = 0, z = 1, trigger = 0, reorder = 0, target = 1;
};

struct CompareConfig {
    int y_points = 10, z_points = 10;
    /// Grid ranges as multiples of the optimal z*.
    double y_max_factor = 1.0, z_max_factor = 2.0;
    bool simulate = true;
    double horizon = 200;
    int paths = 16;
};

struct ExportConfig {
    int points = 200;
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();
};

struct RunConfig {
    ModelKind kind = ModelKind::dbm;
    DbmParams dbm;
    GbmParams gbm;
    /// Expression models
    std::string drift, diffusion, holding, ordering_shape = "0";
    std::map<std::string, double> params;
    double left = -std::numeric_limits<double>::infinity();
    double right = std::numeric_limits<double>::infinity();
    double anchor = 0, scale = 1, k1 = 1, k5 = 0;
    bool reflecting_left = false;
    std::string name = "custom";
    bool closed_form = true;

    GridConfig grid;
    SearchConfig search;
    int surface_points = 40;
    QviConfig qvi;
    double qvi_perturb = 1.0;
    SimulationConfig sim;
    PolicyConfig policy;
    CompareConfig compare;
    ExportConfig exporter;
    int threads = 0;
};

namespace detail {

inline void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
}

/// Number, or one of the strings "inf", "-inf".
inline double read_real(const json& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw ConfigError(where + ": expected a number");
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    const json& v = j.at(key);
    const std::string at = where + "." + key;
    if constexpr (std::is_same_v<T, double>) {
        out = read_real(v, at);
    } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(at + ": expected a boolean");
        out = v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(at + ": expected a string");
        out = v.get<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer() && !v.is_number_unsigned()) throw ConfigError(at + ": expected an integer");
        if constexpr (std::is_unsigned_v<T>) {
            if (v.is_number_integer() && v.get<long long>() < 0) throw ConfigError(at + ": must be non-negative");
        }
        out = v.get<T>();
    }
}

inline void read_model(const json& j, RunConfig& c) {
    const std::string w = "model";
    check_keys(j, {"builtin", "params", "characteristics", "drift", "diffusion", "left", "right", "anchor",
                   "reflecting_left", "scale", "name"},
               w);
    std::string mode = "closed_form";
    read(j, "characteristics", mode, w);
    if (mode != "closed_form" && mode != "quadrature")
        throw ConfigError("model.characteristics: expected closed_form or quadrature");
    c.closed_form = mode == "closed_form";
    const json params = j.value("params", json::object());
    if (j.contains("builtin")) {
        for (const char* k : {"drift", "diffusion", "left", "right", "anchor", "reflecting_left", "scale", "name"})
            if (j.contains(k)) throw ConfigError(std::string("model.") + k + ": not allowed for builtin models");
        std::string b;
        read(j, "builtin", b, w);
        const std::string pw = "model.params";
        if (b == "dbm" || b == "reflected_dbm") {
            c.kind = b == "dbm" ? ModelKind::dbm : ModelKind::reflected_dbm;
            c.dbm.reflected = b == "reflected_dbm";
            if (c.dbm.reflected) check_keys(params, {"mu", "sigma", "c_h", "k1", "k2", "k5"}, pw);
            else check_keys(params, {"mu", "sigma", "c_b", "c_h", "k1", "k2"}, pw);
            read(params, "mu", c.dbm.mu, pw);
            read(params, "sigma", c.dbm.sigma, pw);
            read(params, "c_b", c.dbm.c_b, pw);
            read(params, "c_h", c.dbm.c_h, pw);
            read(params, "k1", c.dbm.k1, pw);
            read(params, "k2", c.dbm.k2, pw);
            read(params, "k5", c.dbm.k5, pw);
            try {
                c.dbm.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (b == "gbm") {
            c.kind = ModelKind::gbm;
            check_keys(params, {"mu", "sigma", "k1", "k2", "k3", "k4", "beta", "eta"}, pw);
            read(params, "mu", c.gbm.mu, pw);
            read(params, "sigma", c.gbm.sigma, pw);
            read(params, "k1", c.gbm.k1, pw);
            read(params, "k2", c.gbm.k2, pw);
            read(params, "k3", c.gbm.k3, pw);
            read(params, "k4", c.gbm.k4, pw);
            read(params, "beta", c.gbm.beta, pw);
            read(params, "eta", c.gbm.eta, pw);
            try {
                c.gbm.validate();
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else {
            throw ConfigError("model.builtin: expected dbm, reflected_dbm or gbm");
        }
        return;
    }
    c.kind = ModelKind::expression;
    c.closed_form = false;
    if (!j.contains("drift") || !j.contains("diffusion"))
        throw ConfigError("model: expression models need drift and diffusion");
    read(j, "drift", c.drift, w);
    read(j, "diffusion", c.diffusion, w);
    read(j, "left", c.left, w);
    read(j, "right", c.right, w);
    read(j, "anchor", c.anchor, w);
    read(j, "reflecting_left", c.reflecting_left, w);
    read(j, "scale", c.scale, w);
    read(j, "name", c.name, w);
    if (c.name == "dbm" || c.name == "reflected_dbm" || c.name == "gbm")
        throw ConfigError("model.name: '" + c.name + "' is reserved for builtin models");
    if (!params.is_object()) throw ConfigError("model.params: expected an object");
    for (auto it = params.begin(); it != params.end(); ++it)
        c.params[it.key()] = read_real(it.value(), "model.params." + it.key());
    if (mode == "closed_form" && j.contains("characteristics"))
        throw ConfigError("model.characteristics: closed forms exist only for builtin models");
}

inline void read_costs(const json& j, RunConfig& c) {
    const std::string w = "costs";
    if (c.kind != ModelKind::expression)
        throw ConfigError("costs: builtin models take their cost parameters from model.params");
    check_keys(j, {"holding", "k1", "ordering_shape", "k5"}, w);
    if (!j.contains("holding")) throw ConfigError("costs.holding: required for expression models");
    read(j, "holding", c.holding, w);
    read(j, "k1", c.k1, w);
    read(j, "ordering_shape", c.ordering_shape, w);
    read(j, "k5", c.k5, w);
    if (!(c.k1 > 0)) throw ConfigError("costs.k1: must be positive");
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
    RunConfig c;
    detail::check_keys(j, {"model", "costs", "solver", "qvi", "simulation", "compare", "export", "threads"}, "config");
    if (!j.contains("model")) throw ConfigError("config: missing 'model'");
    detail::read_model(j.at("model"), c);
    if (j.contains("costs")) detail::read_costs(j.at("costs"), c);
    else if (c.kind == ModelKind::expression) throw ConfigError("config: expression models need a 'costs' section");
    detail::read(j, "threads", c.threads, "config");

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        const std::string w = "solver";
        detail::check_keys(s, {"starts", "box_half_width", "start_half_width", "boundary_proximity", "improvement",
                               "ray_steps", "grid", "surface_points"},
                           w);
        detail::read(s, "starts", c.search.starts, w);
        detail::read(s, "box_half_width", c.search.box_half_width, w);
        detail::read(s, "start_half_width", c.search.start_half_width, w);
        detail::read(s, "boundary_proximity", c.search.boundary_proximity, w);
        detail::read(s, "improvement", c.search.improvement, w);
        detail::read(s, "ray_steps", c.search.ray_steps, w);
        detail::read(s, "surface_points", c.surface_points, w);
        if (s.contains("grid")) {
            const json& g = s.at("grid");
            detail::check_keys(g, {"half_width", "cells", "probe_tol", "max_doublings"}, "solver.grid");
            detail::read(g, "half_width", c.grid.half_width, "solver.grid");
            detail::read(g, "cells", c.grid.cells, "solver.grid");
            detail::read(g, "probe_tol", c.grid.probe_tol, "solver.grid");
            detail::read(g, "max_doublings", c.grid.max_doublings, "solver.grid");
        }
        if (c.search.starts < 1) throw ConfigError("solver.starts: must be positive");
        if (c.grid.cells < 4) throw ConfigError("solver.grid.cells: must be at least 4");
        if (c.surface_points < 2) throw ConfigError("solver.surface_points: must be at least 2");
    }
    if (j.contains("qvi")) {
        const json& q = j.at("qvi");
        const std::string w = "qvi";
        detail::check_keys(q, {"points", "pair_points", "margin", "tol_factor", "max_witnesses", "perturb"}, w);
        detail::read(q, "points", c.qvi.points, w);
        detail::read(q, "pair_points", c.qvi.pair_points, w);
        detail::read(q, "margin", c.qvi.margin, w);
        detail::read(q, "tol_factor", c.qvi.tol_factor, w);
        detail::read(q, "max_witnesses", c.qvi.max_witnesses, w);
        detail::read(q, "perturb", c.qvi_perturb, w);
        if (c.qvi.points < 2 || c.qvi.pair_points < 2) throw ConfigError("qvi: points must be at least 2");
        if (!(c.qvi.tol_factor > 0)) throw ConfigError("qvi.tol_factor: must be positive");
    }
    if (j.contains("simulation")) {
        const json& s = j.at("simulation");
        const std::string w = "simulation";
        detail::check_keys(s, {"seed", "dt", "horizon", "paths", "burn_in", "x0", "hist_bins", "sample_stride",
                               "force_euler", "policy"},
                           w);
        detail::read(s, "seed", c.sim.seed, w);
        detail::read(s, "dt", c.sim.dt, w);
        detail::read(s, "horizon", c.sim.horizon, w);
        detail::read(s, "paths", c.sim.paths, w);
        detail::read(s, "burn_in", c.sim.burn_in, w);
        detail::read(s, "x0", c.sim.x0, w);
        detail::read(s, "hist_bins", c.sim.hist_bins, w);
        detail::read(s, "sample_stride", c.sim.sample_stride, w);
        detail::read(s, "force_euler", c.sim.force_euler, w);
        if (!(c.sim.dt > 0 && c.sim.horizon > 0 && c.sim.paths > 0))
            throw ConfigError("simulation: dt, horizon and paths must be positive");
        if (!(c.sim.burn_in >= 0 && c.sim.burn_in < 1)) throw ConfigError("simulation.burn_in: must lie in [0,1)");
        if (c.sim.hist_bins < 1) throw ConfigError("simulation.hist_bins: must be positive");
        if (s.contains("policy")) {
            const json& p = s.at("policy");
            const std::string pw = "simulation.policy";
            detail::check_keys(p, {"type", "y", "z", "trigger", "reorder", "target"}, pw);
            detail::read(p, "type", c.policy.type, pw);
            const auto& t = c.policy.type;
            auto only = [&](std::initializer_list<const char*> keys) {
                for (const char* k : {"y", "z", "trigger", "reorder", "target"}) {
                    bool allowed = false;
                    for (const char* a : keys) allowed |= std::string(a) == k;
                    if (!allowed && p.contains(k)) throw ConfigError(pw + "." + k + ": not used by policy " + t);
                }
            };
            if (t == "optimal" || t == "just_in_time") {
                only({});
            } else if (t == "order_up_to") {
                only({"y", "z"});
                if (!p.contains("y") || !p.contains("z")) throw ConfigError(pw + ": order_up_to needs y and z");
            } else if (t == "delayed_trigger") {
                only({"trigger", "reorder", "target"});
                if (!p.contains("reorder") || !p.contains("target"))
                    throw ConfigError(pw + ": delayed_trigger needs reorder and target");
            } else {
                throw ConfigError(pw + ".type: expected optimal, order_up_to, delayed_trigger or just_in_time");
            }
            detail::read(p, "y", c.policy.y, pw);
            detail::read(p, "z", c.policy.z, pw);
            detail::read(p, "trigger", c.policy.trigger, pw);
            detail::read(p, "reorder", c.policy.reorder, pw);
            detail::read(p, "target", c.policy.target, pw);
        }
    }
    if (j.contains("compare")) {
        const json& s = j.at("compare");
        const std::string w = "compare";
        detail::check_keys(s, {"y_points", "z_points", "y_max_factor", "z_max_factor", "simulate", "horizon", "paths"},
                           w);
        detail::read(s, "y_points", c.compare.y_points, w);
        detail::read(s, "z_points", c.compare.z_points, w);
        detail::read(s, "y_max_factor", c.compare.y_max_factor, w);
        detail::read(s, "z_max_factor", c.compare.z_max_factor, w);
        detail::read(s, "simulate", c.compare.simulate, w);
        detail::read(s, "horizon", c.compare.horizon, w);
        detail::read(s, "paths", c.compare.paths, w);
        if (c.compare.y_points < 1 || c.compare.z_points < 1) throw ConfigError("compare: grid sizes must be positive");
        if (!(c.compare.y_max_factor > 0 && c.compare.z_max_factor > 0))
            throw ConfigError("compare: range factors must be positive");
    }
    if (j.contains("export")) {
        const json& s = j.at("export");
        detail::check_keys(s, {"points", "lo", "hi"}, "export");
        detail::read(s, "points", c.exporter.points, "export");
        detail::read(s, "lo", c.exporter.lo, "export");
        detail::read(s, "hi", c.exporter.hi, "export");
        if (c.exporter.points < 1) throw ConfigError("export.points: must be positive");
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("malformed JSON: ") + e.what());
    }
    return parse_config(j);
}

/// Model, costs and characteristics assembled from a configuration.
struct Problem {
    DiffusionModel model;
    CostModel costs;
    std::shared_ptr<const ScaleSpeed> ss;
    Characteristics ch;
};

inline Problem build_problem(const RunConfig& c) {
    Problem p;
    try {
        switch (c.kind) {
        case ModelKind::dbm:
        case ModelKind::reflected_dbm:
            p.model = dbm_model(c.dbm);
            p.costs = dbm_costs(c.dbm);
            break;
        case ModelKind::gbm:
            p.model = gbm_model(c.gbm);
            p.costs = gbm_costs(c.gbm);
            break;
        case ModelKind::expression: {
            Expression drift(c.drift, c.params), diff(c.diffusion, c.params);
            Expression hold(c.holding, c.params), shape(c.ordering_shape, c.params);
            p.model.drift = drift;
            p.model.diffusion = diff;
            p.model.left = c.left;
            p.model.right = c.right;
            p.model.anchor = c.anchor;
            p.model.reflecting_left = c.reflecting_left;
            p.model.scale = c.scale;
            p.model.name = c.name;
            p.costs.c0 = hold;
            p.costs.H = shape;
            p.costs.k1 = c.k1;
            p.costs.k5 = c.k5;
            p.costs.params = c.params;
            p.costs.name = c.name;
            break;
        }
        }
        p.model.validate();
    } catch (const ExpressionError& e) {
        throw ConfigError(std::string("expression: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    p.ss = std::make_shared<const ScaleSpeed>(p.model);
    return p;
}

/// Builds the characteristics (closed form or tabulated); separate from
/// build_problem so the boundary report can be inspected first.
inline void attach_characteristics(Problem& p, const RunConfig& c, const BoundaryReport& br) {
    if (c.closed_form) {
        if (c.kind == ModelKind::gbm) p.ch = gbm_characteristics(c.gbm);
        else p.ch = dbm_characteristics(c.dbm);
    } else {
        p.ch = build_characteristics(p.ss, p.costs, br, c.grid);
    }
}

}  // namespace sspolicy
