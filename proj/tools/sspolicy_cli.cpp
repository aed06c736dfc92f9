#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "sspolicy/sspolicy.hpp"

namespace fs = std::filesystem;
using namespace sspolicy;

namespace {

enum Exit { ok = 0, config_error = 1, inadmissible = 2, no_minimizer = 3, verify_failed = 4 };

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    int threads = 0;
};

struct Context {
    RunConfig cfg;
    Problem prob;
    BoundaryReport br;
    int threads = 1;
};

class ExitError : public std::runtime_error {
public:
    ExitError(int code, const std::string& msg) : std::runtime_error(msg), code(code) {}
    int code;
};

const char* model_label(ModelKind k) {
    switch (k) {
    case ModelKind::dbm: return "dbm";
    case ModelKind::reflected_dbm: return "reflected_dbm";
    case ModelKind::gbm: return "gbm";
    default: return "expression";
    }
}

Context load(const Options& o) {
    Context c;
    try {
        c.cfg = load_config(o.config);
        if (o.seed) c.cfg.sim.seed = *o.seed;
        c.threads = resolve_threads(o.threads > 0 ? o.threads : c.cfg.threads);
        c.cfg.sim.threads = c.threads;
        c.cfg.search.threads = c.threads;
        c.prob = build_problem(c.cfg);
    } catch (const ConfigError& e) {
        throw ExitError(config_error, std::string("config error: ") + e.what());
    }
    c.br = classify_boundaries(*c.prob.ss);
    if (c.br.admissible == TriState::fail)
        throw ExitError(inadmissible, std::string("inadmissible model: left boundary ") +
                                          (c.br.leftAttracting ? "attracting" : "not attracting") +
                                          ", right boundary " +
                                          (c.br.rightAttracting ? "attracting" : "not attracting"));
    if (c.br.admissible == TriState::indeterminate)
        std::cerr << "warning: admissibility could not be certified; continuing\n";
    attach_characteristics(c.prob, c.cfg, c.br);
    fs::create_directories(o.out);
    return c;
}

void header(const char* cmd, const Context& c) {
    std::printf("# sspolicy %s model=%s characteristics=%s seed=%llu threads=%d\n", cmd, model_label(c.cfg.kind),
                to_string(c.prob.ch.mode), static_cast<unsigned long long>(c.cfg.sim.seed), c.threads);
}

std::string csv_header(const char* cmd, const Context& c) {
    return std::string("# sspolicy ") + cmd + " seed=" + std::to_string(c.cfg.sim.seed);
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << j.dump(2) << '\n';
}

json boundary_json(const BoundaryReport& br) {
    return {{"left", to_string(br.leftClass)},
            {"right", to_string(br.rightClass)},
            {"leftAttracting", br.leftAttracting},
            {"rightAttracting", br.rightAttracting},
            {"leftAttainable", br.leftAttainable},
            {"admissible", to_string(br.admissible)},
            {"notes", br.notes}};
}

std::string regime_note(const Context& c) {
    if (c.cfg.kind != ModelKind::gbm) return "";
    switch (gbm_regime(c.cfg.gbm)) {
    case GbmRegime::no_order_optimal:
        return "k4 = 0: holding cost vanishes at 0, so the infimum 0 is approached by ever smaller (y,z) and is not "
               "attained";
    case GbmRegime::no_optimum:
        return "k2 = k3 = 0: ordering ever larger amounts keeps lowering the cost; no optimal policy exists";
    default: return "";
    }
}

SolveReport solve(const Context& c) { return minimize_F(c.prob.ch, c.prob.costs, c.cfg.search); }

json cost_json(const Context& c) {
    try {
        const auto v = validate_costs(*c.prob.ss, c.br, c.prob.costs);
        if (v.overall() == TriState::fail) std::cerr << "warning: standing cost assumptions not met; see costValidation in solve.json\n";
        return {{"overall", to_string(v.overall())},
                {"infCompact", to_string(v.infCompactOk)},
                {"limitAtA", to_string(v.limitAtAOk)},
                {"c0SpeedIntegrable", to_string(v.c0MIntegrableOk)},
                {"doubleIntegralDiverges", to_string(v.doubleIntegralDivergesOk)},
                {"orderingShape", to_string(v.orderingShapeOk)},
                {"witnesses", v.witnesses}};
    } catch (const DomainError& e) {
        return {{"overall", to_string(TriState::indeterminate)}, {"error", e.what()}};
    }
}

json solve_json(const Context& c, const SolveReport& r) {
    json j = {{"seed", c.cfg.sim.seed},
              {"model", model_label(c.cfg.kind)},
              {"characteristics", to_string(c.prob.ch.mode)},
              {"boundaries", boundary_json(c.br)},
              {"verdict", r.found() ? "minimizer" : "no_minimizer"},
              {"message", r.message},
              {"evaluations", r.evaluations},
              {"iterations", r.iterations},
              {"bestProbeF", r.bestProbeF}};
    if (r.found()) {
        j["yStar"] = r.yStar;
        j["zStar"] = r.zStar;
        j["FStar"] = r.FStar;
        j["boundaryCase"] = r.boundaryCase;
        j["focResidual"] = {r.focResidual.first, r.focResidual.second};
        j["socValue"] = r.socValue;
        j["edgeSlack"] = r.edgeSlack;
        const auto ev = evaluate_policy(c.prob.ch, c.prob.costs, r.yStar, r.zStar);
        j["orderFrequency"] = ev.kappa;
    } else {
        j["infimumEstimate"] = r.infimumEstimate;
        j["boundaryEscape"] = r.boundaryEscape;
        json ray = json::array();
        for (auto [y, z] : r.rayProbe) ray.push_back({y, z});
        j["rayProbe"] = ray;
    }
    if (auto note = regime_note(c); !note.empty()) j["regime"] = note;
    j["costValidation"] = cost_json(c);
    if (c.cfg.kind == ModelKind::reflected_dbm) {
        const auto opt = reflected_dbm_optimum(c.cfg.dbm);
        j["closedForm"] = {{"yStar", opt.y}, {"zStar", opt.z}, {"FStar", opt.F}};
    }
    return j;
}

void write_surface(const fs::path& p, const Context& c, const SolveReport& r) {
    const DomainMap map = c.prob.model.domain_map();
    const double uc = map.to_u(c.prob.model.anchor);
    double lo, hi;
    if (r.found()) {
        const double uy = r.yStar > c.prob.model.left ? map.to_u(r.yStar) : uc - 3;
        lo = std::min(uy, uc) - 2;
        hi = std::max(map.to_u(r.zStar), uc) + 2;
    } else {
        lo = uc - 4;
        hi = uc + 4;
    }
    const int n = c.cfg.surface_points;
    std::vector<double> xs;
    if (c.prob.ch.admits(c.prob.model.left) && std::isfinite(c.prob.model.left)) xs.push_back(c.prob.model.left);
    for (int i = 0; i < n; ++i) {
        const double x = map.to_x(lo + (hi - lo) * i / (n - 1));
        if (c.prob.model.interior(x)) xs.push_back(x);
    }
    std::ofstream os(p);
    os << csv_header("solve", c) << "\ny,z,F\n";
    for (double y : xs)
        for (double z : xs)
            if (y < z) os << io::fmt17(y) << ',' << io::fmt17(z) << ','
                          << io::fmt17(policy_cost(c.prob.ch, c.prob.costs, y, z)) << '\n';
}

int cmd_solve(const Options& o) {
    Context c = load(o);
    header("solve", c);
    const SolveReport r = solve(c);
    write_json(fs::path(o.out) / "solve.json", solve_json(c, r));
    write_surface(fs::path(o.out) / "f_surface.csv", c, r);
    if (!r.found()) {
        std::printf("%s\n", r.message.c_str());
        if (auto note = regime_note(c); !note.empty()) std::printf("regime: %s\n", note.c_str());
        std::printf("infimum estimate %.10g (escape toward the %s boundary)\n", r.infimumEstimate,
                    r.boundaryEscape.c_str());
        return no_minimizer;
    }
    std::printf("y*=%.10g z*=%.10g F*=%.10g%s\n", r.yStar, r.zStar, r.FStar, r.boundaryCase ? " (y* at boundary)" : "");
    return ok;
}

int cmd_verify(const Options& o) {
    Context c = load(o);
    header("verify", c);
    const SolveReport r = solve(c);
    if (!r.found()) {
        std::printf("%s\n", r.message.c_str());
        return no_minimizer;
    }
    GSolution g = build_G(c.prob.ch, c.prob.costs, r);
    g.FStar *= c.cfg.qvi_perturb;
    const QVIReport q = verify_qvi(g, c.prob.model, c.prob.costs, c.cfg.qvi);
    json j = {{"seed", c.cfg.sim.seed},
              {"model", model_label(c.cfg.kind)},
              {"yStar", g.yStar},
              {"zStar", g.zStar},
              {"FStar", g.FStar},
              {"builtFStar", g.builtFStar},
              {"tolerance", q.tol},
              {"gridPoints", q.grid.size()},
              {"worstSlackA", q.worstSlackA},
              {"worstSlackB", q.worstSlackB},
              {"equalityResidualUpper", q.equalityResidualUpper},
              {"equalityResidualLower", q.equalityResidualLower},
              {"gluingResidual", q.gluingResidual},
              {"qviResidual", q.qviResidual},
              {"lines", {q.line1, q.line2, q.line3, q.line4}},
              {"gluing", q.gluing},
              {"condition36Verdict", to_string(q.condition36Verdict)},
              {"condition36VerdictNote", q.condition36VerdictNote},
              {"witnessCount", q.witnesses.size()},
              {"pass", q.pass}};
    write_json(fs::path(o.out) / "qvi.json", j);
    std::ofstream os(fs::path(o.out) / "qvi_witnesses.csv");
    os << csv_header("verify", c) << "\nconstraint,x,y,z,value\n";
    for (const auto& w : q.witnesses)
        os << w.constraint << ',' << io::fmt17(w.x) << ',' << io::fmt17(w.y) << ',' << io::fmt17(w.z) << ','
           << io::fmt17(w.value) << '\n';
    std::printf("QVI %s: worst slack A %.3e, worst slack B %.3e, equality residual %.3e, tolerance %.3e, "
                "monotone below y* %s\n",
                q.pass ? "pass" : "FAIL", q.worstSlackA, q.worstSlackB,
                std::max(q.equalityResidualUpper, q.equalityResidualLower), q.tol, to_string(q.condition36Verdict));
    return q.pass ? ok : verify_failed;
}

json estimate_json(const Estimate& e) { return {{"mean", e.mean}, {"stderr", e.stderr_}}; }

json simulation_json(const SimulationResult& s) {
    return {{"seed", s.seed},
            {"policy", s.policy},
            {"scheme", s.scheme},
            {"dt", s.dt},
            {"horizon", s.horizon},
            {"burnIn", s.burnIn},
            {"paths", s.paths},
            {"abortedPaths", s.abortedPaths},
            {"avgCost", estimate_json(s.avgCost)},
            {"holdingComponent", estimate_json(s.holding)},
            {"orderingComponent", estimate_json(s.ordering)},
            {"reflectionComponent", estimate_json(s.reflection)},
            {"orderFrequency", estimate_json(s.orderFrequency)},
            {"localTimeRate", estimate_json(s.localTimeRate)},
            {"cycleStats",
             {{"count", s.cycles.count},
              {"meanLength", s.cycles.meanLength},
              {"meanCost", s.cycles.meanCost},
              {"renewalCost", s.cycles.renewalCost}}}};
}

int cmd_simulate(const Options& o) {
    Context c = load(o);
    header("simulate", c);
    const auto& pc = c.cfg.policy;
    PolicySpec pol;
    std::optional<double> analytic;
    RealFn density;
    double lower = c.prob.model.left;
    if (pc.type == "optimal" || pc.type == "order_up_to") {
        double y = pc.y, z = pc.z;
        if (pc.type == "optimal") {
            const SolveReport r = solve(c);
            if (!r.found()) {
                std::printf("%s\n", r.message.c_str());
                return no_minimizer;
            }
            y = r.yStar;
            z = r.zStar;
        }
        pol = OrderUpTo{y, z};
        try {
            auto ev = evaluate_policy(c.prob.ch, c.prob.costs, y, z, c.prob.ss);
            analytic = ev.F;
            density = ev.pi;
            lower = y;
        } catch (const DomainError& e) {
            throw ExitError(config_error, std::string("config error: ") + e.what());
        }
    } else if (pc.type == "delayed_trigger") {
        pol = DelayedTrigger{pc.trigger, pc.reorder, pc.target};
        if (c.cfg.kind == ModelKind::reflected_dbm && pc.trigger == 0 && pc.reorder >= 0) {
            const DbmParams p = c.cfg.dbm;
            const double y = pc.reorder, z = pc.target;
            analytic = delayed_policy_cost(p, y, z);
            density = [p, y, z](double x) { return delayed_density(p, y, z, x); };
        }
    } else {
        pol = JustInTime{};
        if (c.cfg.kind == ModelKind::reflected_dbm) {
            const DbmParams p = c.cfg.dbm;
            analytic = jit_cost(p);
            density = [p](double x) { return jit_density(p, x); };
        }
    }
    SimulationConfig sc = c.cfg.sim;
    if (sc.sample_stride == 0) sc.sample_stride = std::max(1L, std::lround(sc.horizon / sc.dt) / 10000);
    SimulationResult s;
    try {
        s = simulate(c.prob.model, c.prob.costs, pol, sc);
    } catch (const DomainError& e) {
        throw ExitError(config_error, std::string("config error: ") + e.what());
    }
    json j = simulation_json(s);
    std::optional<double> distance;
    std::vector<double> cdf;
    if (density) {
        cdf = analytic_cdf(s.histogram, density, lower);
        double d = 0;
        for (size_t i = 0; i < cdf.size(); ++i) d = std::max(d, std::abs(s.histogram.cdf(i) - cdf[i]));
        distance = d;
        j["stationaryDistance"] = d;
    }
    if (analytic) {
        j["analyticCost"] = *analytic;
        j["relativeError"] = (s.avgCost.mean - *analytic) / *analytic;
    }
    write_json(fs::path(o.out) / "simulation.json", j);

    std::ofstream hs(fs::path(o.out) / "histogram.csv");
    hs << csv_header("simulate", c) << "\nlo,hi,occupancy,empirical_cdf_hi,analytic_cdf_hi\n";
    const auto& h = s.histogram;
    const double tot = static_cast<double>(h.total());
    for (size_t i = 0; i + 1 < h.edges.size(); ++i)
        hs << io::fmt17(h.edges[i]) << ',' << io::fmt17(h.edges[i + 1]) << ','
           << io::fmt17(tot > 0 ? h.counts[i] / tot : 0.0) << ',' << io::fmt17(h.cdf(i + 1)) << ','
           << (cdf.empty() ? "" : io::fmt17(cdf[i + 1])) << '\n';
    std::ofstream ps(fs::path(o.out) / "path_sample.csv");
    ps << csv_header("simulate", c) << "\nt,x\n";
    for (auto [t, x] : s.pathSample) ps << io::fmt17(t) << ',' << io::fmt17(x) << '\n';

    std::printf("%s: average cost %.6g +- %.2g", s.policy.c_str(), s.avgCost.mean, s.avgCost.stderr_);
    if (analytic) std::printf(" (analytic %.6g)", *analytic);
    if (distance) std::printf(", occupancy CDF distance %.3g", *distance);
    std::printf("\n");
    if (s.abortedPaths > 0) std::printf("warning: %d paths aborted by the blow-up guard\n", s.abortedPaths);
    return ok;
}

int cmd_compare(const Options& o) {
    Context c = load(o);
    header("compare", c);
    if (c.cfg.kind != ModelKind::reflected_dbm)
        throw ExitError(config_error, "config error: compare needs the reflected_dbm builtin model");
    const DbmParams& p = c.cfg.dbm;
    const auto opt = reflected_dbm_optimum(p);
    const auto& cc = c.cfg.compare;
    SimulationConfig sc = c.cfg.sim;
    sc.horizon = cc.horizon;
    sc.paths = cc.paths;
    auto sim = [&](const PolicySpec& pol) { return simulate(c.prob.model, c.prob.costs, pol, sc).avgCost; };

    std::ofstream os(fs::path(o.out) / "compare.csv");
    os << csv_header("compare", c) << "\npolicy,y,z,analytic_cost,F_of_pair,simulated_cost,simulated_stderr,"
                                       "cheaper_than_optimal\n";
    auto row = [&](const char* name, double y, double z, double a, double F, std::optional<Estimate> e) {
        os << name << ',' << io::fmt17(y) << ',' << io::fmt17(z) << ',' << io::fmt17(a) << ',' << io::fmt17(F) << ','
           << (e ? io::fmt17(e->mean) : "") << ',' << (e ? io::fmt17(e->stderr_) : "") << ','
           << (a < opt.F ? "yes" : "no") << '\n';
    };
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row("optimal_sS", opt.y, opt.z, opt.F, opt.F, cc.simulate ? std::optional(sim(OrderUpTo{opt.y, opt.z})) : std::nullopt);
    const double jit = jit_cost(p);
    row("just_in_time", nan, nan, jit, nan, cc.simulate ? std::optional(sim(JustInTime{})) : std::nullopt);

    double best = std::numeric_limits<double>::infinity(), by = 0, bz = 0;
    long cheaper = 0, total = 0;
    std::vector<std::array<double, 4>> grid;
    for (int i = 0; i < cc.y_points; ++i) {
        const double y = cc.y_max_factor * opt.z * i / cc.y_points;
        for (int k = 0; k < cc.z_points; ++k) {
            const double z = y + cc.z_max_factor * opt.z * (k + 1) / cc.z_points;
            const double a = delayed_policy_cost(p, y, z), F = dbm_F(p, y, z);
            grid.push_back({y, z, a, F});
            ++total;
            if (a < F) ++cheaper;
            if (a < best) {
                best = a;
                by = y;
                bz = z;
            }
        }
    }
    for (const auto& g : grid) {
        const bool is_best = g[0] == by && g[1] == bz;
        row("delayed_trigger", g[0], g[1], g[2], g[3],
            cc.simulate && is_best ? std::optional(sim(DelayedTrigger{0, g[0], g[1]})) : std::nullopt);
    }
    std::printf("optimal (s,S): y*=%.6g z*=%.6g F*=%.6g\n", opt.y, opt.z, opt.F);
    std::printf("just-in-time: cost %.6g, %s than the optimal (s,S) policy\n", jit,
                jit_better_than_sS(p) ? "cheaper" : "not cheaper");
    std::printf("delayed trigger: %ld of %ld grid pairs cheaper than the (s,S) policy with the same levels; best %.6g "
                "at (%.4g, %.4g)\n",
                cheaper, total, best, by, bz);
    return ok;
}

int cmd_export(const Options& o) {
    Context c = load(o);
    header("export-characteristics", c);
    const auto& e = c.cfg.exporter;
    const DomainMap map = c.prob.model.domain_map();
    const double uc = map.to_u(c.prob.model.anchor);
    const double lo = std::isnan(e.lo) ? map.to_u(c.prob.model.anchor) - 6 : map.to_u(e.lo);
    const double hi = std::isnan(e.hi) ? uc + 6 : map.to_u(e.hi);
    if (!(lo < hi)) throw ExitError(config_error, "config error: export range is empty");
    std::vector<double> xs;
    for (int i = 0; i < e.points; ++i) {
        const double x = map.to_x(e.points == 1 ? lo : lo + (hi - lo) * i / (e.points - 1));
        if (c.prob.model.interior(x)) xs.push_back(x);
    }
    std::ofstream os(fs::path(o.out) / "characteristics.csv");
    export_characteristics_csv(c.prob.ch, xs, os);
    std::printf("wrote %zu rows to %s\n", xs.size(), (fs::path(o.out) / "characteristics.csv").c_str());
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal (s,S) inventory policies for one-dimensional diffusions"};
    app.require_subcommand(1);
    Options opts;
    struct Cmd {
        const char* name;
        const char* help;
        int (*fn)(const Options&);
    };
    const Cmd cmds[] = {{"solve", "Minimize the long-run average cost over (y,z)", cmd_solve},
                        {"verify", "Check the QVI system at the computed optimum", cmd_verify},
                        {"simulate", "Monte Carlo simulation of a policy", cmd_simulate},
                        {"compare", "Compare (s,S), delayed-trigger and just-in-time policies", cmd_compare},
                        {"export-characteristics", "Write g0 and zeta on a grid", cmd_export}};
    int (*chosen)(const Options&) = nullptr;
    for (const auto& c : cmds) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", opts.config, "JSON configuration file")->required();
        sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", opts.seed, "Random seed (overrides the config)");
        sub->add_option("--threads", opts.threads,
                        "Worker threads (default: config, then SSPOLICY_THREADS, then 1)")
            ->check(CLI::NonNegativeNumber);
        sub->callback([&chosen, fn = c.fn] { chosen = fn; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : config_error;
    }
    try {
        return chosen(opts);
    } catch (const ExitError& e) {
        std::cerr << e.what() << '\n';
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return config_error;
    }
}
