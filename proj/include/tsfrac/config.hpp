#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "tsfrac/expr.hpp"
#include "tsfrac/mcsolve.hpp"
#include "tsfrac/problem.hpp"

namespace tsfrac {

enum class Engine { Fd, Mc, Analytic, OperatorEval, Compare, Convergence };

enum class OutputFormat { Csv, Json };

/// One side of the jump kernel as written in a configuration document.
struct KernelConfig {
    std::string type = "symmetric-stable"; // symmetric-stable | classical-stable |
                                           // tempered-stable | variable-order | none
    double beta = 0.5;
    double tempering = 0.0;
    double weight = 1.0;
    std::string order; // expression for variable-order

    bool operator==(const KernelConfig&) const = default;
};

struct ProblemConfig {
    double a = -1.0;
    double b = 1.0;
    double lambda = 0.0;
    double u_a = 0.0;
    double u_b = 0.0;
    std::string g;     // expression; empty means 0
    std::string gamma; // expression; empty means 0
    std::string alpha; // expression; empty means 0
    std::string flavor = "caputo"; // caputo | riemann-liouville
    KernelConfig kernel;                 // symmetric form, or
    std::optional<KernelConfig> kernel_plus;  // explicit per-side form
    std::optional<KernelConfig> kernel_minus;

    bool operator==(const ProblemConfig&) const = default;
};

struct FdParams {
    std::size_t n_cells = 400;
    bool operator==(const FdParams&) const = default;
};

struct McParams {
    std::size_t paths = 10000;
    double eps = 1e-4;
    double dt = 1e-3;
    double tmax = 50.0;
    std::uint64_t seed = 1;
    unsigned threads = 0; // 0: use the environment default
    bool operator==(const McParams&) const = default;
};

struct RunConfig {
    ProblemConfig problem;
    Engine engine = Engine::Fd;
    FdParams fd;
    McParams mc;
    std::vector<double> points;
    std::vector<std::size_t> grids = {100, 200, 400, 800}; // convergence engine
    std::string f; // expression evaluated by the operator-eval engine
    std::string output_path;
    OutputFormat output_format = OutputFormat::Csv;

    bool operator==(const RunConfig&) const = default;
};

namespace config_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
    throw ConfigError(path + ": " + what);
}

inline void reject_unknown(const json& obj, const std::string& path,
                           const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

inline double get_num(const json& obj, const std::string& path, const std::string& key,
                      std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing required number");
    }
    if (!obj[key].is_number()) fail(path + "." + key, "expected a number");
    return obj[key].get<double>();
}

inline std::string get_str(const json& obj, const std::string& path, const std::string& key,
                           std::optional<std::string> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        fail(path + "." + key, "missing required string");
    }
    if (!obj[key].is_string()) fail(path + "." + key, "expected a string");
    return obj[key].get<std::string>();
}

inline void check_expression(const std::string& text, const std::string& path) {
    if (text.empty()) return;
    try {
        Expression e(text);
    } catch (const ExprParseError& e) {
        fail(path, std::string("invalid expression: ") + e.what());
    }
}

inline KernelConfig parse_kernel(const json& obj, const std::string& path) {
    if (!obj.is_object()) fail(path, "expected an object");
    reject_unknown(obj, path, {"type", "beta", "tempering", "weight", "order"});
    KernelConfig k;
    k.type = get_str(obj, path, "type", std::string("symmetric-stable"));
    const std::set<std::string> types = {"symmetric-stable", "classical-stable", "tempered-stable",
                                         "variable-order", "none"};
    if (!types.count(k.type)) fail(path + ".type", "unknown kernel type '" + k.type + "'");
    if (k.type == "none") {
        reject_unknown(obj, path, {"type"});
        return k;
    }
    if (k.type == "variable-order") {
        k.order = get_str(obj, path, "order");
        check_expression(k.order, path + ".order");
    } else {
        k.beta = get_num(obj, path, "beta");
        if (!(k.beta > 0.0 && k.beta < 1.0)) fail(path + ".beta", "must lie strictly in (0,1)");
    }
    if (k.type == "tempered-stable") {
        k.tempering = get_num(obj, path, "tempering");
        if (!(k.tempering >= 0.0)) fail(path + ".tempering", "must be >= 0");
    }
    if (k.type != "symmetric-stable") {
        k.weight = get_num(obj, path, "weight", 1.0);
        if (!(k.weight > 0.0)) fail(path + ".weight", "must be positive");
    }
    return k;
}

inline json emit_kernel(const KernelConfig& k) {
    json o;
    o["type"] = k.type;
    if (k.type == "none") return o;
    if (k.type == "variable-order") o["order"] = k.order;
    else o["beta"] = k.beta;
    if (k.type == "tempered-stable") o["tempering"] = k.tempering;
    if (k.type != "symmetric-stable") o["weight"] = k.weight;
    return o;
}

} // namespace config_detail

/// Parses and validates a configuration document. Unknown keys, malformed
/// expressions, and invariant violations raise ConfigError with the offending
/// field path.
inline RunConfig parse_config(const std::string& text) {
    using config_detail::fail;
    using config_detail::get_num;
    using config_detail::get_str;
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail("config", "top level must be an object");
    config_detail::reject_unknown(doc, "config",
                                  {"problem", "engine", "fd", "mc", "points", "grids", "f", "output"});

    RunConfig cfg;
    if (!doc.contains("problem") || !doc["problem"].is_object())
        fail("config.problem", "missing required object");
    const json& p = doc["problem"];
    config_detail::reject_unknown(p, "problem",
                                  {"a", "b", "lambda", "u_a", "u_b", "g", "gamma", "alpha",
                                   "flavor", "kernel", "kernel_plus", "kernel_minus"});
    cfg.problem.a = get_num(p, "problem", "a", -1.0);
    cfg.problem.b = get_num(p, "problem", "b", 1.0);
    if (!(cfg.problem.a < cfg.problem.b)) fail("problem.a", "need a < b");
    cfg.problem.lambda = get_num(p, "problem", "lambda", 0.0);
    if (!(cfg.problem.lambda >= 0.0)) fail("problem.lambda", "must be >= 0");
    cfg.problem.u_a = get_num(p, "problem", "u_a", 0.0);
    cfg.problem.u_b = get_num(p, "problem", "u_b", 0.0);
    cfg.problem.g = get_str(p, "problem", "g", std::string());
    cfg.problem.gamma = get_str(p, "problem", "gamma", std::string());
    cfg.problem.alpha = get_str(p, "problem", "alpha", std::string());
    config_detail::check_expression(cfg.problem.g, "problem.g");
    config_detail::check_expression(cfg.problem.gamma, "problem.gamma");
    config_detail::check_expression(cfg.problem.alpha, "problem.alpha");
    cfg.problem.flavor = get_str(p, "problem", "flavor", std::string("caputo"));
    if (cfg.problem.flavor != "caputo" && cfg.problem.flavor != "riemann-liouville")
        fail("problem.flavor", "must be 'caputo' or 'riemann-liouville'");
    const bool has_sides = p.contains("kernel_plus") || p.contains("kernel_minus");
    if (has_sides) {
        if (p.contains("kernel")) fail("problem.kernel", "give either kernel or kernel_plus/minus");
        if (!p.contains("kernel_plus") || !p.contains("kernel_minus"))
            fail("problem.kernel_plus", "kernel_plus and kernel_minus must come together");
        cfg.problem.kernel_plus = config_detail::parse_kernel(p["kernel_plus"], "problem.kernel_plus");
        cfg.problem.kernel_minus =
            config_detail::parse_kernel(p["kernel_minus"], "problem.kernel_minus");
    } else if (p.contains("kernel")) {
        cfg.problem.kernel = config_detail::parse_kernel(p["kernel"], "problem.kernel");
    }

    const std::string eng = get_str(doc, "config", "engine");
    if (eng == "fd") cfg.engine = Engine::Fd;
    else if (eng == "mc") cfg.engine = Engine::Mc;
    else if (eng == "analytic") cfg.engine = Engine::Analytic;
    else if (eng == "operator-eval") cfg.engine = Engine::OperatorEval;
    else if (eng == "compare") cfg.engine = Engine::Compare;
    else if (eng == "convergence") cfg.engine = Engine::Convergence;
    else fail("config.engine", "unknown engine '" + eng + "'");

    if (doc.contains("fd")) {
        const json& f = doc["fd"];
        config_detail::reject_unknown(f, "fd", {"n_cells"});
        const double n = get_num(f, "fd", "n_cells", 400.0);
        if (!(n >= 8.0) || n != std::floor(n)) fail("fd.n_cells", "must be an integer >= 8");
        cfg.fd.n_cells = static_cast<std::size_t>(n);
    }
    if (doc.contains("mc")) {
        const json& m = doc["mc"];
        config_detail::reject_unknown(m, "mc", {"paths", "eps", "dt", "tmax", "seed", "threads"});
        const double paths = get_num(m, "mc", "paths", 10000.0);
        if (!(paths >= 1.0)) fail("mc.paths", "must be >= 1");
        cfg.mc.paths = static_cast<std::size_t>(paths);
        cfg.mc.eps = get_num(m, "mc", "eps", 1e-4);
        if (!(cfg.mc.eps > 0.0)) fail("mc.eps", "must be positive");
        cfg.mc.dt = get_num(m, "mc", "dt", 1e-3);
        if (!(cfg.mc.dt > 0.0)) fail("mc.dt", "must be positive");
        cfg.mc.tmax = get_num(m, "mc", "tmax", 50.0);
        if (!(cfg.mc.tmax > 0.0)) fail("mc.tmax", "must be positive");
        cfg.mc.seed = static_cast<std::uint64_t>(get_num(m, "mc", "seed", 1.0));
        cfg.mc.threads = static_cast<unsigned>(get_num(m, "mc", "threads", 0.0));
    }
    if (doc.contains("points")) {
        if (!doc["points"].is_array()) fail("config.points", "expected an array of numbers");
        for (const auto& v : doc["points"]) {
            if (!v.is_number()) fail("config.points", "expected an array of numbers");
            const double x = v.get<double>();
            if (x < cfg.problem.a || x > cfg.problem.b)
                fail("config.points", "evaluation point outside [a,b]");
            cfg.points.push_back(x);
        }
    }
    if (doc.contains("grids")) {
        if (!doc["grids"].is_array()) fail("config.grids", "expected an array of integers");
        cfg.grids.clear();
        for (const auto& v : doc["grids"]) {
            if (!v.is_number() || v.get<double>() < 8.0)
                fail("config.grids", "grid sizes must be integers >= 8");
            cfg.grids.push_back(static_cast<std::size_t>(v.get<double>()));
        }
    }
    cfg.f = get_str(doc, "config", "f", std::string());
    config_detail::check_expression(cfg.f, "config.f");
    if (cfg.engine == Engine::OperatorEval && cfg.f.empty())
        fail("config.f", "operator-eval engine needs a function expression");
    if (doc.contains("output")) {
        const json& o = doc["output"];
        config_detail::reject_unknown(o, "output", {"path", "format"});
        cfg.output_path = get_str(o, "output", "path", std::string());
        const std::string fmt = get_str(o, "output", "format", std::string("csv"));
        if (fmt == "csv") cfg.output_format = OutputFormat::Csv;
        else if (fmt == "json") cfg.output_format = OutputFormat::Json;
        else fail("output.format", "must be 'csv' or 'json'");
    }

    // engine=analytic: normalized symmetric-stable closed forms only
    if (cfg.engine == Engine::Analytic || cfg.engine == Engine::Compare) {
        if (cfg.problem.kernel_plus)
            fail("problem.kernel_plus", "the analytic engine needs a symmetric-stable kernel");
        if (cfg.problem.kernel.type != "symmetric-stable")
            fail("problem.kernel.type", "the analytic engine needs a symmetric-stable kernel");
        if (!cfg.problem.gamma.empty() || !cfg.problem.alpha.empty())
            fail("problem.gamma", "the analytic engine needs gamma = alpha = 0");
        if (cfg.problem.lambda != 0.0)
            fail("problem.lambda", "the analytic engine covers lambda = 0 only");
    }
    return cfg;
}

/// Inverse of parse_config: parse_config(emit_config(c)) == c.
inline std::string emit_config(const RunConfig& cfg) {
    using nlohmann::json;
    json doc;
    json p;
    p["a"] = cfg.problem.a;
    p["b"] = cfg.problem.b;
    p["lambda"] = cfg.problem.lambda;
    p["u_a"] = cfg.problem.u_a;
    p["u_b"] = cfg.problem.u_b;
    if (!cfg.problem.g.empty()) p["g"] = cfg.problem.g;
    if (!cfg.problem.gamma.empty()) p["gamma"] = cfg.problem.gamma;
    if (!cfg.problem.alpha.empty()) p["alpha"] = cfg.problem.alpha;
    p["flavor"] = cfg.problem.flavor;
    if (cfg.problem.kernel_plus) {
        p["kernel_plus"] = config_detail::emit_kernel(*cfg.problem.kernel_plus);
        p["kernel_minus"] = config_detail::emit_kernel(*cfg.problem.kernel_minus);
    } else {
        p["kernel"] = config_detail::emit_kernel(cfg.problem.kernel);
    }
    doc["problem"] = std::move(p);
    switch (cfg.engine) {
        case Engine::Fd: doc["engine"] = "fd"; break;
        case Engine::Mc: doc["engine"] = "mc"; break;
        case Engine::Analytic: doc["engine"] = "analytic"; break;
        case Engine::OperatorEval: doc["engine"] = "operator-eval"; break;
        case Engine::Compare: doc["engine"] = "compare"; break;
        case Engine::Convergence: doc["engine"] = "convergence"; break;
    }
    doc["fd"] = {{"n_cells", cfg.fd.n_cells}};
    doc["mc"] = {{"paths", cfg.mc.paths}, {"eps", cfg.mc.eps},   {"dt", cfg.mc.dt},
                 {"tmax", cfg.mc.tmax},   {"seed", cfg.mc.seed}, {"threads", cfg.mc.threads}};
    if (!cfg.points.empty()) doc["points"] = cfg.points;
    doc["grids"] = cfg.grids;
    if (!cfg.f.empty()) doc["f"] = cfg.f;
    if (!cfg.output_path.empty() || cfg.output_format != OutputFormat::Csv) {
        json o;
        if (!cfg.output_path.empty()) o["path"] = cfg.output_path;
        o["format"] = cfg.output_format == OutputFormat::Csv ? "csv" : "json";
        doc["output"] = std::move(o);
    }
    return doc.dump(2);
}

namespace config_detail {

inline KernelSpec build_kernel(const KernelConfig& k) {
    if (k.type == "symmetric-stable")
        return KernelSpec::classical_stable(k.beta, 1.0 / (2.0 * std::cos(M_PI * k.beta / 2.0)));
    if (k.type == "classical-stable") return KernelSpec::classical_stable(k.beta, k.weight);
    if (k.type == "tempered-stable")
        return KernelSpec::tempered_stable(k.beta, k.tempering, k.weight);
    if (k.type == "variable-order") {
        Expression order(k.order);
        return KernelSpec::variable_order(order.as_function(), k.weight);
    }
    // "none": inactive side
    return KernelSpec::custom([](double, double) { return 0.0; },
                              [](double, double) { return 0.0; });
}

} // namespace config_detail

/// Materializes the problem block into solver inputs.
inline ProblemSpec build_problem(const ProblemConfig& pc) {
    ProblemSpec spec;
    spec.a = pc.a;
    spec.b = pc.b;
    spec.lambda = pc.lambda;
    spec.u_a = pc.u_a;
    spec.u_b = pc.u_b;
    if (!pc.g.empty()) spec.g = Expression(pc.g).as_function();
    if (!pc.gamma.empty()) spec.coeffs.gamma = Expression(pc.gamma).as_function();
    if (!pc.alpha.empty()) spec.coeffs.alpha = Expression(pc.alpha).as_function();
    spec.flavor = pc.flavor == "caputo" ? OperatorFlavor::Caputo : OperatorFlavor::RiemannLiouville;
    if (pc.kernel_plus) {
        spec.kernel.plus = config_detail::build_kernel(*pc.kernel_plus);
        spec.kernel.minus = config_detail::build_kernel(*pc.kernel_minus);
    } else {
        spec.kernel = TwoSidedKernel::symmetric(config_detail::build_kernel(pc.kernel));
    }
    spec.validate();
    return spec;
}

inline PathConfig build_path_config(const McParams& m, unsigned default_threads = 1) {
    PathConfig c;
    c.eps = m.eps;
    c.dt = m.dt;
    c.t_max = m.tmax;
    c.seed = m.seed;
    c.n_paths = m.paths;
    c.n_threads = m.threads == 0 ? default_threads : m.threads;
    return c;
}

/// Run manifest: every tunable decision value of a run, machine-readable.
inline std::string make_manifest(const RunConfig& cfg, unsigned threads_used) {
    using nlohmann::json;
    json m;
    m["tool_version"] = "1.0.0";
    m["engine"] = nlohmann::json::parse(emit_config(cfg))["engine"];
    m["mc"] = {{"seed", cfg.mc.seed},
               {"eps", cfg.mc.eps},
               {"dt", cfg.mc.dt},
               {"tmax", cfg.mc.tmax},
               {"paths", cfg.mc.paths},
               {"threads", threads_used}};
    m["fd"] = {{"n_cells", cfg.fd.n_cells},
               {"first_panel_split", "h/2"},
               {"quad_abs_tol", 1e-10}};
    m["grids"] = cfg.grids;
    m["config"] = json::parse(emit_config(cfg));
    return m.dump(2);
}

} // namespace tsfrac
