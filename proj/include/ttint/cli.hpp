#pragma once

#include <array>
#include <chrono>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ttint/baselines.hpp"
#include "ttint/expression.hpp"
#include "ttint/integrator.hpp"

namespace ttint {

// exit codes of the command-line front end
enum ExitCode : int {
    exit_ok = 0,
    exit_parse_error = 2,
    exit_config_error = 3,
    exit_numerical_error = 4,
    exit_budget_unreachable = 5,
};

struct RunSpec {
    std::string method = "tt";       // tt | dense | mc
    std::size_t dim = 0;
    std::string expr;
    std::string box_text;            // "a1,b1;a2,b2;..." (empty = unit cube)
    std::string nodes_text = "13";   // int or comma-separated per-axis list
    std::string quadrature = "gauss-legendre";
    std::string transform_text = "none";  // global spec or per-axis "k=spec;..."
    std::size_t max_evals = 1000000;
    double tol_test = 0.01;
    std::size_t max_rank = 64;
    std::size_t max_passes = 10;
    std::uint64_t seed = 0;
    std::size_t samples = 1000000;   // mc only
    std::string format = "text";     // text | json
};

namespace cli_detail {

inline std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

inline double parse_double(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(what);
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse " + what + " from '" + text + "'");
    }
}

inline std::size_t parse_count(const std::string& text, const std::string& what) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size() || v < 0) throw std::invalid_argument(what);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse " + what + " from '" + text + "'");
    }
}

}  // namespace cli_detail

inline std::vector<std::array<double, 2>> parse_box(const std::string& text) {
    std::vector<std::array<double, 2>> box;
    if (text.empty()) return box;
    for (const std::string& part : cli_detail::split(text, ';')) {
        auto ab = cli_detail::split(part, ',');
        if (ab.size() != 2) throw std::invalid_argument("box axis '" + part + "' must be 'a,b'");
        box.push_back({cli_detail::parse_double(ab[0], "box bound"), cli_detail::parse_double(ab[1], "box bound")});
    }
    return box;
}

inline std::vector<std::size_t> parse_nodes(const std::string& text) {
    std::vector<std::size_t> nodes;
    for (const std::string& part : cli_detail::split(text, ',')) {
        std::size_t n = cli_detail::parse_count(part, "node count");
        if (n == 0) throw std::invalid_argument("node count must be positive");
        nodes.push_back(n);
    }
    return nodes;
}

inline Substitution parse_substitution(const std::string& text) {
    if (text == "none" || text == "identity") return Substitution::identity();
    if (text == "tanh-sinh") return Substitution::tanh_sinh();
    if (text == "erf") return Substitution::erf();
    if (text.rfind("power:", 0) == 0)
        return Substitution::power(cli_detail::parse_double(text.substr(6), "power exponent"));
    throw std::invalid_argument("unknown transform '" + text + "' (expected none|power:<p>|tanh-sinh|erf)");
}

// global spec, or per-axis list "1=power:3;3=erf" with 1-based axis numbers;
// unlisted axes stay untransformed
inline std::vector<Substitution> parse_transforms(const std::string& text, std::size_t dim) {
    if (text.find('=') == std::string::npos) return {parse_substitution(text)};
    std::vector<Substitution> subs(dim, Substitution::identity());
    for (const std::string& part : cli_detail::split(text, ';')) {
        auto kv = cli_detail::split(part, '=');
        if (kv.size() != 2) throw std::invalid_argument("per-axis transform '" + part + "' must be 'k=spec'");
        std::size_t axis = cli_detail::parse_count(kv[0], "transform axis");
        if (axis < 1 || axis > dim)
            throw std::invalid_argument("transform axis " + kv[0] + " outside 1.." + std::to_string(dim));
        subs[axis - 1] = parse_substitution(kv[1]);
    }
    return subs;
}

struct RunReport {
    nlohmann::json json;
    std::string text;
};

namespace cli_detail {

inline nlohmann::json config_json(const RunSpec& spec) {
    nlohmann::json c;
    c["dim"] = spec.dim;
    c["expr"] = spec.expr;
    c["box"] = spec.box_text;
    c["nodes"] = spec.nodes_text;
    c["quadrature"] = spec.quadrature;
    c["transform"] = spec.transform_text;
    c["max_evals"] = spec.max_evals;
    c["tol_test"] = spec.tol_test;
    c["max_rank"] = spec.max_rank;
    c["max_passes"] = spec.max_passes;
    c["samples"] = spec.samples;
    return c;
}

inline void emit(const RunSpec& spec, const nlohmann::json& report, std::ostream& out) {
    if (spec.format == "json") {
        out << report.dump() << "\n";
        return;
    }
    out.precision(17);
    out << "method: " << report["method"].get<std::string>() << "\n";
    out << "value: " << report["value"].get<double>() << "\n";
    out << "evaluations: " << report["evaluations"].get<std::size_t>() << "\n";
    out << "wall_time_s: " << report["wall_time_s"].get<double>() << "\n";
    if (!report["ranks"].is_null()) {
        out << "ranks:";
        for (const auto& r : report["ranks"]) out << " " << r.get<std::size_t>();
        out << "\n";
    }
    if (!report["passes"].is_null()) out << "passes: " << report["passes"].get<std::size_t>() << "\n";
    if (!report["convergence_estimate"].is_null())
        out << "convergence_estimate: " << report["convergence_estimate"].get<double>() << "\n";
    if (report.contains("standard_error"))
        out << "standard_error: " << report["standard_error"].get<double>() << "\n";
    out << "seed: " << report["seed"].get<std::uint64_t>() << "\n";
}

}  // namespace cli_detail

// Parse, configure, dispatch, report. Returns a process exit code; the
// report goes to `out`, diagnostics to `err`.
inline int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
    Expression expr;
    try {
        if (spec.dim < 1) throw std::invalid_argument("--dim must be at least 1");
        if (spec.method != "tt" && spec.method != "dense" && spec.method != "mc")
            throw std::invalid_argument("unknown method '" + spec.method + "'");
        if (spec.format != "text" && spec.format != "json")
            throw std::invalid_argument("unknown format '" + spec.format + "'");
        if (spec.quadrature != "gauss-legendre")
            throw std::invalid_argument("unknown quadrature '" + spec.quadrature + "' (only gauss-legendre)");
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config_error;
    }

    try {
        expr = parse_expression(spec.expr);
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << "\n";
        return exit_parse_error;
    }

    Integrand f;
    nlohmann::json report;
    try {
        if (expr.max_variable > spec.dim)
            throw std::invalid_argument("expression references x" + std::to_string(expr.max_variable) +
                                        " beyond --dim " + std::to_string(spec.dim));
        f.dimension = spec.dim;
        f.evaluator = [&expr, d = spec.dim](std::size_t count, const double* points, double* out_vals) {
            expr.eval_batch(count, points, d, out_vals);
        };

        std::vector<std::array<double, 2>> box = parse_box(spec.box_text);
        if (!box.empty() && box.size() != 1 && box.size() != spec.dim)
            throw std::invalid_argument("box lists " + std::to_string(box.size()) + " axes for --dim " +
                                        std::to_string(spec.dim));
        std::vector<std::size_t> nodes = parse_nodes(spec.nodes_text);
        if (nodes.size() != 1 && nodes.size() != spec.dim)
            throw std::invalid_argument("nodes lists " + std::to_string(nodes.size()) + " axes for --dim " +
                                        std::to_string(spec.dim));
        std::vector<Substitution> subs = parse_transforms(spec.transform_text, spec.dim);

        report["method"] = spec.method;
        report["seed"] = spec.seed;
        report["config"] = cli_detail::config_json(spec);
        report["ranks"] = nullptr;
        report["passes"] = nullptr;
        report["convergence_estimate"] = nullptr;

        if (spec.method == "tt") {
            IntegrationConfig config;
            config.nodes = nodes;
            config.substitutions = subs;
            config.box = box;
            config.seed = spec.seed;
            config.policy.N_lim = spec.max_evals;
            config.policy.eps_test = spec.tol_test;
            config.policy.max_rank = spec.max_rank;
            config.policy.max_passes = spec.max_passes;

            IntegrationReport r = integrate(f, config);
            report["value"] = r.value;
            report["evaluations"] = r.evaluations_used;
            report["wall_time_s"] = r.wall_time_s;
            report["ranks"] = r.final_ranks;
            report["passes"] = r.passes;
            if (r.convergence_estimate)
                report["convergence_estimate"] = *r.convergence_estimate;
            cli_detail::emit(spec, report, out);
            if (r.budget_exhausted && !r.effective_tolerance) {
                err << "budget unreachable: --max-evals " << spec.max_evals
                    << " does not exceed the test sweep cost of " << r.evaluations_used << " evaluations\n";
                return exit_budget_unreachable;
            }
            return exit_ok;
        }

        if (spec.method == "dense") {
            IntegrationConfig config;
            config.nodes = nodes;
            config.substitutions = subs;
            config.box = box;
            const auto t0 = std::chrono::steady_clock::now();
            ProductGrid grid = make_grid(config.axes(f));
            double value = dense_weighted_sum(f, grid);
            report["value"] = value;
            report["evaluations"] = grid.shape().element_count();
            report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            cli_detail::emit(spec, report, out);
            return exit_ok;
        }

        // mc
        MonteCarloSpec mc;
        mc.samples = spec.samples;
        mc.seed = spec.seed;
        mc.box = box;
        const auto t0 = std::chrono::steady_clock::now();
        MonteCarloResult r = monte_carlo(f, mc);
        report["value"] = r.estimate;
        report["standard_error"] = r.standard_error;
        report["evaluations"] = r.evaluations;
        report["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        cli_detail::emit(spec, report, out);
        return exit_ok;
    } catch (const std::runtime_error& e) {
        err << "numerical error: " << e.what() << "\n";
        return exit_numerical_error;
    } catch (const std::exception& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config_error;
    }
}

// The model-example accuracy sweep: ln(x1...xd) with power-3 axes, 13-node
// Gauss-Legendre, TT under the evaluation budget vs plain Monte Carlo at the
// same budget. Emits CSV.
inline int sweep_model_example(std::size_t d_min, std::size_t d_max, std::size_t budget, std::uint64_t seed,
                               std::ostream& out, std::ostream& err) {
    if (d_min < 1 || d_min > d_max || d_max > 12) {
        err << "config error: sweep range must satisfy 1 <= d_min <= d_max <= 12\n";
        return exit_config_error;
    }
    out << "d,tt_rel_err,mc_rel_err,tt_evals,mc_evals\n";
    for (std::size_t d = d_min; d <= d_max; ++d) {
        std::string text = "ln(x1";
        for (std::size_t k = 2; k <= d; ++k) text += "*x" + std::to_string(k);
        text += ")";
        Expression expr = parse_expression(text);

        Integrand f;
        f.dimension = d;
        f.evaluator = [&expr, d](std::size_t count, const double* points, double* vals) {
            expr.eval_batch(count, points, d, vals);
        };

        IntegrationConfig config;
        config.nodes = {13};
        config.substitutions = {Substitution::power(3.0)};
        config.seed = seed;
        config.policy.N_lim = budget;

        const double exact = -static_cast<double>(d);
        double tt_rel, mc_rel;
        std::size_t tt_evals, mc_evals;
        try {
            IntegrationReport r = integrate(f, config);
            tt_rel = std::abs(r.value - exact) / std::abs(exact);
            tt_evals = r.evaluations_used;

            MonteCarloSpec mc;
            mc.samples = budget;
            mc.seed = seed;
            MonteCarloResult m = monte_carlo(f, mc);
            mc_rel = std::abs(m.estimate - exact) / std::abs(exact);
            mc_evals = m.evaluations;
        } catch (const std::runtime_error& e) {
            err << "numerical error at d=" << d << ": " << e.what() << "\n";
            return exit_numerical_error;
        }

        std::ostringstream row;
        row << d << "," << std::scientific << std::setprecision(6) << tt_rel << "," << mc_rel << ","
            << tt_evals << "," << mc_evals;
        out << row.str() << "\n";
    }
    return exit_ok;
}

}  // namespace ttint
