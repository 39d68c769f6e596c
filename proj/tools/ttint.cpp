#include <CLI11.hpp>
#include <iostream>

#include "ttint/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"TT integrator: tensor-train cross approximation of grid-sampled integrands"};
    app.require_subcommand(0, 1);

    ttint::RunSpec spec;
    app.add_option("--method", spec.method, "tt | dense | mc")->capture_default_str();
    app.add_option("--dim", spec.dim, "number of variables");
    app.add_option("--expr", spec.expr, "integrand over x1..xd, e.g. \"ln(x1*x2)\"");
    app.add_option("--box", spec.box_text, "per-axis intervals \"a1,b1;a2,b2;...\" (default unit cube)");
    app.add_option("--nodes", spec.nodes_text, "nodes per axis, int or comma list")->capture_default_str();
    app.add_option("--quadrature", spec.quadrature, "quadrature family")->capture_default_str();
    app.add_option("--transform", spec.transform_text,
                   "none|power:<p>|tanh-sinh|erf, global or per-axis \"k=spec;...\"")
        ->capture_default_str();
    app.add_option("--max-evals", spec.max_evals, "soft limit on integrand evaluations")->capture_default_str();
    app.add_option("--tol-test", spec.tol_test, "test-pass tolerance")->capture_default_str();
    app.add_option("--max-rank", spec.max_rank, "TT rank cap")->capture_default_str();
    app.add_option("--max-passes", spec.max_passes, "sweep cap")->capture_default_str();
    app.add_option("--seed", spec.seed, "rng seed")->capture_default_str();
    app.add_option("--samples", spec.samples, "Monte Carlo sample count")->capture_default_str();
    app.add_option("--format", spec.format, "text | json")->capture_default_str();

    CLI::App* sweep = app.add_subcommand("sweep", "model-example accuracy sweep (CSV to stdout)");
    std::size_t d_min = 2, d_max = 8, sweep_budget = 1000000;
    std::uint64_t sweep_seed = 0;
    sweep->add_option("--d-min", d_min, "first dimension")->capture_default_str();
    sweep->add_option("--d-max", d_max, "last dimension")->capture_default_str();
    sweep->add_option("--max-evals", sweep_budget, "per-method evaluation budget")->capture_default_str();
    sweep->add_option("--seed", sweep_seed, "rng seed")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return ttint::exit_config_error;
    }

    if (sweep->parsed())
        return ttint::sweep_model_example(d_min, d_max, sweep_budget, sweep_seed, std::cout, std::cerr);

    if (spec.expr.empty()) {
        std::cerr << "config error: --expr is required\n";
        return ttint::exit_config_error;
    }
    return ttint::run(spec, std::cout, std::cerr);
}
