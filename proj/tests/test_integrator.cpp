#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "helpers.hpp"
#include "ttint/baselines.hpp"
#include "ttint/integrator.hpp"

using namespace ttint;

namespace {

Integrand from_pointwise(std::size_t d, std::function<double(const double*)> f) {
    Integrand g;
    g.dimension = d;
    g.evaluator = [d, f = std::move(f)](std::size_t count, const double* points, double* result) {
        for (std::size_t p = 0; p < count; ++p) result[p] = f(points + p * d);
    };
    return g;
}

}  // namespace

TEST_CASE("constants integrate to the box volume", "[integrator]") {
    for (std::size_t d : {1, 2, 3, 4}) {
        Integrand c = from_pointwise(d, [](const double*) { return 2.5; });
        IntegrationConfig config;
        config.nodes = {4};
        config.seed = 9;
        IntegrationReport rep = integrate(c, config);
        INFO("d=" << d);
        REQUIRE_THAT(rep.value, Catch::Matchers::WithinRel(2.5, 1e-12));
        REQUIRE(rep.final_ranks.front() == 1);
        REQUIRE(rep.final_ranks.back() == 1);
    }

    Integrand c3 = from_pointwise(3, [](const double*) { return 2.5; });
    IntegrationConfig config;
    config.nodes = {3};
    config.box = {{0.0, 2.0}, {1.0, 3.0}, {0.0, 1.0}};
    IntegrationReport rep = integrate(c3, config);
    REQUIRE_THAT(rep.value, Catch::Matchers::WithinRel(10.0, 1e-12));
}

TEST_CASE("a cubic times quadratic monomial integrates exactly at two nodes", "[integrator]") {
    Integrand f = from_pointwise(2, [](const double* x) { return x[0] * x[0] * x[0] * x[1] * x[1]; });
    IntegrationConfig config;
    config.nodes = {2};
    IntegrationReport rep = integrate(f, config);
    REQUIRE_THAT(rep.value, Catch::Matchers::WithinAbs(1.0 / 12.0, 1e-13));
}

TEST_CASE("the log-product integrand reaches its analytic value", "[integrator]") {
    Integrand f = from_pointwise(2, [](const double* x) { return std::log(x[0] * x[1]); });
    IntegrationConfig config;
    config.nodes = {13};
    config.substitutions = {Substitution::power(3.0)};
    config.policy.N_lim = 1000000;
    IntegrationReport rep = integrate(f, config);
    REQUIRE_THAT(rep.value, Catch::Matchers::WithinRel(-2.0, 1e-5));
    REQUIRE_FALSE(rep.budget_exhausted);
}

TEST_CASE("one-dimensional integration uses the dense axis directly", "[integrator]") {
    Integrand f = from_pointwise(1, [](const double* x) { return std::log(x[0]); });
    IntegrationConfig config;
    config.nodes = {16};
    config.substitutions = {Substitution::power(3.0)};
    IntegrationReport rep = integrate(f, config);
    REQUIRE(std::abs(rep.value + 1.0) <= 2e-7);
    REQUIRE(rep.passes == 1);
    REQUIRE(rep.evaluations_used == 16);
}

TEST_CASE("grid_point reads nodes off the axis lists", "[integrator]") {
    ProductGrid g1 = make_grid({AxisSpec{1}});
    REQUIRE_THAT(grid_point(g1, {0})[0], Catch::Matchers::WithinAbs(0.5, 1e-15));

    ProductGrid g2 = make_grid({AxisSpec{2}, AxisSpec{2}});
    auto p = grid_point(g2, {0, 0});
    REQUIRE_THAT(p[0], Catch::Matchers::WithinAbs(0.21132487, 1e-8));
    REQUIRE_THAT(p[1], Catch::Matchers::WithinAbs(0.21132487, 1e-8));

    REQUIRE_THROWS_AS(grid_point(g2, {2, 0}), std::out_of_range);
    REQUIRE_THROWS_AS(grid_point(g2, {0}), std::invalid_argument);
}

TEST_CASE("TT integration matches the dense sum on small smooth problems", "[integrator]") {
    Integrand f = from_pointwise(3, [](const double* x) {
        return std::exp(-x[0] - 2.0 * x[1] - x[2]) * (1.0 + x[0] * x[1]);
    });
    IntegrationConfig config;
    config.nodes = {6};
    config.policy.N_lim = 10000000;
    config.policy.max_rank = 6;
    config.seed = 31;
    IntegrationReport rep = integrate(f, config);

    ProductGrid grid = make_grid(config.axes(f));
    double dense = dense_weighted_sum(f, grid);
    double tol = std::max(1e-10, 10.0 * rep.effective_tolerance.value_or(0.0));
    REQUIRE_THAT(rep.value, Catch::Matchers::WithinRel(dense, tol));
}

TEST_CASE("the evaluation budget is soft by at most one sweep", "[integrator]") {
    Integrand f = from_pointwise(4, [](const double* x) {
        return 1.0 / (1.0 + x[0] + x[1] + x[2] + x[3]);
    });
    IntegrationConfig config;
    config.nodes = {8};
    config.policy.N_lim = 500;
    config.policy.max_rank = 8;
    config.seed = 3;
    IntegrationReport rep = integrate(f, config);

    std::size_t max_sweep = 0;
    for (std::size_t pe : rep.pass_evaluations) max_sweep = std::max(max_sweep, pe);
    REQUIRE(rep.evaluations_used <= config.policy.N_lim + max_sweep);

    std::size_t sum = 0;
    for (std::size_t pe : rep.pass_evaluations) sum += pe;
    REQUIRE(sum == rep.evaluations_used);
}

TEST_CASE("identical seeds reproduce the report bit for bit", "[integrator]") {
    auto run = [] {
        Integrand f = from_pointwise(3, [](const double* x) {
            return std::cos(3.0 * x[0]) + x[1] * std::exp(x[2]);
        });
        IntegrationConfig config;
        config.nodes = {7};
        config.seed = 12345;
        config.policy.N_lim = 20000;
        return integrate(f, config);
    };
    IntegrationReport a = run(), b = run();
    REQUIRE(a.value == b.value);
    REQUIRE(a.evaluations_used == b.evaluations_used);
    REQUIRE(a.passes == b.passes);
    REQUIRE(a.final_ranks == b.final_ranks);
    REQUIRE(a.convergence_estimate == b.convergence_estimate);
    REQUIRE(a.pass_evaluations == b.pass_evaluations);
    REQUIRE(a.effective_tolerance == b.effective_tolerance);
}

TEST_CASE("integration is linear on the full-rank path", "[integrator]") {
    auto make_config = [] {
        IntegrationConfig config;
        config.nodes = {5};
        config.policy.max_rank = 5;
        config.policy.fixed_tolerance = 1e-12;
        config.seed = 8;
        return config;
    };
    Integrand f = from_pointwise(2, [](const double* x) { return std::exp(x[0] + x[1]); });
    Integrand g = from_pointwise(2, [](const double* x) { return 1.0 / (1.0 + x[0] + x[1]); });
    Integrand combo = from_pointwise(2, [](const double* x) {
        return 2.5 * std::exp(x[0] + x[1]) - 1.25 / (1.0 + x[0] + x[1]);
    });
    double fi = integrate(f, make_config()).value;
    double gi = integrate(g, make_config()).value;
    double ci = integrate(combo, make_config()).value;
    REQUIRE_THAT(ci, Catch::Matchers::WithinRel(2.5 * fi - 1.25 * gi, 1e-9));
}

TEST_CASE("non-finite samples abort by default and are zeroable by choice", "[integrator]") {
    Integrand f = from_pointwise(2, [](const double* x) {
        return x[0] < 0.3 ? std::numeric_limits<double>::quiet_NaN() : 1.0;
    });
    IntegrationConfig config;
    config.nodes = {5};
    REQUIRE_THROWS_WITH(integrate(f, config), Catch::Matchers::ContainsSubstring("non-finite") &&
                                                  Catch::Matchers::ContainsSubstring("("));

    config.zero_nonfinite = true;
    IntegrationReport rep = integrate(f, config);
    REQUIRE(rep.nonfinite_zeroed > 0);
    REQUIRE(std::isfinite(rep.value));
}

TEST_CASE("a singularity hint at one mirrors the substitution", "[integrator]") {
    Integrand f = from_pointwise(1, [](const double* x) { return std::log(1.0 - x[0]); });
    f.hints = {Integrand::SingularityHint::at_one};
    IntegrationConfig config;
    config.nodes = {16};
    config.substitutions = {Substitution::power(3.0)};
    IntegrationReport rep = integrate(f, config);
    REQUIRE(std::abs(rep.value + 1.0) <= 2e-7);
}

TEST_CASE("configuration lists broadcast or match the dimension", "[integrator]") {
    Integrand f = from_pointwise(3, [](const double*) { return 1.0; });

    IntegrationConfig per_axis;
    per_axis.nodes = {2, 3, 4};
    per_axis.box = {{0.0, 1.0}, {0.0, 2.0}, {0.0, 1.0}};
    IntegrationReport rep = integrate(f, per_axis);
    REQUIRE_THAT(rep.value, Catch::Matchers::WithinRel(2.0, 1e-12));

    IntegrationConfig bad;
    bad.nodes = {2, 3};
    REQUIRE_THROWS_AS(integrate(f, bad), std::invalid_argument);

    Integrand no_eval;
    no_eval.dimension = 2;
    REQUIRE_THROWS_AS(integrate(no_eval, IntegrationConfig{}), std::invalid_argument);

    Integrand wrong_hints = from_pointwise(2, [](const double*) { return 1.0; });
    wrong_hints.hints = {Integrand::SingularityHint::none};
    REQUIRE_THROWS_AS(integrate(wrong_hints, IntegrationConfig{}), std::invalid_argument);
}

TEST_CASE("reports carry timing and diagnostics", "[integrator]") {
    Integrand f = from_pointwise(2, [](const double* x) { return x[0] + x[1]; });
    IntegrationConfig config;
    config.nodes = {4};
    IntegrationReport rep = integrate(f, config);
    REQUIRE(rep.wall_time_s >= 0.0);
    REQUIRE(rep.passes >= 1);
    REQUIRE(rep.final_ranks.size() == 3);
    REQUIRE(rep.evaluations_used > 0);
}
