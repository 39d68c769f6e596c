#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <sstream>
#include <vector>

#include "ttint/quadrature.hpp"
#include "ttint/tt_cross.hpp"

namespace ttint {

// User integrand: a batch evaluator over d-dimensional points. The points
// buffer is row-major (count x d); the evaluator must write count values.
// Batches arrive sequentially, so the evaluator may parallelize internally.
struct Integrand {
    enum class SingularityHint { none, at_zero, at_one };

    std::size_t dimension = 0;
    std::function<void(std::size_t count, const double* points, double* result)> evaluator;
    std::vector<SingularityHint> hints;  // optional, one per axis

    void validate() const {
        if (dimension < 1) throw std::invalid_argument("integrand dimension must be at least 1");
        if (!evaluator) throw std::invalid_argument("integrand evaluator is empty");
        if (!hints.empty() && hints.size() != dimension)
            throw std::invalid_argument("integrand declares " + std::to_string(hints.size()) +
                                        " singularity hints for dimension " + std::to_string(dimension));
    }
};

struct IntegrationConfig {
    std::vector<std::size_t> nodes;            // per axis; single entry broadcasts
    std::vector<Substitution> substitutions;   // per axis; empty = identity, single entry broadcasts
    std::vector<std::array<double, 2>> box;    // per axis [a,b]; empty = unit cube
    BudgetPolicy policy;
    std::uint64_t seed = 0;
    // replace non-finite samples with 0 (and count them) instead of failing
    bool zero_nonfinite = false;

    std::vector<AxisSpec> axes(const Integrand& f) const {
        const std::size_t d = f.dimension;
        auto broadcast = [d](std::size_t have, const char* what) {
            if (have != 0 && have != 1 && have != d)
                throw std::invalid_argument(std::string("config: ") + what + " list length must be 1 or match dimension");
        };
        broadcast(nodes.size(), "nodes");
        broadcast(substitutions.size(), "substitution");
        broadcast(box.size(), "box");
        std::vector<AxisSpec> out(d);
        for (std::size_t k = 0; k < d; ++k) {
            AxisSpec& ax = out[k];
            if (!nodes.empty()) ax.nodes = nodes.size() == 1 ? nodes[0] : nodes[k];
            if (!substitutions.empty())
                ax.substitution = substitutions.size() == 1 ? substitutions[0] : substitutions[k];
            if (!box.empty()) {
                const auto& iv = box.size() == 1 ? box[0] : box[k];
                ax.a = iv[0];
                ax.b = iv[1];
            }
            if (!f.hints.empty() && f.hints[k] == Integrand::SingularityHint::at_one &&
                ax.substitution.kind != Substitution::Kind::identity)
                ax.substitution = ax.substitution.mirrored();
        }
        return out;
    }
};

struct IntegrationReport {
    double value = 0.0;
    std::size_t evaluations_used = 0;
    std::size_t passes = 0;
    std::vector<std::size_t> final_ranks;
    std::optional<double> convergence_estimate;
    double wall_time_s = 0.0;
    // diagnostics beyond the headline numbers
    std::optional<double> effective_tolerance;
    bool budget_exhausted = false;
    std::size_t nonfinite_zeroed = 0;
    std::vector<std::size_t> pass_evaluations;
};

inline std::vector<double> grid_point(const ProductGrid& grid, const MultiIndex& idx) {
    grid.shape().require_valid_index(idx);
    std::vector<double> point(grid.dims());
    for (std::size_t k = 0; k < grid.dims(); ++k)
        point[k] = grid.axis_nodes[k][static_cast<Eigen::Index>(idx[k])];
    return point;
}

namespace detail {

inline std::string format_point(const double* coords, std::size_t d) {
    std::ostringstream os;
    os.precision(17);
    os << "(";
    for (std::size_t k = 0; k < d; ++k) os << (k ? ", " : "") << coords[k];
    os << ")";
    return os.str();
}

}  // namespace detail

// Wraps the integrand as a black box over the product grid; non-finite
// samples either abort (default) or are zeroed and counted.
inline BlackBoxTensor grid_black_box(const Integrand& f, const ProductGrid& grid, bool zero_nonfinite,
                                     std::size_t* nonfinite_counter) {
    const std::size_t d = grid.dims();
    return BlackBoxTensor(
        grid.shape(), [&f, &grid, d, zero_nonfinite, nonfinite_counter](const std::vector<MultiIndex>& batch,
                                                                        double* out) {
            std::vector<double> points(batch.size() * d);
            for (std::size_t p = 0; p < batch.size(); ++p)
                for (std::size_t k = 0; k < d; ++k)
                    points[p * d + k] = grid.axis_nodes[k][static_cast<Eigen::Index>(batch[p][k])];
            f.evaluator(batch.size(), points.data(), out);
            for (std::size_t p = 0; p < batch.size(); ++p) {
                if (std::isfinite(out[p])) continue;
                if (zero_nonfinite) {
                    out[p] = 0.0;
                    if (nonfinite_counter) ++*nonfinite_counter;
                } else {
                    throw std::runtime_error("integrand returned a non-finite value at " +
                                             detail::format_point(points.data() + p * d, d));
                }
            }
        });
}

// S' = <A', W>: TT-cross the grid-sampled integrand, then contract against
// the rank-1 weight tensor.
inline IntegrationReport integrate(const Integrand& f, const IntegrationConfig& config) {
    f.validate();
    config.policy.validate();
    const auto t0 = std::chrono::steady_clock::now();

    ProductGrid grid = make_grid(config.axes(f));
    IntegrationReport report;
    BlackBoxTensor box = grid_black_box(f, grid, config.zero_nonfinite, &report.nonfinite_zeroed);

    Rng rng(config.seed);
    TTCrossResult cross = tt_cross(box, config.policy, rng);

    report.value = tt_contract_rank1(cross.tt, grid.axis_weights);
    report.evaluations_used = cross.diagnostics.evaluations_used;
    report.passes = cross.diagnostics.passes;
    report.final_ranks = cross.diagnostics.final_ranks;
    report.convergence_estimate = cross.diagnostics.convergence_estimate;
    report.effective_tolerance = cross.diagnostics.effective_tolerance;
    report.budget_exhausted = cross.diagnostics.budget_exhausted;
    report.pass_evaluations = cross.diagnostics.pass_evaluations;
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace ttint
