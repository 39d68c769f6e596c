#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "ttint/common.hpp"

namespace ttint {

// A 1-dimensional rule on [0,1]: strictly increasing nodes in (0,1) and
// nonnegative weights. Untransformed rules sum to 1; substitution-transformed
// ones only approximately (they carry the Jacobian g').
struct QuadratureRule1D {
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
    std::size_t clamped_count = 0;  // nodes pushed back into (0,1) after a transform saturated

    std::size_t size() const { return static_cast<std::size_t>(nodes.size()); }

    double apply(const std::function<double(double)>& f) const {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
        return sum;
    }
};

// Gauss-Legendre on [0,1]. Nodes found by Newton iteration on P_n with the
// usual cosine initial guesses; the rule is symmetric by construction.
inline QuadratureRule1D gauss_legendre(std::size_t n) {
    if (n < 1 || n > 512)
        throw std::out_of_range("gauss_legendre: node count " + std::to_string(n) + " outside [1, 512]");
    const double pi = 3.14159265358979323846;
    QuadratureRule1D rule;
    rule.nodes.resize(static_cast<Eigen::Index>(n));
    rule.weights.resize(static_cast<Eigen::Index>(n));
    const std::size_t half = (n + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double z = std::cos(pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            // Legendre recurrence: p1 = P_n(z), p2 = P_{n-1}(z)
            double p1 = 1.0, p2 = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double delta = p1 / pp;
            z -= delta;
            if (std::abs(delta) <= 1e-15) break;
        }
        double w = 2.0 / ((1.0 - z * z) * pp * pp);
        // map [-1,1] -> [0,1]; fill symmetrically from both ends
        rule.nodes[static_cast<Eigen::Index>(i)] = 0.5 * (1.0 - z);
        rule.nodes[static_cast<Eigen::Index>(n - 1 - i)] = 0.5 * (1.0 + z);
        rule.weights[static_cast<Eigen::Index>(i)] = 0.5 * w;
        rule.weights[static_cast<Eigen::Index>(n - 1 - i)] = 0.5 * w;
    }
    return rule;
}

// Monotone reparameterization x = g(t) of (0,1) that regularizes an endpoint
// singularity; equivalently maps a rule's nodes through g and multiplies its
// weights by g'. The parameter t is itself an affine image of the base
// rule's [0,1] nodes, so map() and weight_factor() take u in [0,1] directly.
struct Substitution {
    enum class Kind { identity, power, tanh_sinh, erf };

    Kind kind = Kind::identity;
    double p = 3.0;         // power exponent, > 1
    bool mirror = false;    // x -> 1-x, for singularities at 1

    static Substitution identity() { return {}; }
    static Substitution power(double exponent) {
        if (!(exponent > 1.0)) throw std::invalid_argument("power substitution requires p > 1");
        return {Kind::power, exponent, false};
    }
    static Substitution tanh_sinh() { return {Kind::tanh_sinh, 0.0, false}; }
    static Substitution erf() { return {Kind::erf, 0.0, false}; }

    Substitution mirrored() const {
        Substitution s = *this;
        s.mirror = true;
        return s;
    }

    // truncation intervals: chosen so g' underflows relative to 1e-17 at the ends
    static constexpr double tanh_sinh_T = 3.2;
    static constexpr double erf_T = 4.0;

    double map(double u) const {
        double x;
        switch (kind) {
            case Kind::identity:
                x = u;
                break;
            case Kind::power:
                x = std::pow(u, p);
                break;
            case Kind::tanh_sinh: {
                double t = -tanh_sinh_T + 2.0 * tanh_sinh_T * u;
                x = 0.5 * (1.0 + std::tanh(1.57079632679489661923 * std::sinh(t)));
                break;
            }
            case Kind::erf: {
                double t = erf_T * (1.0 - 2.0 * u);
                x = 0.5 * (1.0 - std::erf(t));
                break;
            }
        }
        return mirror ? 1.0 - x : x;
    }

    double weight_factor(double u) const {
        switch (kind) {
            case Kind::identity:
                return 1.0;
            case Kind::power:
                return p * std::pow(u, p - 1.0);
            case Kind::tanh_sinh: {
                double t = -tanh_sinh_T + 2.0 * tanh_sinh_T * u;
                double s = 1.57079632679489661923 * std::sinh(t);
                double sech = 1.0 / std::cosh(s);
                return 2.0 * tanh_sinh_T * 0.5 * 1.57079632679489661923 * std::cosh(t) * sech * sech;
            }
            case Kind::erf: {
                double t = erf_T * (1.0 - 2.0 * u);
                return 2.0 * erf_T * std::exp(-t * t) / std::sqrt(3.14159265358979323846);
            }
        }
        return 1.0;
    }
};

// Nodes g(t_i), weights w_i * g'(t_i). Saturated nodes are clamped back into
// (0,1) and de-tied so the node sequence stays strictly increasing.
inline QuadratureRule1D transform_rule(const QuadratureRule1D& rule, const Substitution& sub) {
    QuadratureRule1D out;
    const auto n = rule.nodes.size();
    out.nodes.resize(n);
    out.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        // a mirrored map reverses orientation; flip the order back
        Eigen::Index slot = sub.mirror ? n - 1 - i : i;
        out.nodes[slot] = sub.map(rule.nodes[i]);
        out.weights[slot] = rule.weights[i] * sub.weight_factor(rule.nodes[i]);
    }
    const double lo = std::numeric_limits<double>::epsilon();
    const double hi = 1.0 - std::numeric_limits<double>::epsilon() / 2.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        double x = out.nodes[i];
        if (x < lo || x > hi) {
            out.nodes[i] = std::min(std::max(x, lo), hi);
            ++out.clamped_count;
        }
    }
    // de-tie upward, then walk back under the upper cap; the affected nodes
    // carry underflowed weights so moving them by ulps is harmless
    for (Eigen::Index i = 1; i < n; ++i)
        if (out.nodes[i] <= out.nodes[i - 1])
            out.nodes[i] = std::nextafter(out.nodes[i - 1], 2.0);
    if (out.nodes[n - 1] > hi) out.nodes[n - 1] = hi;
    for (Eigen::Index i = n - 2; i >= 0; --i)
        if (out.nodes[i] >= out.nodes[i + 1])
            out.nodes[i] = std::nextafter(out.nodes[i + 1], 0.0);
    return out;
}

// Debug dump: {"nodes":[...],"weights":[...],"clamped_count":N} with full
// 17-significant-digit doubles so the rule round-trips exactly.
inline std::string rule_to_json(const QuadratureRule1D& rule) {
    auto append_array = [](std::string& out, const Eigen::VectorXd& v) {
        out += '[';
        char buf[40];
        for (Eigen::Index i = 0; i < v.size(); ++i) {
            if (i > 0) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", v[i]);
            out += buf;
        }
        out += ']';
    };
    std::string out = "{\"nodes\":";
    append_array(out, rule.nodes);
    out += ",\"weights\":";
    append_array(out, rule.weights);
    out += ",\"clamped_count\":" + std::to_string(rule.clamped_count) + "}";
    return out;
}

struct AxisSpec {
    std::size_t nodes = 13;
    Substitution substitution = Substitution::identity();
    double a = 0.0;
    double b = 1.0;
};

// Product grid over a box: per-axis rules with the interval scale folded into
// nodes and weights, so the weight tensor W stays exactly rank-1.
struct ProductGrid {
    std::vector<QuadratureRule1D> rules;       // on [0,1], post-substitution
    std::vector<Eigen::VectorXd> axis_nodes;   // scaled to [a_k, b_k]
    std::vector<Eigen::VectorXd> axis_weights; // scaled by (b_k - a_k)

    std::size_t dims() const { return rules.size(); }

    TensorShape shape() const {
        std::vector<std::size_t> sizes;
        sizes.reserve(rules.size());
        for (const auto& r : rules) sizes.push_back(r.size());
        return TensorShape(sizes);
    }
};

inline ProductGrid make_grid(const std::vector<AxisSpec>& axes) {
    if (axes.empty()) throw std::invalid_argument("make_grid: need at least one axis");
    ProductGrid grid;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        const AxisSpec& ax = axes[k];
        if (!(ax.b > ax.a))
            throw std::invalid_argument("make_grid: degenerate interval on axis " + std::to_string(k));
        QuadratureRule1D rule = transform_rule(gauss_legendre(ax.nodes), ax.substitution);
        const double scale = ax.b - ax.a;
        Eigen::VectorXd nodes = (rule.nodes.array() * scale + ax.a).matrix();
        Eigen::VectorXd weights = rule.weights * scale;
        grid.rules.push_back(std::move(rule));
        grid.axis_nodes.push_back(std::move(nodes));
        grid.axis_weights.push_back(std::move(weights));
    }
    return grid;
}

}  // namespace ttint
