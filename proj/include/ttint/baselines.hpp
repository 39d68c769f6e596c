#pragma once

#include <cmath>
#include <vector>

#include "ttint/integrator.hpp"
#include "ttint/quadrature.hpp"
#include "ttint/tensor_train.hpp"

namespace ttint {

// Compensated accumulator; the dense oracle must out-precision the system
// under test.
class KahanSum {
public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

// Brute-force S_{X,W}(f): every grid point, fixed enumeration order,
// Kahan accumulation. Refuses grids beyond the cap.
inline double dense_weighted_sum(const Integrand& f, const ProductGrid& grid, std::size_t cap = 10000000) {
    f.validate();
    const TensorShape shape = grid.shape();
    if (f.dimension != shape.dims())
        throw std::invalid_argument("dense_weighted_sum: integrand dimension does not match grid");
    const std::size_t total = shape.element_count();
    if (total > cap)
        throw std::length_error("dense_weighted_sum: " + std::to_string(total) + " grid points exceed cap of " +
                                std::to_string(cap));

    const std::size_t d = shape.dims();
    const std::size_t chunk = 65536;
    KahanSum sum;
    MultiIndex idx(d, 0);
    std::vector<double> points(chunk * d);
    std::vector<double> values(chunk);
    std::vector<double> weights(chunk);
    std::size_t done = 0;
    while (done < total) {
        const std::size_t batch = std::min(chunk, total - done);
        for (std::size_t p = 0; p < batch; ++p) {
            double w = 1.0;
            for (std::size_t k = 0; k < d; ++k) {
                points[p * d + k] = grid.axis_nodes[k][static_cast<Eigen::Index>(idx[k])];
                w *= grid.axis_weights[k][static_cast<Eigen::Index>(idx[k])];
            }
            weights[p] = w;
            for (std::size_t k = 0; k < d; ++k) {
                if (++idx[k] < shape[k]) break;
                idx[k] = 0;
            }
        }
        f.evaluator(batch, points.data(), values.data());
        for (std::size_t p = 0; p < batch; ++p) {
            if (!std::isfinite(values[p]))
                throw std::runtime_error("dense_weighted_sum: integrand returned a non-finite value at " +
                                         detail::format_point(points.data() + p * d, d));
            sum.add(values[p] * weights[p]);
        }
        done += batch;
    }
    return sum.value();
}

struct MonteCarloSpec {
    std::size_t samples = 1000000;
    std::uint64_t seed = 0;
    std::vector<std::array<double, 2>> box;  // empty = unit cube
    bool zero_nonfinite = false;
};

struct MonteCarloResult {
    double estimate = 0.0;
    double standard_error = 0.0;
    std::size_t evaluations = 0;
    std::size_t nonfinite_zeroed = 0;
};

// Plain uniform sampling over the box; deliberately no importance sampling.
inline MonteCarloResult monte_carlo(const Integrand& f, const MonteCarloSpec& spec) {
    f.validate();
    if (spec.samples < 1) throw std::invalid_argument("monte_carlo: need at least one sample");
    const std::size_t d = f.dimension;
    std::vector<std::array<double, 2>> box = spec.box;
    if (box.empty()) box.assign(d, {0.0, 1.0});
    if (box.size() == 1 && d > 1) box.assign(d, box[0]);
    if (box.size() != d) throw std::invalid_argument("monte_carlo: box length does not match dimension");
    double volume = 1.0;
    for (const auto& iv : box) {
        if (!(iv[1] > iv[0])) throw std::invalid_argument("monte_carlo: degenerate box interval");
        volume *= iv[1] - iv[0];
    }

    Rng rng(spec.seed);
    const std::size_t chunk = 65536;
    std::vector<double> points(chunk * d);
    std::vector<double> values(chunk);
    KahanSum sum, sumsq;
    MonteCarloResult result;
    std::size_t done = 0;
    while (done < spec.samples) {
        const std::size_t batch = std::min(chunk, spec.samples - done);
        for (std::size_t p = 0; p < batch; ++p)
            for (std::size_t k = 0; k < d; ++k)
                points[p * d + k] = box[k][0] + (box[k][1] - box[k][0]) * rng.uniform01();
        f.evaluator(batch, points.data(), values.data());
        for (std::size_t p = 0; p < batch; ++p) {
            if (!std::isfinite(values[p])) {
                if (spec.zero_nonfinite) {
                    values[p] = 0.0;
                    ++result.nonfinite_zeroed;
                } else {
                    throw std::runtime_error("monte_carlo: integrand returned a non-finite value at " +
                                             detail::format_point(points.data() + p * d, d));
                }
            }
            sum.add(values[p]);
            sumsq.add(values[p] * values[p]);
        }
        done += batch;
    }

    const double n = static_cast<double>(spec.samples);
    const double mean = sum.value() / n;
    result.estimate = volume * mean;
    result.evaluations = spec.samples;
    if (spec.samples >= 2) {
        double var = (sumsq.value() - n * mean * mean) / (n - 1.0);
        if (var < 0.0) var = 0.0;
        result.standard_error = volume * std::sqrt(var / n);
    }
    return result;
}

struct ExactTT {
    TTTensor tt;
    BlackBoxTensor black_box;
};

// Random TT with i.i.d. standard normal cores plus a black-box view of it;
// the test generator for exact-recovery properties.
inline ExactTT random_exact_tt(const TensorShape& shape, const std::vector<std::size_t>& ranks, Rng& rng) {
    const std::size_t d = shape.dims();
    if (ranks.size() != d + 1)
        throw std::invalid_argument("random_exact_tt: rank chain must have length d+1");
    if (ranks.front() != 1 || ranks.back() != 1)
        throw std::invalid_argument("random_exact_tt: boundary ranks must equal 1");
    for (std::size_t k = 1; k < d; ++k) {
        std::size_t suffix = 1;
        bool huge = false;
        for (std::size_t m = k; m < d; ++m) {
            if (suffix > TensorShape::max_count() / shape[m]) huge = true;
            suffix = huge ? TensorShape::max_count() : suffix * shape[m];
        }
        if (ranks[k] == 0 || ranks[k] > std::min(ranks[k - 1] * shape[k - 1], suffix))
            throw std::invalid_argument("random_exact_tt: invalid rank r_" + std::to_string(k));
    }

    TTTensor tt{shape, {}};
    for (std::size_t k = 0; k < d; ++k) {
        TTCore core(ranks[k], shape[k], ranks[k + 1]);
        for (Eigen::Index q = 0; q < core.data.size(); ++q) core.data[q] = rng.normal();
        tt.cores.push_back(std::move(core));
    }

    auto tt_copy = std::make_shared<TTTensor>(tt);
    BlackBoxTensor view(shape, [tt_copy](const std::vector<MultiIndex>& batch, double* out) {
        for (std::size_t p = 0; p < batch.size(); ++p) out[p] = tt_element(*tt_copy, batch[p]);
    });
    return ExactTT{std::move(tt), std::move(view)};
}

}  // namespace ttint
