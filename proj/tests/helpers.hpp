#pragma once

#include <cmath>
#include <vector>

#include "ttint/common.hpp"
#include "ttint/tensor_train.hpp"

namespace test_helpers {

// naive TT element evaluation with explicit rank summation, independent of
// the library's Eigen-based matrix products
inline double naive_tt_element(const ttint::TTTensor& tt, const ttint::MultiIndex& idx) {
    std::vector<double> left{1.0};
    for (std::size_t k = 0; k < tt.cores.size(); ++k) {
        const ttint::TTCore& c = tt.cores[k];
        std::vector<double> next(c.r_right, 0.0);
        for (std::size_t b = 0; b < c.r_right; ++b)
            for (std::size_t a = 0; a < c.r_left; ++a) next[b] += left[a] * c.at(a, idx[k], b);
        left = std::move(next);
    }
    return left[0];
}

// every multi-index of a shape, first mode fastest
inline std::vector<ttint::MultiIndex> all_indices(const ttint::TensorShape& shape) {
    std::vector<ttint::MultiIndex> out;
    out.reserve(shape.element_count());
    ttint::MultiIndex idx(shape.dims(), 0);
    for (std::size_t q = 0; q < shape.element_count(); ++q) {
        out.push_back(idx);
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (++idx[k] < shape[k]) break;
            idx[k] = 0;
        }
    }
    return out;
}

inline std::vector<double> naive_dense(const ttint::TTTensor& tt) {
    std::vector<double> out;
    for (const auto& idx : all_indices(tt.shape)) out.push_back(naive_tt_element(tt, idx));
    return out;
}

// random TT with the given rank chain, entries uniform in [-1, 1]
inline ttint::TTTensor random_tt(const ttint::TensorShape& shape, const std::vector<std::size_t>& ranks,
                                 ttint::Rng& rng) {
    ttint::TTTensor tt{shape, {}};
    for (std::size_t k = 0; k < shape.dims(); ++k) {
        ttint::TTCore core(ranks[k], shape[k], ranks[k + 1]);
        for (Eigen::Index q = 0; q < core.data.size(); ++q) core.data[q] = 2.0 * rng.uniform01() - 1.0;
        tt.cores.push_back(std::move(core));
    }
    return tt;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

}  // namespace test_helpers
