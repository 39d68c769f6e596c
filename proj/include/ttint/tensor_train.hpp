#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "ttint/common.hpp"

namespace ttint {

// One TT core G_k of extents r_left x n x r_right, stored contiguously in
// column-major (left-rank, mode, right-rank) order: entry (a, i, b) lives at
// data[a + i*r_left + b*r_left*n]. Both matrix unfoldings are then zero-copy:
//   vertical    (r_left*n) x r_right   rows indexed (a, i) with a fastest
//   horizontal  r_left x (n*r_right)   cols indexed (i, b) with i fastest
struct TTCore {
    std::size_t r_left = 0;
    std::size_t n = 0;
    std::size_t r_right = 0;
    Eigen::VectorXd data;

    TTCore() = default;
    TTCore(std::size_t rl, std::size_t nn, std::size_t rr)
        : r_left(rl), n(nn), r_right(rr), data(Eigen::VectorXd::Zero(rl * nn * rr)) {}

    double& at(std::size_t a, std::size_t i, std::size_t b) { return data[a + i * r_left + b * r_left * n]; }
    double at(std::size_t a, std::size_t i, std::size_t b) const { return data[a + i * r_left + b * r_left * n]; }

    Eigen::Map<const Eigen::MatrixXd> vertical() const {
        return {data.data(), static_cast<Eigen::Index>(r_left * n), static_cast<Eigen::Index>(r_right)};
    }
    Eigen::Map<Eigen::MatrixXd> vertical() {
        return {data.data(), static_cast<Eigen::Index>(r_left * n), static_cast<Eigen::Index>(r_right)};
    }
    Eigen::Map<const Eigen::MatrixXd> horizontal() const {
        return {data.data(), static_cast<Eigen::Index>(r_left), static_cast<Eigen::Index>(n * r_right)};
    }

    // r_left x r_right slice at mode index i
    Eigen::Map<const Eigen::MatrixXd, 0, Eigen::OuterStride<>> slice(std::size_t i) const {
        return {data.data() + i * r_left, static_cast<Eigen::Index>(r_left),
                static_cast<Eigen::Index>(r_right), Eigen::OuterStride<>(static_cast<Eigen::Index>(r_left * n))};
    }
};

struct TTTensor {
    TensorShape shape;
    std::vector<TTCore> cores;

    std::size_t dims() const { return shape.dims(); }

    std::vector<std::size_t> ranks() const {
        std::vector<std::size_t> r;
        r.reserve(cores.size() + 1);
        r.push_back(cores.empty() ? 1 : cores.front().r_left);
        for (const auto& c : cores) r.push_back(c.r_right);
        return r;
    }

    void validate() const {
        if (cores.size() != shape.dims())
            throw std::invalid_argument("TT tensor has " + std::to_string(cores.size()) + " cores for " +
                                        std::to_string(shape.dims()) + " modes");
        if (cores.front().r_left != 1 || cores.back().r_right != 1)
            throw std::invalid_argument("boundary TT ranks must equal 1");
        for (std::size_t k = 0; k < cores.size(); ++k) {
            if (cores[k].n != shape[k])
                throw std::invalid_argument("core " + std::to_string(k) + " mode size mismatch");
            if (k + 1 < cores.size() && cores[k].r_right != cores[k + 1].r_left)
                throw std::invalid_argument("TT rank mismatch between cores " + std::to_string(k) + " and " +
                                            std::to_string(k + 1));
        }
    }
};

// Dense materialization used by test oracles; column-major with the first
// mode fastest, so linear(idx) = i_1 + n_1*(i_2 + n_2*(...)).
struct DenseTensor {
    TensorShape shape;
    std::vector<double> data;

    std::size_t linear(const MultiIndex& idx) const {
        shape.require_valid_index(idx);
        std::size_t lin = 0, stride = 1;
        for (std::size_t k = 0; k < idx.size(); ++k) {
            lin += idx[k] * stride;
            stride *= shape[k];
        }
        return lin;
    }

    double at(const MultiIndex& idx) const { return data[linear(idx)]; }
};

// Counts the times a squared norm came out slightly negative and was clamped.
inline std::atomic<std::uint64_t>& tt_negative_clamp_count() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

inline double tt_element(const TTTensor& tt, const MultiIndex& idx) {
    tt.shape.require_valid_index(idx);
    Eigen::RowVectorXd v = tt.cores[0].slice(idx[0]);
    for (std::size_t k = 1; k < tt.cores.size(); ++k) v = v * tt.cores[k].slice(idx[k]);
    return v(0);
}

inline double tt_dot(const TTTensor& a, const TTTensor& b) {
    if (a.shape != b.shape) throw std::invalid_argument("tt_dot: tensor shapes differ");
    Eigen::MatrixXd p = Eigen::MatrixXd::Ones(1, 1);
    for (std::size_t k = 0; k < a.cores.size(); ++k) {
        const TTCore& ca = a.cores[k];
        const TTCore& cb = b.cores[k];
        Eigen::MatrixXd next = Eigen::MatrixXd::Zero(ca.r_right, cb.r_right);
        for (std::size_t i = 0; i < ca.n; ++i) next += ca.slice(i).transpose() * p * cb.slice(i);
        p = std::move(next);
    }
    return p(0, 0);
}

inline double tt_norm(const TTTensor& a) {
    double sq = tt_dot(a, a);
    if (sq < 0.0) {
        tt_negative_clamp_count().fetch_add(1, std::memory_order_relaxed);
        sq = 0.0;
    }
    return std::sqrt(sq);
}

// ||a - b||_F. The Gram identity <a,a> - 2<a,b> + <b,b> loses half the
// mantissa when a and b nearly coincide, exactly the regime the convergence
// test lives in, so instead the difference is embedded exactly as a stacked
// TT (block slices, no arithmetic) and its norm taken by QR orthogonalization.
inline double tt_diff_norm(const TTTensor& a, const TTTensor& b) {
    if (a.shape != b.shape) throw std::invalid_argument("tt_diff_norm: tensor shapes differ");
    const std::size_t d = a.cores.size();
    Eigen::MatrixXd R = Eigen::MatrixXd::Ones(1, 1);
    for (std::size_t k = 0; k < d; ++k) {
        const TTCore& ca = a.cores[k];
        const TTCore& cb = b.cores[k];
        const bool first = k == 0, last = k + 1 == d;
        const Eigen::Index rr_a = static_cast<Eigen::Index>(ca.r_right);
        const Eigen::Index rr_b = static_cast<Eigen::Index>(cb.r_right);
        const Eigen::Index rr = last ? 1 : rr_a + rr_b;
        const Eigen::Index q = R.rows();
        Eigen::MatrixXd stacked(q * static_cast<Eigen::Index>(ca.n), rr);
        for (std::size_t i = 0; i < ca.n; ++i) {
            // slice of the difference tensor: [A, -B] first, [A; B] last,
            // diag(A, B) in between; R carries the left factor
            Eigen::MatrixXd sa = R.leftCols(static_cast<Eigen::Index>(ca.r_left)) * ca.slice(i);
            Eigen::MatrixXd sb = R.rightCols(static_cast<Eigen::Index>(cb.r_left)) * cb.slice(i);
            if (first) sb = -sb;
            auto rows = stacked.middleRows(static_cast<Eigen::Index>(i) * q, q);
            if (last)
                rows = sa + sb;
            else {
                rows.leftCols(rr_a) = sa;
                rows.rightCols(rr_b) = sb;
            }
        }
        if (last) return stacked.norm();
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
        Eigen::Index keep = std::min(stacked.rows(), stacked.cols());
        R = qr.matrixQR().topRows(keep).triangularView<Eigen::Upper>();
    }
    return 0.0;
}

inline TTTensor tt_from_rank1(const std::vector<Eigen::VectorXd>& axis_values) {
    if (axis_values.empty()) throw std::invalid_argument("tt_from_rank1: no axes given");
    std::vector<std::size_t> sizes;
    for (const auto& v : axis_values) {
        if (v.size() == 0) throw std::invalid_argument("tt_from_rank1: empty axis value list");
        sizes.push_back(static_cast<std::size_t>(v.size()));
    }
    TTTensor tt{TensorShape(sizes), {}};
    for (const auto& v : axis_values) {
        TTCore core(1, static_cast<std::size_t>(v.size()), 1);
        core.data = v;
        tt.cores.push_back(std::move(core));
    }
    return tt;
}

inline double tt_contract_rank1(const TTTensor& tt, const std::vector<Eigen::VectorXd>& axis_values) {
    if (axis_values.size() != tt.dims())
        throw std::invalid_argument("tt_contract_rank1: axis count mismatch");
    for (std::size_t k = 0; k < axis_values.size(); ++k)
        if (static_cast<std::size_t>(axis_values[k].size()) != tt.shape[k])
            throw std::invalid_argument("tt_contract_rank1: axis " + std::to_string(k) + " length mismatch");
    Eigen::RowVectorXd v = Eigen::RowVectorXd::Ones(1);
    for (std::size_t k = 0; k < tt.cores.size(); ++k) {
        const TTCore& c = tt.cores[k];
        Eigen::RowVectorXd next = Eigen::RowVectorXd::Zero(c.r_right);
        for (std::size_t i = 0; i < c.n; ++i) next += axis_values[k][i] * (v * c.slice(i));
        v = std::move(next);
    }
    return v(0);
}

inline DenseTensor tt_to_dense(const TTTensor& tt, std::size_t cap = 1000000) {
    std::size_t total = tt.shape.element_count();
    if (total > cap)
        throw std::length_error("tt_to_dense: " + std::to_string(total) + " elements exceed cap of " +
                                std::to_string(cap));
    // Fold cores in one pass: prefix block (N x r_k) times horizontal
    // unfolding; column-major layout makes the reshape to (N*n_k) x r_{k+1} free.
    Eigen::MatrixXd block = Eigen::MatrixXd::Ones(1, 1);
    for (const TTCore& c : tt.cores) {
        Eigen::MatrixXd prod = block * c.horizontal();
        block = Eigen::Map<Eigen::MatrixXd>(prod.data(), prod.rows() * static_cast<Eigen::Index>(c.n),
                                            static_cast<Eigen::Index>(c.r_right));
    }
    DenseTensor dense{tt.shape, {}};
    dense.data.assign(block.data(), block.data() + block.size());
    return dense;
}

// Reverse the mode order: result(i_d,...,i_1) = tt(i_1,...,i_d).
inline TTTensor tt_reverse(const TTTensor& tt) {
    TTTensor rev{tt.shape.reversed(), {}};
    rev.cores.reserve(tt.cores.size());
    for (auto it = tt.cores.rbegin(); it != tt.cores.rend(); ++it) {
        TTCore c(it->r_right, it->n, it->r_left);
        for (std::size_t a = 0; a < it->r_left; ++a)
            for (std::size_t i = 0; i < it->n; ++i)
                for (std::size_t b = 0; b < it->r_right; ++b) c.at(b, i, a) = it->at(a, i, b);
        rev.cores.push_back(std::move(c));
    }
    return rev;
}

}  // namespace ttint
