#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <optional>
#include <unordered_map>
#include <vector>

#include "ttint/common.hpp"

namespace ttint {

// Black-box matrix with entry caching. The counter reports the number of
// entries actually pulled from the evaluator; cached re-reads are free.
class BlackBoxMatrix {
public:
    using Entry = std::pair<std::size_t, std::size_t>;
    using Evaluator = std::function<void(const std::vector<Entry>&, double*)>;

    BlackBoxMatrix(std::size_t rows, std::size_t cols, Evaluator eval)
        : rows_(rows), cols_(cols), eval_(std::move(eval)) {
        if (rows_ == 0 || cols_ == 0) throw std::invalid_argument("black-box matrix must be nonempty");
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t evaluations() const { return count_; }

    double entry(std::size_t i, std::size_t j) {
        check(i, j);
        auto it = cache_.find(key(i, j));
        if (it != cache_.end()) return it->second;
        std::vector<Entry> batch{{i, j}};
        double v;
        fetch(batch, &v);
        return v;
    }

    Eigen::VectorXd column(std::size_t j) {
        check(0, j);
        Eigen::VectorXd col(rows_);
        std::vector<Entry> missing;
        for (std::size_t i = 0; i < rows_; ++i) {
            auto it = cache_.find(key(i, j));
            if (it != cache_.end())
                col[static_cast<Eigen::Index>(i)] = it->second;
            else
                missing.emplace_back(i, j);
        }
        if (!missing.empty()) {
            std::vector<double> vals(missing.size());
            fetch(missing, vals.data());
            for (std::size_t q = 0; q < missing.size(); ++q)
                col[static_cast<Eigen::Index>(missing[q].first)] = vals[q];
        }
        return col;
    }

    Eigen::RowVectorXd row(std::size_t i) {
        check(i, 0);
        Eigen::RowVectorXd r(cols_);
        std::vector<Entry> missing;
        for (std::size_t j = 0; j < cols_; ++j) {
            auto it = cache_.find(key(i, j));
            if (it != cache_.end())
                r[static_cast<Eigen::Index>(j)] = it->second;
            else
                missing.emplace_back(i, j);
        }
        if (!missing.empty()) {
            std::vector<double> vals(missing.size());
            fetch(missing, vals.data());
            for (std::size_t q = 0; q < missing.size(); ++q)
                r[static_cast<Eigen::Index>(missing[q].second)] = vals[q];
        }
        return r;
    }

private:
    void check(std::size_t i, std::size_t j) const {
        if (i >= rows_ || j >= cols_)
            throw std::out_of_range("matrix entry (" + std::to_string(i) + "," + std::to_string(j) +
                                    ") out of range for " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }

    std::uint64_t key(std::size_t i, std::size_t j) const {
        return static_cast<std::uint64_t>(i) * cols_ + j;
    }

    void fetch(const std::vector<Entry>& entries, double* out) {
        try {
            eval_(entries, out);
        } catch (const std::exception& e) {
            throw std::runtime_error(std::string(e.what()) + " (while evaluating a batch of " +
                                     std::to_string(entries.size()) + " entries starting at (" +
                                     std::to_string(entries.front().first) + "," +
                                     std::to_string(entries.front().second) + "))");
        }
        for (std::size_t q = 0; q < entries.size(); ++q) {
            auto [it, inserted] = cache_.emplace(key(entries[q].first, entries[q].second), out[q]);
            if (inserted) ++count_;
            out[q] = it->second;
        }
    }

    std::size_t rows_, cols_;
    Evaluator eval_;
    std::unordered_map<std::uint64_t, double> cache_;
    std::size_t count_ = 0;
};

// One step of the greedy cross: the scaled rank-1 update
// M'(:,j_r) (M'(i_r,j_r))^{-1} M'(i_r,:), stored as u v^T with u the raw
// residual column and v the residual row divided by the pivot.
struct RankOneTerm {
    Eigen::VectorXd u;
    Eigen::VectorXd v;
};

struct CrossResult {
    std::vector<std::size_t> row_indices;   // I, in pivot order
    std::vector<std::size_t> col_indices;   // J, in pivot order
    Eigen::MatrixXd skeleton_rows;          // M(I,:), r x n
    Eigen::MatrixXd skeleton_cols;          // M(:,J), m x r
    Eigen::MatrixXd pivot_block;            // M(I,J), r x r
    std::size_t rank = 0;
    double residual_estimate = 0.0;         // last mu*sqrt((m-r)(n-r))
    double approx_norm = 0.0;               // ||M - M'||_F of the built approximation
};

struct CrossOptions {
    // Pick column 0 first instead of a random one; keeps tests reproducible
    // independently of rng state.
    bool deterministic_first_column = false;
};

inline double residual_entry(BlackBoxMatrix& M, const std::vector<RankOneTerm>& terms, std::size_t i,
                             std::size_t j) {
    double value = M.entry(i, j);
    for (const auto& t : terms) value -= t.u[static_cast<Eigen::Index>(i)] * t.v[static_cast<Eigen::Index>(j)];
    return value;
}

inline double accumulated_norm(const std::vector<RankOneTerm>& terms) {
    if (terms.empty()) return 0.0;
    const auto r = static_cast<Eigen::Index>(terms.size());
    const Eigen::Index m = terms[0].u.size();
    const Eigen::Index n = terms[0].v.size();
    Eigen::MatrixXd U(m, r), V(n, r);
    for (Eigen::Index k = 0; k < r; ++k) {
        if (terms[k].u.size() != m || terms[k].v.size() != n)
            throw std::invalid_argument("accumulated_norm: rank-1 terms have inconsistent sizes");
        U.col(k) = terms[k].u;
        V.col(k) = terms[k].v;
    }
    double sq = ((U.transpose() * U) * (V.transpose() * V)).trace();
    return std::sqrt(sq < 0.0 ? 0.0 : sq);
}

// SVD-based pseudoinverse with singular values below tau zeroed out.
inline Eigen::MatrixXd tau_pseudoinverse(const Eigen::MatrixXd& G, double tau) {
    if (G.rows() != G.cols()) throw std::invalid_argument("tau_pseudoinverse: matrix must be square");
    if (tau < 0.0) throw std::invalid_argument("tau_pseudoinverse: tau must be nonnegative");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) {
        double mx = G.cwiseAbs().maxCoeff();
        throw std::runtime_error("tau_pseudoinverse: SVD failed to converge (size " + std::to_string(G.rows()) +
                                 ", max |entry| " + std::to_string(mx) + ")");
    }
    Eigen::VectorXd inv = svd.singularValues();
    for (Eigen::Index k = 0; k < inv.size(); ++k) inv[k] = inv[k] < tau ? 0.0 : 1.0 / inv[k];
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

inline double default_tau(const Eigen::MatrixXd& G) {
    if (G.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
    return 1e-10 * svd.singularValues()(0);
}

namespace detail {

// residual column/row against the accumulated terms
inline Eigen::VectorXd residual_column(BlackBoxMatrix& M, const std::vector<RankOneTerm>& terms, std::size_t j) {
    Eigen::VectorXd col = M.column(j);
    for (const auto& t : terms) col -= t.u * t.v[static_cast<Eigen::Index>(j)];
    return col;
}

inline Eigen::RowVectorXd residual_row(BlackBoxMatrix& M, const std::vector<RankOneTerm>& terms, std::size_t i) {
    Eigen::RowVectorXd row = M.row(i);
    for (const auto& t : terms) row -= t.u[static_cast<Eigen::Index>(i)] * t.v.transpose();
    return row;
}

// argmax of |values| over positions not marked used; ties break to the
// smallest index; nullopt when every position is used
template <typename Vec>
inline std::optional<std::size_t> argmax_unused(const Vec& values, const std::vector<char>& used) {
    std::optional<std::size_t> best;
    double best_mag = -1.0;
    for (std::size_t p = 0; p < static_cast<std::size_t>(values.size()); ++p) {
        if (used[p]) continue;
        double mag = std::abs(values[static_cast<Eigen::Index>(p)]);
        if (mag > best_mag) {
            best_mag = mag;
            best = p;
        }
    }
    return best;
}

}  // namespace detail

// Greedy cross approximation (rank-1 peeling with implicit residuals).
// Stops when mu*sqrt((m-r)(n-r)) < tol * ||M - M'||_F, when max_rank is hit,
// or when the pivot search runs out of usable columns.
inline CrossResult cross_approximate(BlackBoxMatrix& M, double tol, std::size_t max_rank, Rng& rng,
                                     const CrossOptions& opts = {}) {
    const std::size_t m = M.rows(), n = M.cols();
    if (tol < 0.0) throw std::invalid_argument("cross_approximate: tolerance must be nonnegative");
    if (max_rank == 0) throw std::invalid_argument("cross_approximate: max_rank must be positive");
    max_rank = std::min(max_rank, std::min(m, n));

    std::vector<RankOneTerm> terms;
    std::vector<std::size_t> I, J;
    std::vector<char> row_used(m, 0), col_used(n, 0);
    Eigen::MatrixXd gram_u(0, 0), gram_v(0, 0);
    double max_sampled = 0.0;
    double residual_estimate = 0.0;
    double approx_norm = 0.0;

    std::size_t j = opts.deterministic_first_column ? 0 : rng.uniform_index(n);

    while (terms.size() < max_rank) {
        Eigen::VectorXd col = detail::residual_column(M, terms, j);
        max_sampled = std::max(max_sampled, M.column(j).cwiseAbs().maxCoeff());
        auto i_opt = detail::argmax_unused(col, row_used);
        if (!i_opt) break;
        std::size_t i = *i_opt;
        double mu = std::abs(col[static_cast<Eigen::Index>(i)]);

        if (mu <= 1e-14 * max_sampled) {
            // structurally tiny pivot: retry a handful of random unused columns
            std::vector<std::size_t> candidates;
            for (std::size_t c = 0; c < n; ++c)
                if (!col_used[c] && c != j) candidates.push_back(c);
            rng.shuffle(candidates);
            bool found = false;
            std::size_t tries = std::min<std::size_t>(candidates.size(), std::min<std::size_t>(n, 5));
            for (std::size_t t = 0; t < tries; ++t) {
                std::size_t jj = candidates[t];
                Eigen::VectorXd col2 = detail::residual_column(M, terms, jj);
                max_sampled = std::max(max_sampled, M.column(jj).cwiseAbs().maxCoeff());
                auto i2 = detail::argmax_unused(col2, row_used);
                if (i2 && std::abs(col2[static_cast<Eigen::Index>(*i2)]) > 1e-14 * max_sampled) {
                    j = jj;
                    col = std::move(col2);
                    i = *i2;
                    mu = std::abs(col[static_cast<Eigen::Index>(i)]);
                    found = true;
                    break;
                }
            }
            if (!found) {
                // every probed column had a numerically zero pivot, so the
                // residual itself is numerically zero
                residual_estimate = 0.0;
                break;
            }
        }

        Eigen::RowVectorXd row = detail::residual_row(M, terms, i);
        max_sampled = std::max(max_sampled, M.row(i).cwiseAbs().maxCoeff());
        double delta = col[static_cast<Eigen::Index>(i)];
        RankOneTerm term{col, row.transpose() / delta};

        // grow the Gram matrices incrementally: O((m+n)r) per step
        const auto r_old = static_cast<Eigen::Index>(terms.size());
        gram_u.conservativeResize(r_old + 1, r_old + 1);
        gram_v.conservativeResize(r_old + 1, r_old + 1);
        for (Eigen::Index k = 0; k < r_old; ++k) {
            gram_u(k, r_old) = gram_u(r_old, k) = terms[static_cast<std::size_t>(k)].u.dot(term.u);
            gram_v(k, r_old) = gram_v(r_old, k) = terms[static_cast<std::size_t>(k)].v.dot(term.v);
        }
        gram_u(r_old, r_old) = term.u.squaredNorm();
        gram_v(r_old, r_old) = term.v.squaredNorm();

        terms.push_back(std::move(term));
        I.push_back(i);
        J.push_back(j);
        row_used[i] = 1;
        col_used[j] = 1;

        double sq = (gram_u * gram_v).trace();
        approx_norm = std::sqrt(sq < 0.0 ? 0.0 : sq);
        const std::size_t r = terms.size();
        residual_estimate = mu * std::sqrt(static_cast<double>(m - r) * static_cast<double>(n - r));
        if (residual_estimate < tol * approx_norm) break;

        auto next = detail::argmax_unused(row, col_used);
        if (!next) break;
        j = *next;
    }

    CrossResult result;
    result.rank = terms.size();
    result.row_indices = std::move(I);
    result.col_indices = std::move(J);
    result.residual_estimate = residual_estimate;
    result.approx_norm = approx_norm;
    result.skeleton_rows.resize(static_cast<Eigen::Index>(result.rank), static_cast<Eigen::Index>(n));
    result.skeleton_cols.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(result.rank));
    result.pivot_block.resize(static_cast<Eigen::Index>(result.rank), static_cast<Eigen::Index>(result.rank));
    for (std::size_t k = 0; k < result.rank; ++k) {
        result.skeleton_rows.row(static_cast<Eigen::Index>(k)) = M.row(result.row_indices[k]);
        result.skeleton_cols.col(static_cast<Eigen::Index>(k)) = M.column(result.col_indices[k]);
    }
    for (std::size_t a = 0; a < result.rank; ++a)
        for (std::size_t b = 0; b < result.rank; ++b)
            result.pivot_block(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                M.entry(result.row_indices[a], result.col_indices[b]);
    return result;
}

}  // namespace ttint
