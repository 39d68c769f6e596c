#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <vector>

#include "ttint/common.hpp"
#include "ttint/matrix_cross.hpp"
#include "ttint/tensor_train.hpp"

namespace ttint {

// Per-boundary multi-index sets: suffix sets (length d-k at boundary k,
// 1-based) feed a left-to-right sweep, prefix sets (length k) a
// right-to-left one. Boundary k lives at position k-1.
using IndexSets = std::vector<std::vector<MultiIndex>>;

struct SweepResult {
    TTTensor tt;
    IndexSets selected;  // row sets I_k after L2R, column sets J_k after R2L
};

struct BudgetPolicy {
    std::size_t N_lim = 1000000;
    double eps_test = 0.01;
    std::size_t max_passes = 10;
    std::size_t max_rank = 64;
    std::size_t oversample = 4;  // rho: fresh random multi-indices per boundary and pass
    // When positive, every sweep runs at this tolerance and the budget law is
    // bypassed (the evaluation limit stays soft-enforced).
    double fixed_tolerance = 0.0;

    void validate() const {
        if (N_lim < 1) throw std::invalid_argument("budget policy: N_lim must be at least 1");
        if (!(eps_test > 0.0 && eps_test < 1.0))
            throw std::invalid_argument("budget policy: eps_test must lie in (0,1)");
        if (max_passes == 0) throw std::invalid_argument("budget policy: max_passes must be positive");
        if (max_rank == 0) throw std::invalid_argument("budget policy: max_rank must be positive");
        if (fixed_tolerance < 0.0) throw std::invalid_argument("budget policy: fixed_tolerance must be >= 0");
    }
};

struct TTCrossDiagnostics {
    std::size_t passes = 0;
    std::vector<std::size_t> final_ranks;
    std::optional<double> convergence_estimate;   // last ||new-old||_F / ||new||_F
    std::size_t evaluations_used = 0;
    std::vector<std::size_t> pass_evaluations;    // counter delta per sweep
    std::optional<double> effective_tolerance;    // clamped value actually used
    bool budget_exhausted = false;                // N_lim <= N_test: test result returned as-is
};

struct TTCrossResult {
    TTTensor tt;
    TTCrossDiagnostics diagnostics;
};

// eps_eff = exp(-ln(1/eps_test) * sqrt((N_lim - N_test)/N_test)), the negative
// root of (ln eps_eff)^2 / (ln eps_test)^2 = (N_lim - N_test)/N_test.
// nullopt signals an exhausted budget (N_lim <= N_test); the caller falls
// back to the test-pass approximation.
inline std::optional<double> effective_tolerance(std::size_t N_lim, std::size_t N_test, double eps_test) {
    if (N_test == 0) throw std::invalid_argument("effective_tolerance: N_test must be positive");
    if (!(eps_test > 0.0 && eps_test < 1.0))
        throw std::invalid_argument("effective_tolerance: eps_test must lie in (0,1)");
    if (N_lim <= N_test) return std::nullopt;
    double ratio = static_cast<double>(N_lim - N_test) / static_cast<double>(N_test);
    return std::exp(-std::log(1.0 / eps_test) * std::sqrt(ratio));
}

namespace detail {

inline std::size_t suffix_space(const TensorShape& shape, std::size_t boundary) {
    std::size_t total = 1;
    for (std::size_t k = boundary; k < shape.dims(); ++k) {
        std::size_t n = shape[k];
        if (total > TensorShape::max_count() / n) return TensorShape::max_count();
        total *= n;
    }
    return total;
}

// Sample `count` distinct multi-indices over modes [first, shape.dims());
// enumerates and shuffles when the space is small, otherwise rejection-samples.
inline std::vector<MultiIndex> sample_suffixes(const TensorShape& shape, std::size_t first, std::size_t count,
                                               Rng& rng) {
    std::size_t space = suffix_space(shape, first);
    count = std::min(count, space);
    std::vector<MultiIndex> out;
    if (space <= std::max<std::size_t>(4 * count, 4096)) {
        std::vector<MultiIndex> all;
        all.reserve(space);
        MultiIndex cur(shape.dims() - first, 0);
        for (std::size_t lin = 0; lin < space; ++lin) {
            all.push_back(cur);
            for (std::size_t k = 0; k < cur.size(); ++k) {
                if (++cur[k] < shape[first + k]) break;
                cur[k] = 0;
            }
        }
        rng.shuffle(all);
        out.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
    } else {
        std::set<MultiIndex> seen;
        while (seen.size() < count) {
            MultiIndex idx(shape.dims() - first);
            for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = rng.uniform_index(shape[first + k]);
            seen.insert(std::move(idx));
        }
        out.assign(seen.begin(), seen.end());
    }
    return out;
}

inline void validate_index_sets(const TensorShape& shape, const IndexSets& sets, bool suffix) {
    const std::size_t d = shape.dims();
    if (sets.size() != d - 1)
        throw std::invalid_argument("expected " + std::to_string(d - 1) + " boundary index sets, got " +
                                    std::to_string(sets.size()));
    for (std::size_t k = 1; k < d; ++k) {
        const auto& set = sets[k - 1];
        if (set.empty()) throw std::invalid_argument("boundary " + std::to_string(k) + " index set is empty");
        std::size_t expect = suffix ? d - k : k;
        for (const auto& mi : set) {
            if (mi.size() != expect)
                throw std::invalid_argument("boundary " + std::to_string(k) + " multi-index has length " +
                                            std::to_string(mi.size()) + ", expected " + std::to_string(expect));
            for (std::size_t p = 0; p < mi.size(); ++p) {
                std::size_t mode = suffix ? k + p : p;
                if (mi[p] >= shape[mode])
                    throw std::out_of_range("boundary " + std::to_string(k) + " multi-index exceeds mode " +
                                            std::to_string(mode));
            }
        }
    }
}

}  // namespace detail

// One left-to-right pass: at boundary k the sampled matrix A(I^_k, J^_k)
// has rows (prefix, i_k) with the prefix position fastest, so the slim
// factor C_k (A(I_k,J_k))^+ reshapes into the core without copying.
inline SweepResult sweep_left_to_right(BlackBoxTensor& A, const IndexSets& col_sets, double tol,
                                       std::size_t max_rank, Rng& rng, const CrossOptions& cross_opts = {}) {
    const TensorShape& shape = A.shape();
    const std::size_t d = shape.dims();
    if (d < 2) throw std::invalid_argument("sweep requires at least 2 modes");
    if (!(tol > 0.0)) throw std::invalid_argument("sweep tolerance must be positive");
    detail::validate_index_sets(shape, col_sets, true);

    const double tol_hat = tol / std::sqrt(static_cast<double>(d - 1));
    SweepResult result;
    result.tt.shape = shape;
    result.tt.cores.resize(d);
    result.selected.resize(d - 1);

    std::vector<MultiIndex> prefixes{MultiIndex{}};
    for (std::size_t k = 1; k < d; ++k) {
        const std::size_t r_prev = prefixes.size();
        const std::size_t nk = shape[k - 1];
        const auto& suffixes = col_sets[k - 1];

        BlackBoxMatrix M(
            r_prev * nk, suffixes.size(),
            [&](const std::vector<BlackBoxMatrix::Entry>& entries, double* out) {
                std::vector<MultiIndex> batch;
                batch.reserve(entries.size());
                for (const auto& [row, col] : entries) {
                    MultiIndex idx = prefixes[row % r_prev];
                    idx.push_back(row / r_prev);
                    const MultiIndex& suf = suffixes[col];
                    idx.insert(idx.end(), suf.begin(), suf.end());
                    batch.push_back(std::move(idx));
                }
                A.elements(batch, out);
            });

        CrossResult cross = cross_approximate(M, tol_hat, max_rank, rng, cross_opts);

        if (cross.rank == 0) {
            // identically-zero slice: keep the chain alive with a zero core
            TTCore zero(r_prev, nk, 1);
            result.tt.cores[k - 1] = std::move(zero);
            MultiIndex p = prefixes[0];
            p.push_back(0);
            prefixes = {std::move(p)};
            result.selected[k - 1] = prefixes;
            continue;
        }

        Eigen::MatrixXd core_mat = cross.skeleton_cols * tau_pseudoinverse(cross.pivot_block, default_tau(cross.pivot_block));
        TTCore core(r_prev, nk, cross.rank);
        core.data = Eigen::Map<const Eigen::VectorXd>(core_mat.data(), core_mat.size());
        result.tt.cores[k - 1] = std::move(core);

        std::vector<MultiIndex> new_prefixes;
        new_prefixes.reserve(cross.rank);
        for (std::size_t row : cross.row_indices) {
            MultiIndex p = prefixes[row % r_prev];
            p.push_back(row / r_prev);
            new_prefixes.push_back(std::move(p));
        }
        prefixes = std::move(new_prefixes);
        result.selected[k - 1] = prefixes;
    }

    // last core: the sampled fibers A(I_{d-1}, :), laid out (alpha, i_d, 1)
    const std::size_t r_last = prefixes.size();
    const std::size_t nd = shape[d - 1];
    TTCore last(r_last, nd, 1);
    {
        std::vector<MultiIndex> batch;
        batch.reserve(r_last * nd);
        for (std::size_t i = 0; i < nd; ++i)
            for (std::size_t a = 0; a < r_last; ++a) {
                MultiIndex idx = prefixes[a];
                idx.push_back(i);
                batch.push_back(std::move(idx));
            }
        std::vector<double> vals(batch.size());
        A.elements(batch, vals.data());
        for (std::size_t q = 0; q < vals.size(); ++q) last.data[static_cast<Eigen::Index>(q)] = vals[q];
    }
    result.tt.cores[d - 1] = std::move(last);
    result.tt.validate();
    return result;
}

// Mirror image of the left-to-right pass, realized as a left-to-right sweep
// of the index-reversed view (shared cache and counter) with reversed prefix
// sets; the resulting TT and its selected sets are reversed back.
inline SweepResult sweep_right_to_left(BlackBoxTensor& A, const IndexSets& row_sets, double tol,
                                       std::size_t max_rank, Rng& rng, const CrossOptions& cross_opts = {}) {
    const TensorShape& shape = A.shape();
    const std::size_t d = shape.dims();
    if (d < 2) throw std::invalid_argument("sweep requires at least 2 modes");
    detail::validate_index_sets(shape, row_sets, false);

    BlackBoxTensor rev = A.reversed();
    IndexSets rev_cols(d - 1);
    for (std::size_t k = 1; k < d; ++k) {
        // boundary k of A (prefix length k) = boundary d-k of the reversed tensor
        const auto& src = row_sets[k - 1];
        auto& dst = rev_cols[d - k - 1];
        dst.reserve(src.size());
        for (const auto& mi : src) dst.emplace_back(mi.rbegin(), mi.rend());
    }

    SweepResult rev_result = sweep_left_to_right(rev, rev_cols, tol, max_rank, rng, cross_opts);

    SweepResult result;
    result.tt = tt_reverse(rev_result.tt);
    result.selected.resize(d - 1);
    for (std::size_t k = 1; k < d; ++k) {
        const auto& src = rev_result.selected[d - k - 1];
        auto& dst = result.selected[k - 1];
        dst.reserve(src.size());
        for (const auto& mi : src) dst.emplace_back(mi.rbegin(), mi.rend());
    }
    return result;
}

namespace detail {

// extend a selected set with rho fresh random multi-indices, deduplicated
inline std::vector<MultiIndex> extend_set(const std::vector<MultiIndex>& base, const TensorShape& shape,
                                          std::size_t first_mode, std::size_t mode_count, std::size_t rho,
                                          Rng& rng) {
    std::set<MultiIndex> seen(base.begin(), base.end());
    std::vector<MultiIndex> out = base;
    std::size_t space = 1;
    bool huge = false;
    for (std::size_t k = 0; k < mode_count; ++k) {
        std::size_t n = shape[first_mode + k];
        if (space > TensorShape::max_count() / n) huge = true;
        space = huge ? TensorShape::max_count() : space * n;
    }
    std::size_t want = std::min(space, base.size() + rho);
    std::size_t attempts = 0;
    while (out.size() < want && attempts < 64 * (rho + 1)) {
        MultiIndex idx(mode_count);
        for (std::size_t k = 0; k < mode_count; ++k) idx[k] = rng.uniform_index(shape[first_mode + k]);
        if (seen.insert(idx).second) out.push_back(std::move(idx));
        ++attempts;
    }
    return out;
}

}  // namespace detail

// Alternating TT-cross (test pass, budget-derived tolerance, then
// right-to-left / left-to-right sweeps until the iterates stop moving).
inline TTCrossResult tt_cross(BlackBoxTensor& A, const BudgetPolicy& policy, Rng& rng,
                              const CrossOptions& cross_opts = {}) {
    policy.validate();
    const TensorShape& shape = A.shape();
    const std::size_t d = shape.dims();
    const std::size_t evals_before = A.evaluations();

    TTCrossResult result;

    if (d == 1) {
        const std::size_t n = shape[0];
        std::vector<MultiIndex> batch;
        batch.reserve(n);
        for (std::size_t i = 0; i < n; ++i) batch.push_back({i});
        std::vector<double> vals(n);
        A.elements(batch, vals.data());
        TTCore core(1, n, 1);
        for (std::size_t i = 0; i < n; ++i) core.data[static_cast<Eigen::Index>(i)] = vals[i];
        result.tt.shape = shape;
        result.tt.cores.push_back(std::move(core));
        result.diagnostics.passes = 1;
        result.diagnostics.final_ranks = {1, 1};
        result.diagnostics.convergence_estimate = 0.0;
        result.diagnostics.evaluations_used = A.evaluations() - evals_before;
        result.diagnostics.pass_evaluations = {result.diagnostics.evaluations_used};
        return result;
    }

    // initial suffix sets, R_k = min(max_rank + rho, suffix space)
    IndexSets col_sets(d - 1);
    for (std::size_t k = 1; k < d; ++k)
        col_sets[k - 1] = detail::sample_suffixes(shape, k, policy.max_rank + policy.oversample, rng);

    const double test_tol = policy.fixed_tolerance > 0.0 ? policy.fixed_tolerance : policy.eps_test;
    std::size_t sweep_start = A.evaluations();
    SweepResult current = sweep_left_to_right(A, col_sets, test_tol, policy.max_rank, rng, cross_opts);
    bool current_is_rows = true;  // current.selected holds row sets
    result.diagnostics.pass_evaluations.push_back(A.evaluations() - sweep_start);
    result.diagnostics.passes = 1;
    const std::size_t N_test = A.evaluations() - evals_before;

    double eps_eff;
    if (policy.fixed_tolerance > 0.0) {
        eps_eff = policy.fixed_tolerance;
        result.diagnostics.effective_tolerance = eps_eff;
    } else {
        auto raw = effective_tolerance(policy.N_lim, std::max<std::size_t>(N_test, 1), policy.eps_test);
        if (!raw) {
            // budget cannot pay for more than the test pass
            result.diagnostics.budget_exhausted = true;
            result.tt = std::move(current.tt);
            result.diagnostics.final_ranks = result.tt.ranks();
            result.diagnostics.evaluations_used = A.evaluations() - evals_before;
            return result;
        }
        eps_eff = std::clamp(*raw, 1e-14, policy.eps_test);
        result.diagnostics.effective_tolerance = eps_eff;
    }

    while (result.diagnostics.passes < policy.max_passes) {
        if (A.evaluations() - evals_before > policy.N_lim) {
            result.diagnostics.budget_exhausted = true;
            break;
        }

        SweepResult next;
        sweep_start = A.evaluations();
        if (current_is_rows) {
            IndexSets row_sets(d - 1);
            for (std::size_t k = 1; k < d; ++k)
                row_sets[k - 1] = detail::extend_set(current.selected[k - 1], shape, 0, k, policy.oversample, rng);
            next = sweep_right_to_left(A, row_sets, eps_eff, policy.max_rank, rng, cross_opts);
        } else {
            IndexSets new_cols(d - 1);
            for (std::size_t k = 1; k < d; ++k)
                new_cols[k - 1] =
                    detail::extend_set(current.selected[k - 1], shape, k, d - k, policy.oversample, rng);
            next = sweep_left_to_right(A, new_cols, eps_eff, policy.max_rank, rng, cross_opts);
        }
        result.diagnostics.pass_evaluations.push_back(A.evaluations() - sweep_start);
        result.diagnostics.passes += 1;

        double diff = tt_diff_norm(next.tt, current.tt);
        double nrm = tt_norm(next.tt);
        result.diagnostics.convergence_estimate = nrm > 0.0 ? diff / nrm : (diff > 0.0 ? diff : 0.0);
        current = std::move(next);
        current_is_rows = !current_is_rows;

        if (diff <= eps_eff * nrm) break;
    }

    result.tt = std::move(current.tt);
    result.diagnostics.final_ranks = result.tt.ranks();
    result.diagnostics.evaluations_used = A.evaluations() - evals_before;
    return result;
}

}  // namespace ttint
