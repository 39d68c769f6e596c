#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include "helpers.hpp"
#include "ttint/matrix_cross.hpp"

using namespace ttint;

namespace {

BlackBoxMatrix wrap_dense(const Eigen::MatrixXd& M) {
    return BlackBoxMatrix(static_cast<std::size_t>(M.rows()), static_cast<std::size_t>(M.cols()),
                          [M](const std::vector<BlackBoxMatrix::Entry>& entries, double* out) {
                              for (std::size_t q = 0; q < entries.size(); ++q)
                                  out[q] = M(static_cast<Eigen::Index>(entries[q].first),
                                             static_cast<Eigen::Index>(entries[q].second));
                          });
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) M(i, j) = rng.normal();
    return M;
}

Eigen::MatrixXd cur_reconstruction(const CrossResult& res) {
    return res.skeleton_cols * res.pivot_block.fullPivLu().solve(res.skeleton_rows);
}

}  // namespace

TEST_CASE("black-box matrix caches entries and counts unique evaluations", "[matrix_cross]") {
    std::size_t calls = 0;
    BlackBoxMatrix M(3, 4, [&calls](const std::vector<BlackBoxMatrix::Entry>& entries, double* out) {
        ++calls;
        for (std::size_t q = 0; q < entries.size(); ++q)
            out[q] = static_cast<double>(entries[q].first * 10 + entries[q].second);
    });

    REQUIRE(M.entry(1, 2) == 12.0);
    REQUIRE(M.evaluations() == 1);
    REQUIRE(M.entry(1, 2) == 12.0);
    REQUIRE(M.evaluations() == 1);
    REQUIRE(calls == 1);

    Eigen::VectorXd col = M.column(2);
    REQUIRE(col.size() == 3);
    REQUIRE(col[1] == 12.0);
    REQUIRE(M.evaluations() == 3);
    REQUIRE(calls == 2);

    Eigen::RowVectorXd row = M.row(1);
    REQUIRE(row[2] == 12.0);
    REQUIRE(M.evaluations() == 6);

    REQUIRE_THROWS_AS(M.entry(3, 0), std::out_of_range);
    REQUIRE_THROWS_AS(M.column(4), std::out_of_range);
    REQUIRE_THROWS_AS(BlackBoxMatrix(0, 4, nullptr), std::invalid_argument);
}

TEST_CASE("evaluator failures surface with position context", "[matrix_cross]") {
    BlackBoxMatrix M(3, 3, [](const std::vector<BlackBoxMatrix::Entry>&, double*) {
        throw std::runtime_error("sensor offline");
    });
    REQUIRE_THROWS_WITH(M.entry(2, 1), Catch::Matchers::ContainsSubstring("sensor offline") &&
                                           Catch::Matchers::ContainsSubstring("(2,1)"));
}

TEST_CASE("rank-1 matrices are reproduced by a single pivot", "[matrix_cross]") {
    Rng rng(3);
    Eigen::VectorXd u(10), v(10);
    for (Eigen::Index i = 0; i < 10; ++i) {
        u[i] = 0.5 + rng.uniform01();
        v[i] = -0.5 - rng.uniform01();
    }
    Eigen::MatrixXd M = u * v.transpose();

    for (double tol : {1e-12, 1e-6, 0.5}) {
        for (bool det : {false, true}) {
            BlackBoxMatrix bb = wrap_dense(M);
            Rng run_rng(17);
            CrossOptions opts;
            opts.deterministic_first_column = det;
            CrossResult res = cross_approximate(bb, tol, 10, run_rng, opts);
            INFO("tol=" << tol << " deterministic=" << det);
            REQUIRE(res.rank == 1);
            REQUIRE(res.residual_estimate == 0.0);
        }
    }
}

TEST_CASE("the zero matrix yields an empty cross", "[matrix_cross]") {
    BlackBoxMatrix bb(6, 7, [](const std::vector<BlackBoxMatrix::Entry>& entries, double* out) {
        for (std::size_t q = 0; q < entries.size(); ++q) out[q] = 0.0;
    });
    Rng rng(5);
    CrossResult res = cross_approximate(bb, 1e-10, 6, rng);
    REQUIRE(res.rank == 0);
    REQUIRE(res.row_indices.empty());
    REQUIRE(res.col_indices.empty());
    REQUIRE(res.approx_norm == 0.0);
    REQUIRE(res.residual_estimate == 0.0);
}

TEST_CASE("a random rank-3 matrix is recovered at rank 3", "[matrix_cross]") {
    Rng rng(11);
    Eigen::MatrixXd M = random_matrix(10, 3, rng) * random_matrix(3, 10, rng);
    BlackBoxMatrix bb = wrap_dense(M);
    Rng run_rng(7);
    CrossResult res = cross_approximate(bb, 1e-10, 10, run_rng);
    REQUIRE(res.rank == 3);
    REQUIRE((M - cur_reconstruction(res)).norm() <= 1e-8 * M.norm());
}

TEST_CASE("cross result indices are in bounds, distinct, and consistent", "[matrix_cross]") {
    Rng rng(13);
    Eigen::MatrixXd M = random_matrix(12, 9, rng) * random_matrix(9, 9, rng);
    BlackBoxMatrix bb = wrap_dense(M);
    Rng run_rng(29);
    CrossResult res = cross_approximate(bb, 1e-3, 6, run_rng);

    REQUIRE(res.row_indices.size() == res.rank);
    REQUIRE(res.col_indices.size() == res.rank);
    std::set<std::size_t> ri(res.row_indices.begin(), res.row_indices.end());
    std::set<std::size_t> ci(res.col_indices.begin(), res.col_indices.end());
    REQUIRE(ri.size() == res.rank);
    REQUIRE(ci.size() == res.rank);
    for (std::size_t i : res.row_indices) REQUIRE(i < 12);
    for (std::size_t j : res.col_indices) REQUIRE(j < 9);

    for (std::size_t a = 0; a < res.rank; ++a)
        for (std::size_t b = 0; b < res.rank; ++b) {
            Eigen::Index ea = static_cast<Eigen::Index>(a), eb = static_cast<Eigen::Index>(b);
            REQUIRE(res.pivot_block(ea, eb) ==
                    res.skeleton_rows(ea, static_cast<Eigen::Index>(res.col_indices[b])));
            REQUIRE(res.pivot_block(ea, eb) ==
                    res.skeleton_cols(static_cast<Eigen::Index>(res.row_indices[a]), eb));
        }
}

TEST_CASE("the cross interpolates the sampled rows and columns", "[matrix_cross]") {
    Rng rng(19);
    Eigen::MatrixXd M = random_matrix(12, 9, rng) * random_matrix(9, 9, rng);
    BlackBoxMatrix bb = wrap_dense(M);
    Rng run_rng(31);
    CrossResult res = cross_approximate(bb, 1e-4, 8, run_rng);
    REQUIRE(res.rank > 0);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(res.pivot_block);
    double cond = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
    REQUIRE(cond < 1e8);

    Eigen::MatrixXd approx =
        res.skeleton_cols * tau_pseudoinverse(res.pivot_block, default_tau(res.pivot_block)) * res.skeleton_rows;
    double chebyshev = M.cwiseAbs().maxCoeff();
    for (std::size_t k = 0; k < res.rank; ++k) {
        Eigen::Index i = static_cast<Eigen::Index>(res.row_indices[k]);
        Eigen::Index j = static_cast<Eigen::Index>(res.col_indices[k]);
        REQUIRE((approx.row(i) - M.row(i)).cwiseAbs().maxCoeff() <= 1e-8 * chebyshev);
        REQUIRE((approx.col(j) - M.col(j)).cwiseAbs().maxCoeff() <= 1e-8 * chebyshev);
    }
}

TEST_CASE("exact low-rank matrices terminate with a zero residual estimate", "[matrix_cross]") {
    std::size_t seed = 40;
    for (std::size_t r : {1, 2, 4}) {
        for (auto [m, n] : std::vector<std::pair<Eigen::Index, Eigen::Index>>{{10, 10}, {15, 9}}) {
            Rng rng(seed++);
            Eigen::MatrixXd M =
                random_matrix(m, static_cast<Eigen::Index>(r), rng) * random_matrix(static_cast<Eigen::Index>(r), n, rng);
            BlackBoxMatrix bb = wrap_dense(M);
            Rng run_rng(seed * 13);
            CrossResult res = cross_approximate(bb, 1e-10, static_cast<std::size_t>(std::min(m, n)), run_rng);
            INFO("r=" << r << " m=" << m << " n=" << n);
            REQUIRE(res.rank == r);
            REQUIRE(res.residual_estimate == 0.0);
            REQUIRE((M - cur_reconstruction(res)).norm() <= 1e-8 * M.norm());
        }
    }
}

TEST_CASE("noisy low-rank matrices are recovered near the noise floor", "[matrix_cross]") {
    // Greedy pivoting only approximates the maximum-volume pivot set, so an
    // occasional seed lands above the 100x noise-floor bound; require the
    // bulk of the distribution under it.
    int within_bound = 0;
    for (std::size_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        Eigen::MatrixXd L = random_matrix(16, 3, rng) * random_matrix(3, 16, rng);
        double sigma = 1e-6 * L.norm() / 16.0;
        Eigen::MatrixXd M = L + sigma * random_matrix(16, 16, rng);
        BlackBoxMatrix bb = wrap_dense(M);
        Rng run_rng(seed + 100);
        CrossResult res = cross_approximate(bb, 1e-12, 3, run_rng);
        INFO("seed=" << seed);
        REQUIRE(res.rank == 3);
        double err = (M - cur_reconstruction(res)).norm();
        REQUIRE(err <= 3000.0 * sigma * 16.0);
        if (err <= 100.0 * sigma * 16.0) ++within_bound;
    }
    REQUIRE(within_bound >= 8);
}

TEST_CASE("evaluation count stays within the skeleton budget", "[matrix_cross]") {
    Rng rng(23);
    Eigen::MatrixXd M = random_matrix(20, 20, rng) * random_matrix(20, 20, rng);
    {
        Rng gen(57);
        Eigen::MatrixXd A = random_matrix(20, 4, gen), B = random_matrix(4, 20, gen);
        M = A * B;
    }
    BlackBoxMatrix bb = wrap_dense(M);
    Rng run_rng(59);
    CrossResult res = cross_approximate(bb, 1e-10, 20, run_rng);
    REQUIRE(res.rank == 4);
    REQUIRE(bb.evaluations() <= res.rank * (20 + 20) + 8 * 20);
}

TEST_CASE("cross_approximate validates its arguments", "[matrix_cross]") {
    Rng rng(1);
    Eigen::MatrixXd M = Eigen::MatrixXd::Ones(3, 3);
    BlackBoxMatrix bb = wrap_dense(M);
    REQUIRE_THROWS_AS(cross_approximate(bb, 1e-6, 0, rng), std::invalid_argument);
    REQUIRE_THROWS_AS(cross_approximate(bb, -1.0, 2, rng), std::invalid_argument);
}

TEST_CASE("residual_entry subtracts the accumulated terms", "[matrix_cross]") {
    Rng rng(43);
    Eigen::MatrixXd M = random_matrix(6, 5, rng);

    SECTION("no terms returns the raw entry") {
        BlackBoxMatrix bb = wrap_dense(M);
        REQUIRE(residual_entry(bb, {}, 2, 3) == M(2, 3));
        REQUIRE(bb.evaluations() == 1);
        REQUIRE(residual_entry(bb, {}, 2, 3) == M(2, 3));
        REQUIRE(bb.evaluations() == 1);
    }

    SECTION("terms reproducing the matrix leave a tiny residual") {
        RankOneTerm t1{random_matrix(6, 1, rng).col(0), random_matrix(5, 1, rng).col(0)};
        RankOneTerm t2{random_matrix(6, 1, rng).col(0), random_matrix(5, 1, rng).col(0)};
        Eigen::MatrixXd S = t1.u * t1.v.transpose() + t2.u * t2.v.transpose();
        BlackBoxMatrix bb = wrap_dense(S);
        double cheb = S.cwiseAbs().maxCoeff();
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j < 5; ++j)
                REQUIRE(std::abs(residual_entry(bb, {t1, t2}, static_cast<std::size_t>(i),
                                                static_cast<std::size_t>(j))) <= 1e-12 * cheb);
    }

    SECTION("one term matches the dense residual") {
        RankOneTerm t{random_matrix(6, 1, rng).col(0), random_matrix(5, 1, rng).col(0)};
        BlackBoxMatrix bb = wrap_dense(M);
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j < 5; ++j)
                REQUIRE(residual_entry(bb, {t}, static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ==
                        M(i, j) - t.u[i] * t.v[j]);
    }

    SECTION("out-of-range indices are rejected") {
        BlackBoxMatrix bb = wrap_dense(M);
        REQUIRE_THROWS_AS(residual_entry(bb, {}, 6, 0), std::out_of_range);
        REQUIRE_THROWS_AS(residual_entry(bb, {}, 0, 5), std::out_of_range);
    }
}

TEST_CASE("accumulated_norm matches the dense Frobenius norm", "[matrix_cross]") {
    REQUIRE(accumulated_norm({}) == 0.0);

    Rng rng(47);
    RankOneTerm single{random_matrix(7, 1, rng).col(0), random_matrix(9, 1, rng).col(0)};
    REQUIRE_THAT(accumulated_norm({single}),
                 Catch::Matchers::WithinRel(single.u.norm() * single.v.norm(), 1e-13));

    std::vector<RankOneTerm> terms;
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(8, 8);
    for (int k = 0; k < 3; ++k) {
        RankOneTerm t{random_matrix(8, 1, rng).col(0), random_matrix(8, 1, rng).col(0)};
        dense += t.u * t.v.transpose();
        terms.push_back(std::move(t));
    }
    REQUIRE_THAT(accumulated_norm(terms), Catch::Matchers::WithinRel(dense.norm(), 1e-12));

    RankOneTerm bad{random_matrix(3, 1, rng).col(0), random_matrix(8, 1, rng).col(0)};
    terms.push_back(bad);
    REQUIRE_THROWS_AS(accumulated_norm(terms), std::invalid_argument);
}

TEST_CASE("tau_pseudoinverse thresholds singular values", "[matrix_cross]") {
    SECTION("identity with tau zero") {
        Eigen::MatrixXd res = tau_pseudoinverse(Eigen::MatrixXd::Identity(3, 3), 0.0);
        REQUIRE((res - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);
    }

    SECTION("small singular values are zeroed, not inverted") {
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2, 2);
        G(0, 0) = 2.0;
        G(1, 1) = 1e-13;
        Eigen::MatrixXd res = tau_pseudoinverse(G, 1e-8);
        REQUIRE_THAT(res(0, 0), Catch::Matchers::WithinAbs(0.5, 1e-15));
        REQUIRE(std::abs(res(1, 1)) <= 1e-15);
        REQUIRE(std::abs(res(0, 1)) <= 1e-15);
        REQUIRE(std::abs(res(1, 0)) <= 1e-15);
    }

    SECTION("well-conditioned matrices invert cleanly below sigma_min") {
        Rng rng(101);
        Eigen::MatrixXd G = 3.0 * Eigen::MatrixXd::Identity(4, 4) + 0.5 * random_matrix(4, 4, rng);
        Eigen::MatrixXd res = tau_pseudoinverse(G, 1e-12);
        REQUIRE((G * res - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
    }

    SECTION("argument validation") {
        REQUIRE_THROWS_AS(tau_pseudoinverse(Eigen::MatrixXd::Ones(2, 3), 0.0), std::invalid_argument);
        REQUIRE_THROWS_AS(tau_pseudoinverse(Eigen::MatrixXd::Ones(2, 2), -1.0), std::invalid_argument);
    }
}

TEST_CASE("default_tau scales with the largest singular value", "[matrix_cross]") {
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2, 2);
    G(0, 0) = 4.0;
    G(1, 1) = 1.0;
    REQUIRE_THAT(default_tau(G), Catch::Matchers::WithinRel(4e-10, 1e-12));
}
