#include "mqsbt/errors.hpp"
#include "mqsbt/la/dense.hpp"
#include "mqsbt/la/factorization.hpp"
#include "mqsbt/la/lanczos.hpp"
#include "mqsbt/la/matrix_market.hpp"
#include "mqsbt/la/sparse.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <filesystem>
#include <random>

using namespace mqsbt;
using la::Triplet;

namespace {

la::SparseMatrix dense_to_sparse(const la::DenseMatrix& D) {
    std::vector<Triplet> t;
    for (la::Index i = 0; i < D.rows(); ++i)
        for (la::Index j = 0; j < D.cols(); ++j)
            if (D(i, j) != 0.0) t.emplace_back(int(i), int(j), D(i, j));
    return la::from_triplets(D.rows(), D.cols(), t);
}

la::Vector vec(std::initializer_list<double> v) {
    la::Vector out(static_cast<la::Index>(v.size()));
    la::Index i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

la::SparseMatrix diag_op(std::initializer_list<double> d) {
    std::vector<Triplet> t;
    int i = 0;
    for (double x : d) t.emplace_back(i, i, x), ++i;
    return la::from_triplets(i, i, t);
}

}  // namespace

TEST_SUITE("la") {

TEST_CASE("spmv small cases") {
    CHECK(la::spmv(la::identity(2), vec({3, -1})) == vec({3, -1}));
    auto P = la::from_triplets(2, 2, {Triplet(0, 1, 1.0), Triplet(1, 0, 1.0)});
    CHECK(la::spmv(P, vec({1, 2})) == vec({2, 1}));
    la::DenseMatrix T = la::DenseMatrix::Constant(2, 2, 2.0);
    CHECK(la::spmv(dense_to_sparse(T), vec({0, 1})) == vec({2, 2}));
    CHECK_THROWS_AS(la::spmv(P, vec({1, 2, 3})), ValidationError);
}

TEST_CASE("from_triplets sums duplicates and drops zeros") {
    auto A = la::from_triplets(2, 2, {Triplet(0, 0, 1.0), Triplet(0, 0, 2.0), Triplet(1, 1, 1.0),
                                      Triplet(1, 1, -1.0)});
    CHECK(A.coeff(0, 0) == 3.0);
    CHECK(A.nonZeros() == 1);
    CHECK_THROWS_AS(la::from_triplets(2, 2, {Triplet(2, 0, 1.0)}), ValidationError);
}

TEST_CASE("block2x2 and selections") {
    auto A = diag_op({1, 2});
    la::SparseMatrix B(2, 0), C(0, 2), D(0, 0);
    auto S = la::block2x2(A, B, C, D);
    CHECK(S.rows() == 2);
    CHECK(S.cols() == 2);
    CHECK(S.coeff(1, 1) == 2.0);
    auto R = la::select_rows(A, {1});
    CHECK(R.rows() == 1);
    CHECK(R.coeff(0, 1) == 2.0);
    auto Cc = la::select_cols(A, {1});
    CHECK(Cc.coeff(1, 0) == 2.0);
}

TEST_CASE("factorize hand examples") {
    auto F = la::factorize(diag_op({2, 5}));
    const la::Vector x = F.solve(vec({2, 5}));
    CHECK(x(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x(1) == doctest::Approx(1.0).epsilon(1e-15));

    auto S = la::from_triplets(2, 2, {Triplet(0, 0, 4), Triplet(0, 1, 1), Triplet(1, 0, 1), Triplet(1, 1, 1)});
    const la::Vector y = la::factorize(S).solve(vec({1, 1}));
    CHECK(std::abs(y(0)) <= 1e-15);
    CHECK(y(1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("factorize reports a singular pivot") {
    auto S = la::from_triplets(2, 2, {Triplet(0, 0, 1), Triplet(0, 1, 1), Triplet(1, 0, 1), Triplet(1, 1, 1)});
    try {
        la::factorize(S);
        FAIL("expected SingularMatrixError");
    } catch (const SingularMatrixError& e) {
        CHECK(std::string(e.what()).find("singular matrix") != std::string::npos);
        CHECK(e.pivot() >= 0);
        CHECK(e.pivot() < 2);
    }
    CHECK_THROWS_AS(la::factorize(la::SparseMatrix(2, 3)), ValidationError);
}

TEST_CASE("random sparse SPD solves") {
    std::mt19937_64 g(7);
    for (int trial = 0; trial < 4; ++trial) {
        const int n = 50 + 50 * trial;
        std::uniform_int_distribution<int> pick(0, n - 1);
        std::vector<Triplet> t;
        for (int k = 0; k < 4 * n; ++k) {
            const int i = pick(g), j = pick(g);
            const double v = std::uniform_real_distribution<double>(-1, 1)(g);
            t.emplace_back(i, j, v);
            t.emplace_back(j, i, v);
        }
        for (int i = 0; i < n; ++i) t.emplace_back(i, i, 10.0);
        const auto S = la::from_triplets(n, n, t);
        const auto F = la::factorize(S);
        for (int k = 0; k < 25; ++k) {
            const la::Vector b = fixtures::random_vector(g, n);
            const la::Vector x = F.solve(b);
            CHECK((S * x - b).norm() / b.norm() <= 1e-10);
        }
    }
}

TEST_CASE("complex factorization") {
    Eigen::SparseMatrix<la::Complex, Eigen::ColMajor, int> S(2, 2);
    S.insert(0, 0) = la::Complex(1, 1);
    S.insert(1, 1) = la::Complex(0, 2);
    S.insert(0, 1) = 1.0;
    const auto F = la::factorize_complex(S);
    la::CVector b(2);
    b << la::Complex(1, 0), la::Complex(0, 1);
    const la::CVector x = F.solve(b);
    CHECK((S * x - b).norm() <= 1e-14);
}

TEST_CASE("dense_sym_eig hand cases") {
    auto e1 = la::dense_sym_eig((la::DenseMatrix(2, 2) << 3, 0, 0, 1).finished());
    CHECK(e1.values(0) == doctest::Approx(3.0));
    CHECK(e1.values(1) == doctest::Approx(1.0));
    CHECK((e1.vectors.cwiseAbs() - la::DenseMatrix::Identity(2, 2)).norm() <= 1e-15);
    auto e2 = la::dense_sym_eig((la::DenseMatrix(2, 2) << 0, 1, 1, 0).finished());
    CHECK(e2.values(0) == doctest::Approx(1.0));
    CHECK(e2.values(1) == doctest::Approx(-1.0));
    auto e3 = la::dense_sym_eig(la::DenseMatrix::Zero(2, 2));
    CHECK(e3.values.norm() == 0.0);
    CHECK_THROWS_AS(la::dense_sym_eig((la::DenseMatrix(2, 2) << 0, 1, 0, 0).finished()), ValidationError);
}

TEST_CASE("dense_sym_eig random reconstruction") {
    std::mt19937_64 g(11);
    for (int k = 0; k < 100; ++k) {
        const int n = 1 + k % 50;
        la::DenseMatrix A = fixtures::random_matrix(g, n, n);
        A = la::symmetrize(A);
        const auto e = la::dense_sym_eig(A);
        CHECK((A * e.vectors - e.vectors * e.values.asDiagonal()).norm() <= 1e-10 * A.norm());
        CHECK((e.vectors.transpose() * e.vectors - la::DenseMatrix::Identity(n, n)).norm() <= 1e-10);
        for (int i = 0; i + 1 < n; ++i) CHECK(e.values(i) >= e.values(i + 1));
    }
}

TEST_CASE("rank and complements") {
    la::DenseMatrix A(3, 2);
    A << 1, 2, 2, 4, 3, 6;
    CHECK(la::numerical_rank(A) == 1);
    const la::DenseMatrix N = la::null_space(A);
    REQUIRE(N.cols() == 1);
    CHECK((A * N).norm() <= 1e-14);
    const auto rsp = la::range_split(A);
    CHECK(rsp.rank == 1);
    CHECK((rsp.complement.transpose() * A).norm() <= 1e-14);
}

TEST_CASE("lanczos on diagonal operators") {
    auto op = [](la::SparseMatrix D) { return [D](const la::Vector& x) -> la::Vector { return D * x; }; };
    auto r1 = la::lanczos_extremal(op(diag_op({-2, -2})), vec({1, 1}));
    CHECK(r1.lambda_min == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(r1.lambda_max == doctest::Approx(-2.0).epsilon(1e-12));
    auto r2 = la::lanczos_extremal(op(diag_op({-1, -10})), vec({1, 1}));
    CHECK(r2.lambda_min == doctest::Approx(-10.0).epsilon(1e-8));
    CHECK(r2.lambda_max == doctest::Approx(-1.0).epsilon(1e-8));

    std::vector<Triplet> t;
    const int n = 300;
    for (int i = 0; i < n; ++i) t.emplace_back(i, i, -1.0 * std::pow(1.05, i));
    const auto D = la::from_triplets(n, n, t);
    la::LanczosOptions lo;
    lo.tol = 1e-10;
    lo.maxit = 150;
    auto r3 = la::lanczos_extremal(op(D), la::Vector::Ones(n), lo);
    CHECK(r3.lambda_min == doctest::Approx(-std::pow(1.05, n - 1)).epsilon(1e-8));
}

TEST_CASE("lanczos in a weighted inner product") {
    // L = M^{-1} K is self-adjoint in <x, y>_M.
    const la::Vector m = vec({1, 2, 4}), k = vec({-3, -4, -4});
    la::LanczosOptions lo;
    lo.metric = [m](const la::Vector& x) -> la::Vector { return m.cwiseProduct(x); };
    auto r = la::lanczos_extremal([&](const la::Vector& x) -> la::Vector { return k.cwiseQuotient(m).cwiseProduct(x); },
                                  vec({1, 1, 1}), lo);
    CHECK(r.lambda_min == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(r.lambda_max == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("matrix market round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "mqsbt_test_mm";
    std::filesystem::create_directories(dir);
    auto A = la::from_triplets(3, 2, {Triplet(0, 0, 1.0 / 3.0), Triplet(2, 1, -1e-300), Triplet(1, 0, 7.0)});
    la::write_matrix_market((dir / "a.mtx").string(), A);
    const auto B = la::read_matrix_market((dir / "a.mtx").string());
    CHECK((la::DenseMatrix(A) - la::DenseMatrix(B)).norm() == 0.0);

    auto S = la::from_triplets(2, 2, {Triplet(0, 0, 2.0), Triplet(0, 1, 0.1), Triplet(1, 0, 0.1)});
    la::write_matrix_market((dir / "s.mtx").string(), S, true);
    const auto T = la::read_matrix_market((dir / "s.mtx").string());
    CHECK((la::DenseMatrix(S) - la::DenseMatrix(T)).norm() == 0.0);

    la::DenseMatrix D(2, 2);
    D << 1, 0, M_PI, -2;
    la::write_matrix_market((dir / "d.mtx").string(), D);
    CHECK(la::read_matrix_market_dense((dir / "d.mtx").string()) == D);
    std::filesystem::remove_all(dir);
}

}
