#include "mqsbt/errors.hpp"
#include "mqsbt/la/dense.hpp"
#include "mqsbt/la/factorization.hpp"
#include "mqsbt/la/sparse.hpp"
#include "mqsbt/reg/kernels.hpp"
#include "mqsbt/reg/regularized.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <random>

using namespace mqsbt;
using la::Triplet;

namespace {

la::DenseMatrix D(const la::SparseMatrix& A) { return la::DenseMatrix(A); }

std::shared_ptr<fem::AssembledSystem> toy3() {
    // C = [1, 1, 1]: one conducting edge, C2 = [1, 1].
    auto C = la::from_triplets(1, 3, {Triplet(0, 0, 1.0), Triplet(0, 1, 1.0), Triplet(0, 2, 1.0)});
    auto M = la::from_triplets(3, 3, {Triplet(0, 0, 3.0)});
    auto Mn = la::from_triplets(1, 1, {Triplet(0, 0, 2.0)});
    auto U = la::from_triplets(1, 1, {Triplet(0, 0, 1.0)});
    return std::make_shared<fem::AssembledSystem>(
        fem::assemble_from_blocks(C, M, Mn, U, la::DenseMatrix::Constant(1, 1, 1.0), 1));
}

struct Desk {
    mesh::Mesh m;
    mesh::IncidenceSet inc;
    std::shared_ptr<const fem::AssembledSystem> sys;
    reg::KernelBases kb;
};

const Desk& desk() {
    static const Desk d = [] {
        Desk d;
        d.m = mesh::generate_mesh(mesh::GeometrySpec{});
        d.inc = mesh::eliminate_boundary(mesh::build_incidence(d.m), d.m);
        d.sys = std::make_shared<fem::AssembledSystem>(
            fem::build_system(d.m, d.inc, fem::MaterialSpec{}, {fem::WindingSpec{}}));
        d.kb = reg::kernel_bases(d.inc);
        return d;
    }();
    return d;
}

}  // namespace

TEST_SUITE("reg") {

TEST_CASE("kernel_incidence on a path and a cycle") {
    auto P = la::from_triplets(2, 3, {Triplet(0, 0, 1), Triplet(0, 1, -1), Triplet(1, 1, 1), Triplet(1, 2, -1)});
    const auto kp = reg::kernel_incidence(P);
    CHECK(kp.provenance == reg::Provenance::Graph);
    REQUIRE(kp.basis.cols() == 1);
    const la::Vector v = D(kp.basis).col(0);
    CHECK(v(0) != 0.0);
    CHECK(v == la::Vector::Constant(3, v(0)));

    // edges (0,1), (0,2), (1,2) of a triangle; columns are edges
    auto G0 = la::from_triplets(3, 3, {Triplet(0, 0, 1), Triplet(0, 1, -1), Triplet(1, 0, 1), Triplet(1, 2, -1),
                                       Triplet(2, 1, 1), Triplet(2, 2, -1)});
    const auto kc = reg::kernel_incidence(la::transpose(G0));
    CHECK(kc.provenance == reg::Provenance::Graph);
    REQUIRE(kc.basis.cols() == 1);
    la::SparseMatrix z = la::transpose(G0) * kc.basis;
    z.prune(0.0);
    CHECK(z.nonZeros() == 0);

    // a row with one entry ties its node to ground
    auto T = la::from_triplets(2, 2, {Triplet(0, 0, 1), Triplet(1, 0, 1), Triplet(1, 1, -1)});
    CHECK(reg::kernel_incidence(T).basis.cols() == 0);

    auto Q = la::from_triplets(1, 2, {Triplet(0, 0, 2), Triplet(0, 1, 1)});
    const auto kq = reg::kernel_incidence(Q);
    CHECK(kq.provenance == reg::Provenance::Fallback);
    CHECK(kq.basis.cols() == 1);
    CHECK((D(Q) * D(kq.basis)).norm() <= 1e-14);
}

TEST_CASE("toy C2 bases") {
    auto C2 = la::from_triplets(1, 2, {Triplet(0, 0, 1), Triplet(0, 1, 1)});
    const auto kb = reg::kernel_bases_dense(C2);
    REQUIRE(kb.k2 == 1);
    const la::Vector y = D(kb.Y).col(0), yh = D(kb.Yhat).col(0);
    CHECK(std::abs(y(0) + y(1)) <= 1e-15 * y.norm());
    CHECK(std::abs(yh(0) - yh(1)) <= 1e-15 * yh.norm());
    CHECK(reg::check_kernel_bases(kb, C2).ok);
}

TEST_CASE("toy regularized matrices") {
    const auto rs = fixtures::toy();
    CHECK(D(rs->sparse_Er()) == (la::DenseMatrix(2, 2) << 4, 1, 1, 1).finished());
    CHECK(D(rs->sparse_Ar()) == la::DenseMatrix::Constant(2, 2, -2.0));
    CHECK(rs->Br() == la::DenseMatrix::Constant(2, 1, 1.0));
    la::Vector x(2);
    x << 0.5, -2.0;
    CHECK((rs->apply_Er(x) - D(rs->sparse_Er()) * x).norm() == 0.0);
    CHECK((rs->apply_Ar(x) - D(rs->sparse_Ar()) * x).norm() == 0.0);
    CHECK(rs->nr() == 2);
}

TEST_CASE("theorem 1 on toy systems") {
    const auto s = toy3();
    const auto kb = reg::kernel_bases_dense(s->C2);
    const auto r = reg::theorem1_check(*s, kb, true);
    CHECK(r.pass);
    CHECK(r.k2 == 1);
    CHECK(r.dense_kernel_dim == 1);
    la::Vector w(3);
    w << 0, 1, -1;
    const la::DenseMatrix E = D(s->M) + D(s->X) * D(s->X).transpose();
    CHECK((E * w).norm() == 0.0);
    CHECK((D(s->K) * w).norm() == 0.0);

    const auto t = fixtures::toy();
    const auto r0 = reg::theorem1_check(t->sys(), t->bases(), true);
    CHECK(r0.pass);
    CHECK(r0.dense_kernel_dim == 0);
}

TEST_CASE("rank deficient coupling is rejected") {
    auto C = la::from_triplets(1, 2, {Triplet(0, 0, 1.0), Triplet(0, 1, 1.0)});
    auto M = la::from_triplets(2, 2, {Triplet(0, 0, 3.0)});
    auto Mn = la::from_triplets(1, 1, {Triplet(0, 0, 2.0)});
    la::SparseMatrix U(1, 1);
    auto s = std::make_shared<fem::AssembledSystem>(
        fem::assemble_from_blocks(C, M, Mn, U, la::DenseMatrix::Constant(1, 1, 1.0), 1));
    reg::KernelBases kb;
    kb.n2 = 1;
    kb.Y = la::SparseMatrix(1, 0);
    kb.Yhat = la::identity(1);
    CHECK_THROWS_WITH_AS(reg::RegularizedSystem(s, kb), doctest::Contains("rank deficient"), NumericalError);
}

TEST_CASE("desk bases are exact") {
    const auto& d = desk();
    CHECK(d.kb.provenance == reg::Provenance::Graph);
    CHECK(la::all_integer(d.kb.Y));
    CHECK(la::all_integer(d.kb.Yhat));
    CHECK(d.kb.k2 + d.kb.Yhat.cols() == d.kb.n2);
    const auto rg = reg::reduced_gradient(d.inc);
    const auto kc = reg::check_kernel_bases(d.kb, d.sys->C2, &rg.G2);
    CHECK(kc.ok);
    CHECK(kc.C2Y == 0.0);
    CHECK(kc.Z1G2Yhat == 0.0);
    CHECK(kc.rank == d.kb.n2);
    const auto t1 = reg::theorem1_check(*d.sys, d.kb, false);
    CHECK(t1.exact);
    CHECK(t1.pass);
    // The reduced gradient has full column rank on the interior nodes.
    CHECK(la::numerical_rank(la::DenseMatrix(rg.G)) == rg.G.cols());
}

TEST_CASE("desk regularized pencil is semidefinite") {
    const auto& d = desk();
    const reg::RegularizedSystem rs(d.sys, d.kb);
    CHECK(rs.nr() == rs.n1() + rs.n2() - rs.k2());
    std::mt19937_64 g(9);
    const la::DenseMatrix X = fixtures::random_matrix(g, rs.nr(), 100);
    const la::DenseMatrix EX = rs.apply_Er(X), AX = rs.apply_Ar(X);
    const double en = EX.norm() / X.norm(), an = AX.norm() / X.norm();
    for (int j = 0; j < 100; ++j) {
        CHECK(X.col(j).dot(EX.col(j)) >= -1e-12 * en * X.col(j).squaredNorm());
        CHECK(-X.col(j).dot(AX.col(j)) >= -1e-12 * an * X.col(j).squaredNorm());
    }
    // factored products agree with the explicit ones
    const la::DenseMatrix Er = D(rs.sparse_Er());
    CHECK((Er * X.leftCols(5) - EX.leftCols(5)).norm() <= 1e-13 * EX.leftCols(5).norm());
}

TEST_CASE("small fixture: regularity and trivial common kernel") {
    const auto s = fixtures::small();
    const auto& rs = *s.rs;
    const la::SparseMatrix E = rs.sparse_Er(), A = rs.sparse_Ar();
    for (double lam : {1e-3, 0.1, 1.0, 10.0, 1e4}) {
        const la::SparseMatrix P = lam * E - A;
        CHECK_NOTHROW(la::factorize(P));
    }
    const la::DenseMatrix Ed = D(E), Ad = D(A);
    la::DenseMatrix S(2 * rs.nr(), rs.nr());
    S << Ed / Ed.norm(), Ad / Ad.norm();
    CHECK(la::numerical_rank(S, 1e-12) == rs.nr());
    const auto t1 = reg::theorem1_check(*s.sys, rs.bases(), true);
    CHECK(t1.pass);
    CHECK(t1.dense_kernel_dim == rs.k2());
}

TEST_CASE("scaling R scales B_r inversely") {
    const auto s = fixtures::small();
    const double alpha = 8.0;
    const auto& a = *s.sys;
    auto scaled = std::make_shared<fem::AssembledSystem>(
        fem::assemble_from_blocks(a.C, a.M, a.M_nu, a.Upsilon, alpha * a.R, a.n1));
    const reg::RegularizedSystem r2(scaled, s.rs->bases());
    CHECK((r2.Br() - s.rs->Br() / alpha).norm() <= 1e-15 * s.rs->Br().norm());
}

}
