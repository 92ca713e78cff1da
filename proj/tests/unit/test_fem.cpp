#include "mqsbt/errors.hpp"
#include "mqsbt/fem/assembly.hpp"
#include "mqsbt/fem/whitney.hpp"
#include "mqsbt/la/dense.hpp"
#include "mqsbt/la/sparse.hpp"
#include "mqsbt/mesh/incidence.hpp"
#include "mqsbt/mesh/mesh.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <Eigen/SparseCholesky>

#include <random>

using namespace mqsbt;
using fem::Vec3;

namespace {

// Closed-form integrals from int l_i l_j = V (1 + delta_ij) / 20.
double lam2(const fem::TetGeometry& g, int i, int j) { return g.volume * (i == j ? 2.0 : 1.0) / 20.0; }

la::DenseMatrix edge_mass_oracle(const fem::TetGeometry& g) {
    la::DenseMatrix M(6, 6);
    for (int e = 0; e < 6; ++e)
        for (int f = 0; f < 6; ++f) {
            const int a = fem::kEdgeNodes[e][0], b = fem::kEdgeNodes[e][1];
            const int c = fem::kEdgeNodes[f][0], d = fem::kEdgeNodes[f][1];
            // (l_a g_b - l_b g_a) . (l_c g_d - l_d g_c)
            M(e, f) = lam2(g, a, c) * fem::dot(g.grad[b], g.grad[d]) - lam2(g, a, d) * fem::dot(g.grad[b], g.grad[c]) -
                      lam2(g, b, c) * fem::dot(g.grad[a], g.grad[d]) + lam2(g, b, d) * fem::dot(g.grad[a], g.grad[c]);
        }
    return M;
}

// phi_f = 2 sum_i l_i w_i with w_a = g_b x g_c, w_b = g_c x g_a, w_c = g_a x g_b.
std::array<std::pair<int, Vec3>, 3> face_terms(const fem::TetGeometry& g, int f) {
    const int a = fem::kFaceNodes[f][0], b = fem::kFaceNodes[f][1], c = fem::kFaceNodes[f][2];
    return {{{a, fem::cross(g.grad[b], g.grad[c])}, {b, fem::cross(g.grad[c], g.grad[a])},
             {c, fem::cross(g.grad[a], g.grad[b])}}};
}

la::DenseMatrix face_mass_oracle(const fem::TetGeometry& g) {
    la::DenseMatrix M = la::DenseMatrix::Zero(4, 4);
    for (int f = 0; f < 4; ++f)
        for (int h = 0; h < 4; ++h)
            for (const auto& [i, wi] : face_terms(g, f))
                for (const auto& [j, wj] : face_terms(g, h)) M(f, h) += 4.0 * lam2(g, i, j) * fem::dot(wi, wj);
    return M;
}

la::Vector face_load_oracle(const fem::TetGeometry& g, const Vec3& c) {
    la::Vector u = la::Vector::Zero(4);
    for (int f = 0; f < 4; ++f)
        for (const auto& [i, w] : face_terms(g, f)) u(f) += 2.0 * (g.volume / 4.0) * fem::dot(c, w);
    return u;
}

std::array<Vec3, 4> reference_tet() { return {{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}; }

std::array<Vec3, 4> random_tet(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-1, 1);
    for (;;) {
        std::array<Vec3, 4> x;
        for (auto& p : x) p = {u(gen), u(gen), u(gen)};
        const auto g = fem::tet_geometry(x);
        if (g.volume > 1e-2) return x;
    }
}

mesh::Mesh single_tet(const std::array<Vec3, 4>& x, mesh::Region r) {
    std::vector<mesh::Point> nodes(x.begin(), x.end());
    return mesh::build_mesh(nodes, {{0, 1, 2, 3}}, {r}, {1, 1, 1});
}

la::DenseMatrix to_dense(const std::array<std::array<double, 6>, 6>& a) {
    la::DenseMatrix M(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) M(i, j) = a[i][j];
    return M;
}

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("quadrature weights") {
    double w = 0.0;
    for (const auto& q : fem::quadrature_deg2()) {
        w += q.weight;
        CHECK(q.bary[0] + q.bary[1] + q.bary[2] + q.bary[3] == doctest::Approx(1.0));
    }
    CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("reference tet edge and face mass") {
    const auto x = reference_tet();
    const auto g = fem::tet_geometry(x);
    CHECK(g.volume == doctest::Approx(1.0 / 6.0));
    const la::DenseMatrix Me = to_dense(fem::element_edge_mass(g, 1.0));
    CHECK((Me - edge_mass_oracle(g)).norm() <= 1e-14);
    const auto Mf = fem::element_face_mass(g, 1.0);
    la::DenseMatrix F(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) F(i, j) = Mf[i][j];
    CHECK((F - face_mass_oracle(g)).norm() <= 1e-14);

    // Global assembly on the one-tet mesh reproduces the element matrices.
    const auto m = single_tet(x, mesh::Region::Iron);
    const auto inc = mesh::build_incidence(m);
    const auto M = fem::assemble_edge_mass(m, inc, [](mesh::Region) { return 1.0; });
    const auto cols = fem::edge_columns(m, inc);
    for (int e = 0; e < 6; ++e)
        for (int f = 0; f < 6; ++f) {
            const int a = m.edge_id(fem::kEdgeNodes[e][0], fem::kEdgeNodes[e][1]);
            const int b = m.edge_id(fem::kEdgeNodes[f][0], fem::kEdgeNodes[f][1]);
            CHECK(M.coeff(cols[a], cols[b]) == doctest::Approx(Me(e, f)).epsilon(1e-14));
        }
    const auto Mn = fem::assemble_face_mass(m, inc, [](mesh::Region) { return 1.0; });
    CHECK((la::DenseMatrix(Mn) - face_mass_oracle(g)).norm() <= 1e-14);
}

TEST_CASE("random tets: mass oracles and curl compatibility") {
    std::mt19937_64 gen(3);
    for (int k = 0; k < 20; ++k) {
        const auto g = fem::tet_geometry(random_tet(gen));
        CHECK((to_dense(fem::element_edge_mass(g, 2.5)) - 2.5 * edge_mass_oracle(g)).norm() <=
              1e-12 * edge_mass_oracle(g).norm() * 2.5);
        const auto Mf = fem::element_face_mass(g, 3.0);
        la::DenseMatrix F(4, 4), C(4, 6);
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) F(i, j) = Mf[i][j];
            for (int j = 0; j < 6; ++j) C(i, j) = fem::kLocalC[i][j];
        }
        const la::DenseMatrix K = to_dense(fem::element_curl_curl(g, 3.0));
        const la::DenseMatrix CtMC = C.transpose() * F * C;
        CHECK((K - CtMC).norm() <= 1e-12 * CtMC.norm());
        // curl phi_e = sum_f C_fe phi_f, compared at the centroid
        const std::array<double, 4> l{0.25, 0.25, 0.25, 0.25};
        for (int e = 0; e < 6; ++e) {
            const Vec3 ce = fem::edge_curl(g, e);
            Vec3 s{0, 0, 0};
            for (int f = 0; f < 4; ++f) {
                const Vec3 pf = fem::face_form(g, f, l);
                for (int d = 0; d < 3; ++d) s[d] += fem::kLocalC[f][e] * pf[d];
            }
            for (int d = 0; d < 3; ++d) CHECK(std::abs(s[d] - ce[d]) <= 1e-10 * (1.0 + std::abs(ce[d])));
        }
    }
}

TEST_CASE("zero conductivity and reluctivity scaling") {
    const auto m = mesh::generate_mesh(mesh::GeometrySpec{});
    const auto inc = mesh::eliminate_boundary(mesh::build_incidence(m), m);
    const auto M0 = fem::assemble_edge_mass(m, inc, [](mesh::Region) { return 0.0; });
    CHECK(la::max_abs(M0) == 0.0);
    auto nu = [](mesh::Region r) { return r == mesh::Region::Iron ? 3.0 : 7.0; };
    auto nu2 = [&](mesh::Region r) { return 2.0 * nu(r); };
    const auto A = fem::assemble_face_mass(m, inc, nu), B = fem::assemble_face_mass(m, inc, nu2);
    CHECK(la::frobenius_norm(B - 2.0 * A) <= 1e-15 * la::frobenius_norm(B));
}

TEST_CASE("face load for constant and zero fields") {
    const auto x = reference_tet();
    const auto m = single_tet(x, mesh::Region::Air);
    const auto inc = mesh::build_incidence(m);
    const Vec3 c{0.3, -1.0, 2.0};
    const auto U = fem::assemble_face_load(m, inc, {[c](int, const Vec3&) { return c; }});
    const la::Vector o = face_load_oracle(fem::tet_geometry(x), c);
    CHECK((la::DenseMatrix(U).col(0) - o).norm() <= 1e-14);
    const auto Z = fem::assemble_face_load(m, inc, {[](int, const Vec3&) { return Vec3{0, 0, 0}; }});
    CHECK(la::max_abs(Z) == 0.0);
}

TEST_CASE("toy products") {
    using la::Triplet;
    auto C = la::from_triplets(1, 2, {Triplet(0, 0, 1.0), Triplet(0, 1, 1.0)});
    auto M = la::from_triplets(2, 2, {Triplet(0, 0, 3.0)});
    auto Mn = la::from_triplets(1, 1, {Triplet(0, 0, 2.0)});
    auto U = la::from_triplets(1, 1, {Triplet(0, 0, 1.0)});
    const auto s = fem::assemble_from_blocks(C, M, Mn, U, la::DenseMatrix::Constant(1, 1, 1.0), 1);
    CHECK(la::DenseMatrix(s.K) == la::DenseMatrix::Constant(2, 2, 2.0));
    CHECK(la::DenseMatrix(s.X) == la::DenseMatrix::Constant(2, 1, 1.0));
    CHECK(s.n1 == 1);
    CHECK(s.n2 == 1);
    // M with a non-conducting entry is rejected.
    auto Mbad = la::from_triplets(2, 2, {Triplet(0, 0, 3.0), Triplet(1, 1, 1.0)});
    CHECK_THROWS_AS(fem::assemble_from_blocks(C, Mbad, Mn, U, la::DenseMatrix::Constant(1, 1, 1.0), 1),
                    ValidationError);
}

TEST_CASE("desk system properties") {
    const auto m = mesh::generate_mesh(mesh::GeometrySpec{});
    const auto inc = mesh::eliminate_boundary(mesh::build_incidence(m), m);
    fem::MaterialSpec mat;
    fem::WindingSpec w;
    const auto s = fem::build_system(m, inc, mat, {w});
    CHECK(s.m == 1);
    CHECK(s.n1 > 0);

    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> l11(Eigen::SparseMatrix<double>(s.M11));
    CHECK(l11.info() == Eigen::Success);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> lnu(Eigen::SparseMatrix<double>(s.M_nu));
    CHECK(lnu.info() == Eigen::Success);

    CHECK(la::numerical_rank(la::DenseMatrix(s.Upsilon)) == 1);
    CHECK(la::is_symmetric(s.K));
    // X1 = C1^T Upsilon vanishes analytically; Upsilon is nonzero on the iron
    // faces (psi is constant inside r3), so the product cancels to round-off.
    INFO("||X1||_F = " << s.X1_norm << ", ||X||_F = " << la::frobenius_norm(s.X));
    CHECK(s.X1_norm <= 1e-14 * la::frobenius_norm(s.X));
    std::mt19937_64 gen(5);
    const double kn = la::frobenius_norm(s.K);
    for (int k = 0; k < 100; ++k) {
        const la::Vector x = fixtures::random_vector(gen, s.K.cols());
        CHECK(x.dot(s.K * x) >= -1e-12 * kn * x.squaredNorm());
    }
    // K = C^T M_nu C
    CHECK(la::frobenius_norm(s.K - la::SparseMatrix(la::transpose(s.C) * s.M_nu * s.C)) <= 1e-13 * kn);
}

TEST_CASE("winding alignment and validation") {
    const auto m = mesh::generate_mesh(mesh::GeometrySpec{});
    const auto inc = mesh::eliminate_boundary(mesh::build_incidence(m), m);
    fem::WindingSpec w;
    w.r3 = 0.045;
    CHECK_THROWS_WITH_AS(fem::assemble_upsilon(m, inc, {w}), doctest::Contains("misaligned"), ValidationError);
    fem::MaterialSpec mat;
    mat.R = la::DenseMatrix::Constant(1, 1, -1.0);
    CHECK_THROWS_AS(fem::validate(mat), ValidationError);
    fem::WindingSpec g;
    CHECK(g.g(0.0) == doctest::Approx(g.turns / g.area * (g.r4 - g.r3)));
    CHECK(g.g(g.r4) == 0.0);
    CHECK(g.g(1.0) == 0.0);
}

}
