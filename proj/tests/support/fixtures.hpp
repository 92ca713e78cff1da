#pragma once

#include "mqsbt/fem/assembly.hpp"
#include "mqsbt/la/sparse.hpp"
#include "mqsbt/mesh/incidence.hpp"
#include "mqsbt/mesh/mesh.hpp"
#include "mqsbt/ops/context.hpp"
#include "mqsbt/reg/kernels.hpp"
#include "mqsbt/reg/regularized.hpp"

#include <cmath>
#include <memory>
#include <random>
#include <vector>

namespace fixtures {

using namespace mqsbt;

// n1 = n2 = 1, C = [1, 1], M11 = 3, M_nu = 2, Upsilon = 1, R = 1, Yhat = I.
// E_r = [[4,1],[1,1]], A_r = [[-2,-2],[-2,-2]], B_r = (1,1).
inline std::shared_ptr<const reg::RegularizedSystem> toy() {
    using la::Triplet;
    auto C = la::from_triplets(1, 2, {Triplet(0, 0, 1.0), Triplet(0, 1, 1.0)});
    auto M = la::from_triplets(2, 2, {Triplet(0, 0, 3.0)});
    auto Mn = la::from_triplets(1, 1, {Triplet(0, 0, 2.0)});
    auto U = la::from_triplets(1, 1, {Triplet(0, 0, 1.0)});
    auto sys = std::make_shared<fem::AssembledSystem>(
        fem::assemble_from_blocks(C, M, Mn, U, la::DenseMatrix::Constant(1, 1, 1.0), 1));
    reg::KernelBases kb;
    kb.n2 = 1;
    kb.k2 = 0;
    kb.Y = la::SparseMatrix(1, 0);
    kb.Yhat = la::identity(1);
    kb.provenance = reg::Provenance::Fallback;
    return std::make_shared<reg::RegularizedSystem>(sys, kb);
}

// All-air box at resolution 5 with the central column relabelled as iron
// and one winding on the ring between the first two interior grid planes.
struct Small {
    mesh::Mesh mesh;
    mesh::IncidenceSet inc;
    std::shared_ptr<const fem::AssembledSystem> sys;
    std::shared_ptr<const reg::RegularizedSystem> rs;
    int n0 = 0, ninf = 0, ns = 0;
};

inline std::vector<fem::WindingSpec> small_windings() {
    fem::WindingSpec w;
    w.r3 = 0.018;
    w.r4 = 0.054;
    w.z3 = -0.018;
    w.z4 = 0.018;
    w.turns = 10.0;
    w.area = 1e-3;
    return {w};
}

inline Small small() {
    Small s;
    mesh::GeometrySpec g;
    g.shells = false;
    g.resolution = 5;
    mesh::Mesh m = mesh::generate_mesh(g);
    for (int t = 0; t < m.num_tets(); ++t) {
        const auto c = m.tet_centroid(t);
        if (std::max(std::abs(c[0]), std::abs(c[1])) < 0.018 && std::abs(c[2]) < 0.054)
            m.regions[t] = mesh::Region::Iron;
    }
    s.mesh = mesh::build_mesh(m.nodes, m.tets, m.regions, m.half_widths);
    s.inc = mesh::eliminate_boundary(mesh::build_incidence(s.mesh), s.mesh);
    fem::MaterialSpec mat;
    mat.sigma1 = 10.0;
    mat.nu_iron = 2.0;
    mat.nu_air = 50.0;
    mat.R = la::DenseMatrix::Constant(1, 1, 0.5);
    s.sys = std::make_shared<fem::AssembledSystem>(fem::build_system(s.mesh, s.inc, mat, small_windings()));
    reg::KernelBases kb = reg::kernel_bases(s.inc);
    const int n_int = kb.num_nodes;
    s.rs = std::make_shared<reg::RegularizedSystem>(s.sys, kb);
    s.ninf = s.rs->n2() - s.rs->k2() - s.rs->m();
    s.n0 = n_int - s.rs->k2();
    s.ns = s.rs->nr() - s.n0 - s.ninf;
    return s;
}

inline la::Vector random_vector(std::mt19937_64& g, la::Index n) {
    std::normal_distribution<double> d;
    la::Vector v(n);
    for (la::Index i = 0; i < n; ++i) v(i) = d(g);
    return v;
}

inline la::DenseMatrix random_matrix(std::mt19937_64& g, la::Index r, la::Index c) {
    std::normal_distribution<double> d;
    la::DenseMatrix v(r, c);
    for (la::Index j = 0; j < c; ++j)
        for (la::Index i = 0; i < r; ++i) v(i, j) = d(g);
    return v;
}

}  // namespace fixtures
