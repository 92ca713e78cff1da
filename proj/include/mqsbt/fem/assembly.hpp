#pragma once

#include "mqsbt/la/types.hpp"
#include "mqsbt/mesh/incidence.hpp"
#include "mqsbt/mesh/mesh.hpp"

#include <functional>
#include <vector>

namespace mqsbt::fem {

struct MaterialSpec {
    double sigma1 = 1e6;      // iron conductivity
    double nu_iron = 1.989e3;
    double nu_air = 7.958e5;  // shared by coil and air
    la::DenseMatrix R = la::DenseMatrix::Constant(1, 1, 100.0);
};
void validate(const MaterialSpec& mat);

// psi(x) = g(rho) h(z), gamma = (0, 0, psi), chi = curl gamma.
// g' = -turns/area on [r3, r4], zero elsewhere, g(r4) = 0; h = 1 on (z3, z4).
struct WindingSpec {
    double turns = 1600.0;
    double area = 2e-4;
    double r3 = 0.05, r4 = 0.07, z3 = -0.03, z4 = 0.03;

    double g(double rho) const;
};
void validate(const WindingSpec& w);

// Maps mesh edge id to its column in the incidence set (-1 if eliminated).
std::vector<int> edge_columns(const mesh::Mesh& mesh, const mesh::IncidenceSet& inc);

// Interior-edge mass weighted by a per-region conductivity.
la::SparseMatrix assemble_edge_mass(const mesh::Mesh& mesh, const mesh::IncidenceSet& inc,
                                    const std::function<double(mesh::Region)>& sigma);
// Face mass over all faces (rows of C), weighted by a per-region reluctivity.
la::SparseMatrix assemble_face_mass(const mesh::Mesh& mesh, const mesh::IncidenceSet& inc,
                                    const std::function<double(mesh::Region)>& nu);
// Upsilon_k = int gamma . phi_k^f for a vector field that is affine on every
// tetrahedron. field(t, x) evaluates it inside tet t.
using TetField = std::function<std::array<double, 3>(int tet, const std::array<double, 3>& x)>;
la::SparseMatrix assemble_face_load(const mesh::Mesh& mesh, const mesh::IncidenceSet& inc,
                                    const std::vector<TetField>& fields);
// Winding potential; throws "misaligned" when psi is not affine on a tet.
la::SparseMatrix assemble_upsilon(const mesh::Mesh& mesh, const mesh::IncidenceSet& inc,
                                  const std::vector<WindingSpec>& windings);

struct AssembledSystem {
    la::SparseMatrix C, C1, C2;  // faces x edges, split conducting | non-conducting
    la::SparseMatrix M;          // edge mass
    la::SparseMatrix M11;        // conducting block of M
    la::SparseMatrix M_nu;       // face mass
    la::SparseMatrix Upsilon;    // faces x m
    la::SparseMatrix X, X1, X2;  // C^T Upsilon and its blocks
    la::SparseMatrix K, K11, K12, K21, K22;  // C^T M_nu C and its blocks
    la::DenseMatrix R;
    int n1 = 0, n2 = 0, m = 0;
    double X1_norm = 0.0;
};

// Builds every product from the primary factors. M must vanish outside the
// conducting block for the model to be meaningful; this is checked.
AssembledSystem assemble_from_blocks(const la::SparseMatrix& C, const la::SparseMatrix& M,
                                     const la::SparseMatrix& M_nu, const la::SparseMatrix& Upsilon,
                                     const la::DenseMatrix& R, int n1);

AssembledSystem build_system(const mesh::Mesh& mesh, const mesh::IncidenceSet& inc,
                             const MaterialSpec& mat, const std::vector<WindingSpec>& windings);

}  // namespace mqsbt::fem
