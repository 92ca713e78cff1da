#include "mqsbt/fem/assembly.hpp"

#include "mqsbt/errors.hpp"
#include "mqsbt/fem/whitney.hpp"
#include "mqsbt/la/sparse.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace mqsbt::fem {

namespace {

struct SortedTet {
    std::array<int, 4> v;  // ascending global node ids
    TetGeometry geo;
};

SortedTet sorted_tet(const mesh::Mesh& m, int t) {
    SortedTet s;
    s.v = m.tets[t];
    std::sort(s.v.begin(), s.v.end());
    std::array<Vec3, 4> x;
    for (int i = 0; i < 4; ++i) x[i] = m.nodes[s.v[i]];
    s.geo = tet_geometry(x);
    return s;
}

std::vector<int> face_rows(const mesh::Mesh& m, const mesh::IncidenceSet& inc) {
    std::vector<int> row(m.num_faces(), -1);
    for (size_t k = 0; k < inc.face_ids.size(); ++k) row[inc.face_ids[k]] = static_cast<int>(k);
    return row;
}

std::string num(double v) {
    char b[48];
    std::snprintf(b, sizeof b, "%.6g", v);
    return b;
}

}  // namespace

void validate(const MaterialSpec& mat) {
    if (!(mat.sigma1 > 0)) throw ValidationError("material.sigma1 must be positive");
    if (!(mat.nu_iron > 0) || !(mat.nu_air > 0)) throw ValidationError("material reluctivities must be positive");
    if (mat.R.rows() == 0 || mat.R.rows() != mat.R.cols()) throw ValidationError("material.R must be square");
    if ((mat.R - mat.R.transpose()).norm() > 0) throw ValidationError("material.R must be symmetric");
    Eigen::LLT<la::DenseMatrix> llt(mat.R);
    if (llt.info() != Eigen::Success) throw ValidationError("material.R must be positive definite");
}

double WindingSpec::g(double rho) const {
    const double slope = turns / area;
    if (rho <= r3) return slope * (r4 - r3);
    if (rho >= r4) return 0.0;
    return slope * (r4 - rho);
}

void validate(const WindingSpec& w) {
    if (!(w.turns > 0) || !(w.area > 0)) throw ValidationError("winding turns and area must be positive");
    if (!(0 < w.r3 && w.r3 < w.r4)) throw ValidationError("winding needs 0 < r3 < r4");
    if (!(w.z3 < w.z4)) throw ValidationError("winding needs z3 < z4");
}

std::vector<int> edge_columns(const mesh::Mesh& m, const mesh::IncidenceSet& inc) {
    std::vector<int> col(m.num_edges(), -1);
    for (size_t k = 0; k < inc.edge_ids.size(); ++k) col[inc.edge_ids[k]] = static_cast<int>(k);
    return col;
}

la::SparseMatrix assemble_edge_mass(const mesh::Mesh& m, const mesh::IncidenceSet& inc,
                                    const std::function<double(mesh::Region)>& sigma) {
    const auto col = edge_columns(m, inc);
    std::vector<la::Triplet> t;
    for (int e = 0; e < m.num_tets(); ++e) {
        const double s = sigma(m.regions[e]);
        if (s == 0.0) continue;
        const SortedTet st = sorted_tet(m, e);
        const Mat6 Me = element_edge_mass(st.geo, s);
        int gid[6];
        for (int i = 0; i < 6; ++i) gid[i] = col[m.edge_id(st.v[kEdgeNodes[i][0]], st.v[kEdgeNodes[i][1]])];
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                if (gid[i] >= 0 && gid[j] >= 0) t.emplace_back(gid[i], gid[j], Me[i][j]);
    }
    return la::from_triplets(inc.num_edges(), inc.num_edges(), t);
}

la::SparseMatrix assemble_face_mass(const mesh::Mesh& m, const mesh::IncidenceSet& inc,
                                    const std::function<double(mesh::Region)>& nu) {
    const auto row = face_rows(m, inc);
    std::vector<la::Triplet> t;
    for (int e = 0; e < m.num_tets(); ++e) {
        const SortedTet st = sorted_tet(m, e);
        const Mat4 Me = element_face_mass(st.geo, nu(m.regions[e]));
        int gid[4];
        for (int i = 0; i < 4; ++i)
            gid[i] = row[m.face_id(st.v[kFaceNodes[i][0]], st.v[kFaceNodes[i][1]], st.v[kFaceNodes[i][2]])];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                if (gid[i] >= 0 && gid[j] >= 0) t.emplace_back(gid[i], gid[j], Me[i][j]);
    }
    const int nf = static_cast<int>(inc.face_ids.size());
    return la::from_triplets(nf, nf, t);
}

la::SparseMatrix assemble_face_load(const mesh::Mesh& m, const mesh::IncidenceSet& inc,
                                    const std::vector<TetField>& fields) {
    const auto row = face_rows(m, inc);
    std::vector<la::Triplet> t;
    for (int e = 0; e < m.num_tets(); ++e) {
        const SortedTet st = sorted_tet(m, e);
        int gid[4];
        for (int i = 0; i < 4; ++i)
            gid[i] = row[m.face_id(st.v[kFaceNodes[i][0]], st.v[kFaceNodes[i][1]], st.v[kFaceNodes[i][2]])];
        for (size_t j = 0; j < fields.size(); ++j) {
            double acc[4] = {0, 0, 0, 0};
            bool any = false;
            for (const auto& q : quadrature_deg2()) {
                Vec3 x{0, 0, 0};
                for (int i = 0; i < 4; ++i)
                    for (int d = 0; d < 3; ++d) x[d] += q.bary[i] * st.geo.x[i][d];
                const Vec3 f = fields[j](e, x);
                if (f[0] == 0.0 && f[1] == 0.0 && f[2] == 0.0) continue;
                any = true;
                for (int i = 0; i < 4; ++i)
                    acc[i] += q.weight * st.geo.volume * dot(f, face_form(st.geo, i, q.bary));
            }
            if (!any) continue;
            for (int i = 0; i < 4; ++i)
                if (gid[i] >= 0) t.emplace_back(gid[i], static_cast<int>(j), acc[i]);
        }
    }
    return la::from_triplets(static_cast<la::Index>(inc.face_ids.size()),
                             static_cast<la::Index>(fields.size()), t);
}

la::SparseMatrix assemble_upsilon(const mesh::Mesh& m, const mesh::IncidenceSet& inc,
                                  const std::vector<WindingSpec>& windings) {
    std::vector<TetField> fields;
    for (const auto& w : windings) {
        validate(w);
        // h per tet: the tet must lie entirely inside or outside the slab.
        std::vector<double> h(m.num_tets(), 0.0);
        const double ztol = 1e-12 * std::max(std::abs(w.z3), std::abs(w.z4)) + 1e-15;
        for (int t = 0; t < m.num_tets(); ++t) {
            double zmin = 1e300, zmax = -1e300;
            for (int v : m.tets[t]) {
                zmin = std::min(zmin, m.nodes[v][2]);
                zmax = std::max(zmax, m.nodes[v][2]);
            }
            const bool inside = zmin >= w.z3 - ztol && zmax <= w.z4 + ztol;
            const bool outside = zmax <= w.z3 + ztol || zmin >= w.z4 - ztol;
            if (!inside && !outside)
                throw ValidationError("assemble_upsilon: misaligned winding, tet " + std::to_string(t) +
                                      " straddles z3 = " + num(w.z3) + " or z4 = " + num(w.z4));
            h[t] = inside ? 1.0 : 0.0;
        }
        // psi must be affine on every tet carrying it.
        const double scale = w.g(0.0);
        for (int t = 0; t < m.num_tets(); ++t) {
            if (h[t] == 0.0) continue;
            double gv[4];
            for (int i = 0; i < 4; ++i) {
                const auto& p = m.nodes[m.tets[t][i]];
                gv[i] = w.g(std::max(std::abs(p[0]), std::abs(p[1])));
            }
            for (const auto& q : quadrature_deg2()) {
                double x = 0, y = 0, interp = 0;
                for (int i = 0; i < 4; ++i) {
                    const auto& p = m.nodes[m.tets[t][i]];
                    x += q.bary[i] * p[0];
                    y += q.bary[i] * p[1];
                    interp += q.bary[i] * gv[i];
                }
                const double exact = w.g(std::max(std::abs(x), std::abs(y)));
                if (std::abs(exact - interp) > 1e-10 * scale)
                    throw ValidationError("assemble_upsilon: misaligned winding, stream function is not "
                                          "affine on tet " + std::to_string(t) +
                                          " (r3 = " + num(w.r3) + ", r4 = " + num(w.r4) + ")");
            }
        }
        fields.push_back([w, h](int t, const Vec3& x) -> Vec3 {
            if (h[t] == 0.0) return {0, 0, 0};
            return {0, 0, w.g(std::max(std::abs(x[0]), std::abs(x[1])))};
        });
    }
    return assemble_face_load(m, inc, fields);
}

AssembledSystem assemble_from_blocks(const la::SparseMatrix& C, const la::SparseMatrix& M,
                                     const la::SparseMatrix& M_nu, const la::SparseMatrix& Upsilon,
                                     const la::DenseMatrix& R, int n1) {
    const int n = static_cast<int>(C.cols());
    if (n == 0) throw ValidationError("system has no interior edges");
    if (M.rows() != n || M.cols() != n) throw ValidationError("edge mass size does not match C");
    if (M_nu.rows() != C.rows() || M_nu.cols() != C.rows()) throw ValidationError("face mass size does not match C");
    if (Upsilon.rows() != C.rows()) throw ValidationError("Upsilon rows do not match C");
    if (R.rows() != Upsilon.cols() || R.cols() != Upsilon.cols()) throw ValidationError("R must be m x m");
    if (n1 < 0 || n1 > n) throw ValidationError("invalid conducting block size");

    AssembledSystem s;
    s.n1 = n1;
    s.n2 = n - n1;
    s.m = static_cast<int>(Upsilon.cols());
    s.C = C;
    s.M = M;
    s.M_nu = M_nu;
    s.Upsilon = Upsilon;
    s.R = R;
    std::vector<int> c1(n1), c2(s.n2);
    for (int i = 0; i < n1; ++i) c1[i] = i;
    for (int i = 0; i < s.n2; ++i) c2[i] = n1 + i;
    s.C1 = la::select_cols(C, c1);
    s.C2 = la::select_cols(C, c2);
    s.M11 = la::select_cols(la::select_rows(M, c1), c1);
    const la::SparseMatrix Ct = la::transpose(C);
    s.X = Ct * Upsilon;
    s.X.makeCompressed();
    s.X1 = la::select_rows(s.X, c1);
    s.X2 = la::select_rows(s.X, c2);
    s.X1_norm = la::frobenius_norm(s.X1);
    s.K = Ct * (M_nu * C);
    // the sparse product is symmetric only up to summation order
    s.K = 0.5 * (s.K + la::SparseMatrix(s.K.transpose()));
    s.K.makeCompressed();
    s.K11 = la::select_cols(la::select_rows(s.K, c1), c1);
    s.K12 = la::select_cols(la::select_rows(s.K, c1), c2);
    s.K21 = la::select_cols(la::select_rows(s.K, c2), c1);
    s.K22 = la::select_cols(la::select_rows(s.K, c2), c2);

    for (la::Index i = 0; i < M.outerSize(); ++i)
        for (la::SparseMatrix::InnerIterator it(M, i); it; ++it)
            if (it.row() >= n1 || it.col() >= n1)
                throw ValidationError("edge mass has entries outside the conducting block");
    if (n1 > 0) {
        Eigen::SparseMatrix<double> M11c = s.M11;
        Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(M11c);
        if (llt.info() != Eigen::Success)
            throw NumericalError("conducting mass block M11 is not positive definite");
    }
    return s;
}

AssembledSystem build_system(const mesh::Mesh& m, const mesh::IncidenceSet& inc,
                             const MaterialSpec& mat, const std::vector<WindingSpec>& windings) {
    validate(mat);
    if (!inc.eliminated) throw ValidationError("build_system expects a boundary-eliminated incidence set");
    if (static_cast<int>(windings.size()) != mat.R.rows())
        throw ValidationError("number of windings must match the size of R");
    auto sigma = [&](mesh::Region r) { return r == mesh::Region::Iron ? mat.sigma1 : 0.0; };
    auto nu = [&](mesh::Region r) { return r == mesh::Region::Iron ? mat.nu_iron : mat.nu_air; };
    const la::SparseMatrix M = assemble_edge_mass(m, inc, sigma);
    const la::SparseMatrix Mnu = assemble_face_mass(m, inc, nu);
    const la::SparseMatrix U = assemble_upsilon(m, inc, windings);
    return assemble_from_blocks(inc.C, M, Mnu, U, mat.R, inc.n1);
}

}  // namespace mqsbt::fem
