#include "mqsbt/fem/whitney.hpp"

#include "mqsbt/errors.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace mqsbt::fem {

TetGeometry tet_geometry(const std::array<Vec3, 4>& x) {
    TetGeometry g;
    g.x = x;
    Eigen::Matrix4d A;
    for (int i = 0; i < 4; ++i) A.row(i) << 1.0, x[i][0], x[i][1], x[i][2];
    const double det = A.determinant();
    g.volume = std::abs(det) / 6.0;
    if (!(g.volume > 0)) throw ValidationError("degenerate tetrahedron (volume <= 0)");
    // lambda_i(x) = sum_k Ainv(k, i) [1 x y z]_k
    const Eigen::Matrix4d Ainv = A.inverse();
    for (int i = 0; i < 4; ++i) g.grad[i] = {Ainv(1, i), Ainv(2, i), Ainv(3, i)};
    return g;
}

Vec3 edge_form(const TetGeometry& g, int e, const std::array<double, 4>& l) {
    const int a = kEdgeNodes[e][0], b = kEdgeNodes[e][1];
    Vec3 r;
    for (int d = 0; d < 3; ++d) r[d] = l[a] * g.grad[b][d] - l[b] * g.grad[a][d];
    return r;
}

Vec3 edge_curl(const TetGeometry& g, int e) {
    Vec3 c = cross(g.grad[kEdgeNodes[e][0]], g.grad[kEdgeNodes[e][1]]);
    for (auto& v : c) v *= 2.0;
    return c;
}

Vec3 face_form(const TetGeometry& g, int f, const std::array<double, 4>& l) {
    const int a = kFaceNodes[f][0], b = kFaceNodes[f][1], c = kFaceNodes[f][2];
    const Vec3 bc = cross(g.grad[b], g.grad[c]);
    const Vec3 ca = cross(g.grad[c], g.grad[a]);
    const Vec3 ab = cross(g.grad[a], g.grad[b]);
    Vec3 r;
    for (int d = 0; d < 3; ++d) r[d] = 2.0 * (l[a] * bc[d] + l[b] * ca[d] + l[c] * ab[d]);
    return r;
}

const std::array<QuadPoint, 4>& quadrature_deg2() {
    static const std::array<QuadPoint, 4> q = [] {
        const double a = 0.5854101966249685, b = 0.1381966011250105;
        std::array<QuadPoint, 4> p{};
        for (int i = 0; i < 4; ++i) {
            p[i].bary = {b, b, b, b};
            p[i].bary[i] = a;
            p[i].weight = 0.25;
        }
        return p;
    }();
    return q;
}

Mat6 element_edge_mass(const TetGeometry& g, double sigma) {
    Mat6 M{};
    if (sigma == 0.0) return M;
    for (const auto& q : quadrature_deg2()) {
        std::array<Vec3, 6> phi;
        for (int e = 0; e < 6; ++e) phi[e] = edge_form(g, e, q.bary);
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j) M[i][j] += sigma * q.weight * g.volume * dot(phi[i], phi[j]);
    }
    return M;
}

Mat4 element_face_mass(const TetGeometry& g, double nu) {
    Mat4 M{};
    for (const auto& q : quadrature_deg2()) {
        std::array<Vec3, 4> phi;
        for (int f = 0; f < 4; ++f) phi[f] = face_form(g, f, q.bary);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) M[i][j] += nu * q.weight * g.volume * dot(phi[i], phi[j]);
    }
    return M;
}

Mat6 element_curl_curl(const TetGeometry& g, double nu) {
    Mat6 K{};
    std::array<Vec3, 6> c;
    for (int e = 0; e < 6; ++e) c[e] = edge_curl(g, e);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) K[i][j] = nu * g.volume * dot(c[i], c[j]);
    return K;
}

}  // namespace mqsbt::fem
