#pragma once

#include <array>

namespace mqsbt::fem {

using Vec3 = std::array<double, 3>;

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

// Local numbering on a tet whose vertices are in ascending global order:
// edges (0,1),(0,2),(0,3),(1,2),(1,3),(2,3); faces (0,1,2),(0,1,3),(0,2,3),(1,2,3).
inline constexpr int kEdgeNodes[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
inline constexpr int kFaceNodes[4][3] = {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};

// Barycentric data of one tetrahedron.
struct TetGeometry {
    std::array<Vec3, 4> x;
    std::array<Vec3, 4> grad;  // gradients of the barycentric coordinates
    double volume = 0.0;       // absolute
};
TetGeometry tet_geometry(const std::array<Vec3, 4>& x);

// phi_ab = l_a grad l_b - l_b grad l_a at barycentric point l.
Vec3 edge_form(const TetGeometry& g, int e, const std::array<double, 4>& l);
// curl phi_ab = 2 grad l_a x grad l_b
Vec3 edge_curl(const TetGeometry& g, int e);
// phi_abc = 2 (l_a grad l_b x grad l_c + l_b grad l_c x grad l_a + l_c grad l_a x grad l_b)
Vec3 face_form(const TetGeometry& g, int f, const std::array<double, 4>& l);

// Symmetric 4-point rule, exact for polynomials of degree 2.
struct QuadPoint {
    std::array<double, 4> bary;
    double weight;  // fraction of the volume
};
const std::array<QuadPoint, 4>& quadrature_deg2();

using Mat6 = std::array<std::array<double, 6>, 6>;
using Mat4 = std::array<std::array<double, 4>, 4>;

Mat6 element_edge_mass(const TetGeometry& g, double sigma);
Mat4 element_face_mass(const TetGeometry& g, double nu);
Mat6 element_curl_curl(const TetGeometry& g, double nu);

// Local face-edge incidence with the global sign conventions.
inline constexpr int kLocalC[4][6] = {
    {1, -1, 0, 1, 0, 0},  // (0,1,2): +01 +12 -02
    {1, 0, -1, 0, 1, 0},  // (0,1,3): +01 +13 -03
    {0, 1, -1, 0, 0, 1},  // (0,2,3): +02 +23 -03
    {0, 0, 0, 1, -1, 1},  // (1,2,3): +12 +23 -13
};

}  // namespace mqsbt::fem
