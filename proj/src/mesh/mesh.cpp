#include "mqsbt/mesh/mesh.hpp"

#include "mqsbt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace mqsbt::mesh {

namespace {

double signed_volume(const Point& a, const Point& b, const Point& c, const Point& d) {
    const double u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]};
    const double v[3] = {c[0] - a[0], c[1] - a[1], c[2] - a[2]};
    const double w[3] = {d[0] - a[0], d[1] - a[1], d[2] - a[2]};
    const double det = u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) +
                       u[2] * (v[0] * w[1] - v[1] * w[0]);
    return det / 6.0;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Index of v on the grid -c + 2c i / n, or -1 if v is not a grid coordinate.
int grid_index(double v, double c, int n) {
    const double x = (v + c) * n / (2.0 * c);
    const double r = std::round(x);
    if (std::abs(x - r) > 1e-9 || r < 0 || r > n) return -1;
    return static_cast<int>(r);
}

}  // namespace

const char* region_name(Region r) {
    switch (r) {
        case Region::Iron: return "iron";
        case Region::Coil: return "coil";
        default: return "air";
    }
}

void validate(const GeometrySpec& g) {
    if (!(g.c1 > 0 && g.c2 > 0 && g.c3 > 0)) throw ValidationError("geometry: half-widths must be positive");
    if (g.resolution < 1) throw ValidationError("geometry.resolution must be >= 1");
    if (!g.shells) return;
    if (!(0 < g.r1 && g.r1 < g.r2 && g.r2 < g.r3 && g.r3 < g.r4 && g.r4 < std::min(g.c1, g.c2)))
        throw ValidationError("geometry: need 0 < r1 < r2 < r3 < r4 < min(c1, c2)");
    if (!(-g.c3 < g.z1 && g.z1 < g.z3 && g.z3 < g.z4 && g.z4 < g.z2 && g.z2 < g.c3))
        throw ValidationError("geometry: need -c3 < z1 < z3 < z4 < z2 < c3");
    if (g.c1 != g.c2)
        throw ValidationError("geometry: square shells need c1 == c2 so that the shell corner "
                              "diagonals lie on tetrahedron faces");
    const int n = g.resolution;
    const std::pair<const char*, double> radial[] = {{"r1", g.r1}, {"r2", g.r2}, {"r3", g.r3}, {"r4", g.r4}};
    for (auto [name, r] : radial) {
        if (grid_index(r, g.c1, n) < 0 || grid_index(-r, g.c1, n) < 0)
            throw ValidationError(std::string("geometry: ") + name + " = " + fmt(r) +
                                  " is not on a grid plane at resolution " + std::to_string(n));
    }
    const std::pair<const char*, double> axial[] = {{"z1", g.z1}, {"z2", g.z2}, {"z3", g.z3}, {"z4", g.z4}};
    for (auto [name, z] : axial) {
        if (grid_index(z, g.c3, n) < 0)
            throw ValidationError(std::string("geometry: ") + name + " = " + fmt(z) +
                                  " is not on a grid plane at resolution " + std::to_string(n));
    }
}

double Mesh::tet_volume(int t) const {
    const auto& T = tets[t];
    return signed_volume(nodes[T[0]], nodes[T[1]], nodes[T[2]], nodes[T[3]]);
}

Point Mesh::tet_centroid(int t) const {
    Point c{0, 0, 0};
    for (int k = 0; k < 4; ++k)
        for (int d = 0; d < 3; ++d) c[d] += 0.25 * nodes[tets[t][k]][d];
    return c;
}

int Mesh::edge_id(int a, int b) const {
    std::array<int, 2> key{std::min(a, b), std::max(a, b)};
    auto it = std::lower_bound(edges.begin(), edges.end(), key);
    return (it != edges.end() && *it == key) ? static_cast<int>(it - edges.begin()) : -1;
}

int Mesh::face_id(int a, int b, int c) const {
    std::array<int, 3> key{a, b, c};
    std::sort(key.begin(), key.end());
    auto it = std::lower_bound(faces.begin(), faces.end(), key);
    return (it != faces.end() && *it == key) ? static_cast<int>(it - faces.begin()) : -1;
}

Mesh build_mesh(std::vector<Point> nodes, std::vector<std::array<int, 4>> tets,
                std::vector<Region> regions, std::array<double, 3> half_widths) {
    if (regions.size() != tets.size()) throw ValidationError("build_mesh: one region label per tet required");
    Mesh m;
    m.nodes = std::move(nodes);
    m.tets = std::move(tets);
    m.regions = std::move(regions);
    m.half_widths = half_widths;
    const int nn = m.num_nodes();
    for (int t = 0; t < m.num_tets(); ++t) {
        for (int k = 0; k < 4; ++k)
            if (m.tets[t][k] < 0 || m.tets[t][k] >= nn)
                throw ValidationError("build_mesh: tet " + std::to_string(t) + " references a missing node");
        double v = m.tet_volume(t);
        if (v < 0) {
            std::swap(m.tets[t][2], m.tets[t][3]);
            v = -v;
        }
        if (!(v > 0)) throw ValidationError("degenerate tetrahedron " + std::to_string(t) + " (volume <= 0)");
    }
    for (const auto& T : m.tets) {
        std::array<int, 4> s = T;
        std::sort(s.begin(), s.end());
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) m.edges.push_back({s[i], s[j]});
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                for (int k = j + 1; k < 4; ++k) m.faces.push_back({s[i], s[j], s[k]});
    }
    std::sort(m.edges.begin(), m.edges.end());
    m.edges.erase(std::unique(m.edges.begin(), m.edges.end()), m.edges.end());
    std::sort(m.faces.begin(), m.faces.end());
    m.faces.erase(std::unique(m.faces.begin(), m.faces.end()), m.faces.end());

    m.node_planes.assign(nn, 0);
    for (int i = 0; i < nn; ++i)
        for (int d = 0; d < 3; ++d) {
            const double c = half_widths[d];
            const double tol = 1e-12 * c;
            if (std::abs(m.nodes[i][d] + c) <= tol) m.node_planes[i] |= static_cast<std::uint8_t>(1u << (2 * d));
            if (std::abs(m.nodes[i][d] - c) <= tol) m.node_planes[i] |= static_cast<std::uint8_t>(1u << (2 * d + 1));
        }
    m.node_boundary.resize(nn);
    for (int i = 0; i < nn; ++i) m.node_boundary[i] = m.node_planes[i] != 0;
    m.edge_boundary.resize(m.edges.size());
    for (size_t e = 0; e < m.edges.size(); ++e)
        m.edge_boundary[e] = (m.node_planes[m.edges[e][0]] & m.node_planes[m.edges[e][1]]) != 0;
    m.face_boundary.resize(m.faces.size());
    for (size_t f = 0; f < m.faces.size(); ++f) {
        const auto& F = m.faces[f];
        m.face_boundary[f] = (m.node_planes[F[0]] & m.node_planes[F[1]] & m.node_planes[F[2]]) != 0;
    }
    return m;
}

LatticeCounts kuhn_counts(long n) {
    return {(n + 1) * (n + 1) * (n + 1), 3 * n * (n + 1) * (n + 1) + 3 * n * n * (n + 1) + n * n * n,
            6 * n * n * (n + 1) + 6 * n * n * n, 6 * n * n * n};
}

Mesh generate_mesh(const GeometrySpec& g) {
    validate(g);
    const int n = g.resolution;
    const double c[3] = {g.c1, g.c2, g.c3};
    auto coord = [&](int d, int i) { return -c[d] + 2.0 * c[d] * i / n; };
    auto nid = [&](int i, int j, int k) { return i + (n + 1) * (j + (n + 1) * k); };

    std::vector<Point> nodes;
    nodes.reserve(static_cast<size_t>(n + 1) * (n + 1) * (n + 1));
    for (int k = 0; k <= n; ++k)
        for (int j = 0; j <= n; ++j)
            for (int i = 0; i <= n; ++i) nodes.push_back({coord(0, i), coord(1, j), coord(2, k)});

    // Mirror per axis: cells left of the centre plane flip their local axis.
    auto flips = [&](int i) { return 2 * i + 1 < n; };
    static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    std::vector<std::array<int, 4>> tets;
    std::vector<Region> regions;
    tets.reserve(6 * static_cast<size_t>(n) * n * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i) {
                const int base[3] = {i, j, k};
                const bool flip[3] = {flips(i), flips(j), flips(k)};
                for (const auto& p : perms) {
                    int loc[3] = {0, 0, 0};
                    std::array<int, 4> T{};
                    for (int s = 0; s < 4; ++s) {
                        if (s > 0) loc[p[s - 1]] = 1;
                        int idx[3];
                        for (int d = 0; d < 3; ++d) idx[d] = base[d] + (flip[d] ? 1 - loc[d] : loc[d]);
                        T[s] = nid(idx[0], idx[1], idx[2]);
                    }
                    tets.push_back(T);
                    regions.push_back(Region::Air);
                }
            }
    Mesh m = build_mesh(std::move(nodes), std::move(tets), std::move(regions), {g.c1, g.c2, g.c3});
    if (g.shells) {
        for (int t = 0; t < m.num_tets(); ++t) {
            const Point p = m.tet_centroid(t);
            const double rho = std::max(std::abs(p[0]), std::abs(p[1]));
            if (g.r1 < rho && rho < g.r2 && g.z1 < p[2] && p[2] < g.z2)
                m.regions[t] = Region::Iron;
            else if (g.r3 < rho && rho < g.r4 && g.z3 < p[2] && p[2] < g.z4)
                m.regions[t] = Region::Coil;
        }
    }
    const LatticeCounts lc = kuhn_counts(n);
    if (m.num_nodes() != lc.nodes || m.num_edges() != lc.edges || m.num_faces() != lc.faces ||
        m.num_tets() != lc.tets)
        throw NumericalError("generate_mesh: entity counts disagree with the Kuhn lattice formulas");
    return m;
}

void write_mesh(const std::string& path, const Mesh& m) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw Error("cannot open " + path + " for writing");
    std::fprintf(f, "BOX %.17g %.17g %.17g\n", m.half_widths[0], m.half_widths[1], m.half_widths[2]);
    std::fprintf(f, "NODES %d\n", m.num_nodes());
    for (int i = 0; i < m.num_nodes(); ++i)
        std::fprintf(f, "%d %.17g %.17g %.17g\n", i + 1, m.nodes[i][0], m.nodes[i][1], m.nodes[i][2]);
    std::fprintf(f, "TETS %d\n", m.num_tets());
    for (int t = 0; t < m.num_tets(); ++t)
        std::fprintf(f, "%d %d %d %d %d\n", t + 1, m.tets[t][0] + 1, m.tets[t][1] + 1, m.tets[t][2] + 1,
                     m.tets[t][3] + 1);
    std::fprintf(f, "REGIONS %d\n", m.num_tets());
    for (int t = 0; t < m.num_tets(); ++t) std::fprintf(f, "%d %s\n", t + 1, region_name(m.regions[t]));
    std::fclose(f);
}

Mesh read_mesh(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::string tag;
    std::array<double, 3> box{};
    int count = 0;
    auto expect = [&](const char* want) {
        if (!(in >> tag) || tag != want) throw ValidationError(path + ": expected section " + want);
    };
    expect("BOX");
    in >> box[0] >> box[1] >> box[2];
    expect("NODES");
    in >> count;
    std::vector<Point> nodes(count);
    for (int i = 0; i < count; ++i) {
        int id;
        if (!(in >> id >> nodes[i][0] >> nodes[i][1] >> nodes[i][2]) || id != i + 1)
            throw ValidationError(path + ": bad node line " + std::to_string(i + 1));
    }
    expect("TETS");
    in >> count;
    std::vector<std::array<int, 4>> tets(count);
    for (int t = 0; t < count; ++t) {
        int id;
        if (!(in >> id >> tets[t][0] >> tets[t][1] >> tets[t][2] >> tets[t][3]) || id != t + 1)
            throw ValidationError(path + ": bad tet line " + std::to_string(t + 1));
        for (auto& v : tets[t]) --v;
    }
    expect("REGIONS");
    in >> count;
    std::vector<Region> regions(count);
    for (int t = 0; t < count; ++t) {
        int id;
        std::string name;
        if (!(in >> id >> name) || id != t + 1) throw ValidationError(path + ": bad region line");
        regions[t] = name == "iron" ? Region::Iron : name == "coil" ? Region::Coil : Region::Air;
        if (name != "iron" && name != "coil" && name != "air")
            throw ValidationError(path + ": unknown region " + name);
    }
    return build_mesh(std::move(nodes), std::move(tets), std::move(regions), box);
}

}  // namespace mqsbt::mesh
