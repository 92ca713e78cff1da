#pragma once

#include "mqsbt/la/types.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mqsbt::mesh {

// Box [-c1,c1]x[-c2,c2]x[-c3,c3] with square (max-norm) shells around the
// vertical axis. rho(x,y) = max(|x|,|y|).
struct GeometrySpec {
    double c1 = 0.09, c2 = 0.09, c3 = 0.09;
    double r1 = 0.01, r2 = 0.03, r3 = 0.05, r4 = 0.07;
    double z1 = -0.07, z2 = 0.07, z3 = -0.03, z4 = 0.03;
    int resolution = 9;
    // Off gives an all-air box with no shell constraints.
    bool shells = true;
};

void validate(const GeometrySpec& g);

enum class Region : std::uint8_t { Air = 0, Iron = 1, Coil = 2 };
const char* region_name(Region r);

using Point = std::array<double, 3>;

struct Mesh {
    std::vector<Point> nodes;
    std::vector<std::array<int, 4>> tets;  // positive orientation
    std::vector<Region> regions;
    std::vector<std::array<int, 2>> edges;  // sorted node pairs, lexicographic ids
    std::vector<std::array<int, 3>> faces;  // sorted node triples, lexicographic ids
    // Boundary planes as bit masks: bit 2d for -c_d, bit 2d+1 for +c_d.
    std::vector<std::uint8_t> node_planes;
    std::vector<char> node_boundary, edge_boundary, face_boundary;
    std::array<double, 3> half_widths{};

    int num_nodes() const { return static_cast<int>(nodes.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    int num_faces() const { return static_cast<int>(faces.size()); }
    int num_tets() const { return static_cast<int>(tets.size()); }

    double tet_volume(int t) const;
    Point tet_centroid(int t) const;
    int edge_id(int a, int b) const;         // -1 if absent
    int face_id(int a, int b, int c) const;  // -1 if absent
};

// Builds edges, faces and boundary flags from nodes and tets. Tets with
// negative volume are reoriented; zero volume throws.
Mesh build_mesh(std::vector<Point> nodes, std::vector<std::array<int, 4>> tets,
                std::vector<Region> regions, std::array<double, 3> half_widths);

// Structured Kuhn mesh; every cell is split into 6 tetrahedra, mirrored per
// axis about the centre so that the |x| = |y| diagonals lie on tet faces.
Mesh generate_mesh(const GeometrySpec& spec);

struct LatticeCounts {
    long nodes, edges, faces, tets;
};
LatticeCounts kuhn_counts(long n);

// Plain-text export with NODES / TETS / REGIONS sections and 1-based ids.
void write_mesh(const std::string& path, const Mesh& mesh);
Mesh read_mesh(const std::string& path);

}  // namespace mqsbt::mesh
