#pragma once

#include "mqsbt/la/types.hpp"
#include "mqsbt/mesh/mesh.hpp"

#include <vector>

namespace mqsbt::mesh {

// C: faces x edges (discrete curl), G0: edges x nodes (discrete gradient).
// Edge columns of C and edge rows of G0 are ordered conducting first.
struct IncidenceSet {
    la::SparseMatrix C;
    la::SparseMatrix G0;
    std::vector<int> edge_ids;  // mesh edge id per C column / G0 row
    std::vector<int> node_ids;  // mesh node id per G0 column
    std::vector<int> face_ids;  // mesh face id per C row
    int n1 = 0;                 // conducting edges
    bool eliminated = false;

    int num_edges() const { return static_cast<int>(edge_ids.size()); }
    int n2() const { return num_edges() - n1; }
};

// Edge a<b is oriented a -> b: G0 has +1 at a, -1 at b. Face (a<b<c) is
// oriented by its sorted triple: +1 for ab and bc, -1 for ac.
IncidenceSet build_incidence(const Mesh& mesh);

// Keeps all faces, interior edges and interior nodes.
IncidenceSet eliminate_boundary(const IncidenceSet& inc, const Mesh& mesh);

// Edge is conducting iff it belongs to at least one iron tetrahedron.
std::vector<char> conducting_edges(const Mesh& mesh);

}  // namespace mqsbt::mesh
