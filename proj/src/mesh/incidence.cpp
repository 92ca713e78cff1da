#include "mqsbt/mesh/incidence.hpp"

#include "mqsbt/la/sparse.hpp"

#include <algorithm>

namespace mqsbt::mesh {

std::vector<char> conducting_edges(const Mesh& m) {
    std::vector<char> cond(m.num_edges(), 0);
    for (int t = 0; t < m.num_tets(); ++t) {
        if (m.regions[t] != Region::Iron) continue;
        const auto& T = m.tets[t];
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) cond[m.edge_id(T[i], T[j])] = 1;
    }
    return cond;
}

IncidenceSet build_incidence(const Mesh& m) {
    IncidenceSet inc;
    const auto cond = conducting_edges(m);
    for (int e = 0; e < m.num_edges(); ++e)
        if (cond[e]) inc.edge_ids.push_back(e);
    inc.n1 = static_cast<int>(inc.edge_ids.size());
    for (int e = 0; e < m.num_edges(); ++e)
        if (!cond[e]) inc.edge_ids.push_back(e);
    std::vector<int> col_of(m.num_edges());
    for (size_t k = 0; k < inc.edge_ids.size(); ++k) col_of[inc.edge_ids[k]] = static_cast<int>(k);

    inc.node_ids.resize(m.num_nodes());
    for (int i = 0; i < m.num_nodes(); ++i) inc.node_ids[i] = i;
    inc.face_ids.resize(m.num_faces());
    for (int f = 0; f < m.num_faces(); ++f) inc.face_ids[f] = f;

    std::vector<la::Triplet> tc;
    tc.reserve(3 * m.faces.size());
    for (int f = 0; f < m.num_faces(); ++f) {
        const auto& F = m.faces[f];
        tc.emplace_back(f, col_of[m.edge_id(F[0], F[1])], 1.0);
        tc.emplace_back(f, col_of[m.edge_id(F[1], F[2])], 1.0);
        tc.emplace_back(f, col_of[m.edge_id(F[0], F[2])], -1.0);
    }
    inc.C = la::from_triplets(m.num_faces(), m.num_edges(), tc);

    std::vector<la::Triplet> tg;
    tg.reserve(2 * m.edges.size());
    for (int e = 0; e < m.num_edges(); ++e) {
        tg.emplace_back(col_of[e], m.edges[e][0], 1.0);
        tg.emplace_back(col_of[e], m.edges[e][1], -1.0);
    }
    inc.G0 = la::from_triplets(m.num_edges(), m.num_nodes(), tg);
    return inc;
}

IncidenceSet eliminate_boundary(const IncidenceSet& inc, const Mesh& m) {
    IncidenceSet out;
    std::vector<int> keep_cols;
    for (int k = 0; k < inc.num_edges(); ++k) {
        if (m.edge_boundary[inc.edge_ids[k]]) continue;
        if (k < inc.n1) ++out.n1;
        keep_cols.push_back(k);
        out.edge_ids.push_back(inc.edge_ids[k]);
    }
    std::vector<int> keep_nodes;
    for (size_t j = 0; j < inc.node_ids.size(); ++j)
        if (!m.node_boundary[inc.node_ids[j]]) {
            keep_nodes.push_back(static_cast<int>(j));
            out.node_ids.push_back(inc.node_ids[j]);
        }
    out.face_ids = inc.face_ids;
    out.C = la::select_cols(inc.C, keep_cols);
    out.G0 = la::select_cols(la::select_rows(inc.G0, keep_cols), keep_nodes);
    out.eliminated = true;
    return out;
}

}  // namespace mqsbt::mesh
