#include "mqsbt/reg/kernels.hpp"

#include "mqsbt/errors.hpp"
#include "mqsbt/la/dense.hpp"
#include "mqsbt/la/factorization.hpp"
#include "mqsbt/la/sparse.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <vector>

namespace mqsbt::reg {

namespace {

// Rows of A read as edges between column vertices.
bool rows_are_incidence(const la::SparseMatrix& A) {
    for (la::Index i = 0; i < A.outerSize(); ++i) {
        int cnt = 0;
        double sum = 0.0;
        for (la::SparseMatrix::InnerIterator it(A, i); it; ++it) {
            if (it.value() != 1.0 && it.value() != -1.0) return false;
            ++cnt;
            sum += it.value();
        }
        if (cnt > 2 || (cnt == 2 && sum != 0.0)) return false;
    }
    return true;
}

struct Dsu {
    std::vector<int> p;
    explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
    int find(int x) {
        while (p[x] != x) x = p[x] = p[p[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) p[std::max(a, b)] = std::min(a, b);
    }
};

// Components of the graph whose vertices are the columns of A and whose
// edges are the rows. Returns the component root per vertex and marks
// components touched by a one-entry row as grounded.
void row_graph_components(const la::SparseMatrix& A, std::vector<int>& root, std::vector<char>& grounded) {
    const int n = static_cast<int>(A.cols());
    Dsu d(n);
    std::vector<int> lone;
    for (la::Index i = 0; i < A.outerSize(); ++i) {
        int v[2], c = 0;
        for (la::SparseMatrix::InnerIterator it(A, i); it; ++it) v[c++] = static_cast<int>(it.col());
        if (c == 2) d.unite(v[0], v[1]);
        if (c == 1) lone.push_back(v[0]);
    }
    root.resize(n);
    for (int j = 0; j < n; ++j) root[j] = d.find(j);
    grounded.assign(n, 0);
    for (int v : lone) grounded[root[v]] = 1;
}

KernelResult node_side_kernel(const la::SparseMatrix& A) {
    std::vector<int> root;
    std::vector<char> grounded;
    row_graph_components(A, root, grounded);
    const int n = static_cast<int>(A.cols());
    std::vector<int> col_of(n, -1);
    int k = 0;
    for (int j = 0; j < n; ++j)
        if (root[j] == j && !grounded[j]) col_of[j] = k++;
    std::vector<la::Triplet> t;
    for (int j = 0; j < n; ++j)
        if (!grounded[root[j]]) t.emplace_back(j, col_of[root[j]], 1.0);
    return {la::from_triplets(n, k, t), Provenance::Graph};
}

// Columns of A read as edges between row vertices plus a ground vertex.
KernelResult edge_side_kernel(const la::SparseMatrix& A) {
    const int nv = static_cast<int>(A.rows());
    const int ne = static_cast<int>(A.cols());
    const int ground = nv;
    const la::SparseMatrix At = la::transpose(A);  // edges x vertices
    struct End {
        int tail = -1, head = -1;  // +1 entry is the tail, -1 entry the head; -1 means ground
        bool loop = false;
    };
    std::vector<End> ends(ne);
    std::vector<std::vector<std::pair<int, int>>> adj(nv + 1);  // (neighbor, edge)
    for (int e = 0; e < ne; ++e) {
        int tail = ground, head = ground, cnt = 0;
        for (la::SparseMatrix::InnerIterator it(At, e); it; ++it) {
            ++cnt;
            if (it.value() > 0) tail = static_cast<int>(it.col());
            else head = static_cast<int>(it.col());
        }
        if (cnt == 0) {
            ends[e].loop = true;
            continue;
        }
        ends[e].tail = tail;
        ends[e].head = head;
        adj[tail].push_back({head, e});
        adj[head].push_back({tail, e});
    }
    std::vector<int> parent(nv + 1, -2), parent_edge(nv + 1, -1), depth(nv + 1, 0);
    std::vector<char> tree_edge(ne, 0);
    auto bfs = [&](int s) {
        std::deque<int> q{s};
        parent[s] = -1;
        while (!q.empty()) {
            const int u = q.front();
            q.pop_front();
            for (auto [w, e] : adj[u]) {
                if (parent[w] != -2) continue;
                parent[w] = u;
                parent_edge[w] = e;
                depth[w] = depth[u] + 1;
                tree_edge[e] = 1;
                q.push_back(w);
            }
        }
    };
    bfs(ground);
    for (int v = 0; v < nv; ++v)
        if (parent[v] == -2) bfs(v);

    // Coefficient of tree edge pe when walking from child to parent.
    auto up_sign = [&](int child) { return ends[parent_edge[child]].tail == child ? 1.0 : -1.0; };
    std::vector<la::Triplet> t;
    int k = 0;
    for (int e = 0; e < ne; ++e) {
        if (tree_edge[e]) continue;
        if (ends[e].loop) {
            t.emplace_back(e, k++, 1.0);
            continue;
        }
        // Flow 1 along e (tail -> head), then back from head to tail through the tree.
        t.emplace_back(e, k, 1.0);
        int u = ends[e].head, v = ends[e].tail;
        while (u != v) {
            if (depth[u] >= depth[v]) {
                t.emplace_back(parent_edge[u], k, up_sign(u));
                u = parent[u];
            } else {
                t.emplace_back(parent_edge[v], k, -up_sign(v));
                v = parent[v];
            }
        }
        ++k;
    }
    return {la::from_triplets(ne, k, t), Provenance::Graph};
}

KernelResult dense_kernel(const la::SparseMatrix& A) {
    const la::DenseMatrix N = la::null_space(la::DenseMatrix(A));
    return {N.sparseView(1.0, 1e-14 * std::max(1.0, N.cwiseAbs().maxCoeff())), Provenance::Fallback};
}

}  // namespace

const char* provenance_name(Provenance p) { return p == Provenance::Graph ? "graph" : "fallback"; }

KernelResult kernel_incidence(const la::SparseMatrix& A) {
    if (rows_are_incidence(A)) return node_side_kernel(A);
    if (rows_are_incidence(la::transpose(A))) return edge_side_kernel(A);
    return dense_kernel(A);
}

ReducedGradient reduced_gradient(const mesh::IncidenceSet& inc) {
    ReducedGradient r;
    if (inc.eliminated) {
        r.G = inc.G0;
    } else {
        std::vector<int> keep(inc.G0.cols() - 1);
        std::iota(keep.begin(), keep.end(), 0);
        r.G = la::select_cols(inc.G0, keep);
    }
    if (r.G.cols() == 0) throw ValidationError("reduced_gradient: empty interior");
    std::vector<int> r1(inc.n1), r2(inc.num_edges() - inc.n1);
    std::iota(r1.begin(), r1.end(), 0);
    std::iota(r2.begin(), r2.end(), inc.n1);
    r.G1 = la::select_rows(r.G, r1);
    r.G2 = la::select_rows(r.G, r2);
    return r;
}

KernelBases kernel_bases(const mesh::IncidenceSet& inc) {
    const ReducedGradient rg = reduced_gradient(inc);
    KernelBases kb;
    kb.n2 = static_cast<int>(rg.G2.rows());
    kb.num_nodes = static_cast<int>(rg.G.cols());
    const KernelResult z1 = kernel_incidence(rg.G1);
    kb.Z1 = z1.basis;
    la::SparseMatrix G2Z1 = rg.G2 * kb.Z1;
    G2Z1.prune(0.0);
    // G2 Z1 is the incidence of the graph whose vertices are the free
    // components (plus ground). Dropping one vertex per component that does
    // not reach ground leaves a maximal independent column set.
    std::vector<int> root;
    std::vector<char> grounded;
    row_graph_components(G2Z1, root, grounded);
    std::vector<int> keep;
    for (int j = 0; j < static_cast<int>(G2Z1.cols()); ++j)
        if (grounded[root[j]] || root[j] != j) keep.push_back(j);
    kb.Y = la::select_cols(G2Z1, keep);
    kb.k2 = static_cast<int>(keep.size());
    const la::SparseMatrix Z1tG2t = la::transpose(G2Z1);
    const KernelResult yh = kernel_incidence(Z1tG2t);
    kb.Yhat = yh.basis;
    kb.provenance = (z1.provenance == Provenance::Graph && yh.provenance == Provenance::Graph)
                        ? Provenance::Graph
                        : Provenance::Fallback;
    if (kb.Yhat.cols() + kb.k2 != kb.n2)
        throw NumericalError("kernel_bases: dimension mismatch, " + std::to_string(kb.Yhat.cols()) + " + " +
                             std::to_string(kb.k2) + " != n2 = " + std::to_string(kb.n2));
    return kb;
}

KernelBases kernel_bases_dense(const la::SparseMatrix& C2) {
    KernelBases kb;
    kb.n2 = static_cast<int>(C2.cols());
    const la::DenseMatrix C2t = la::DenseMatrix(C2).transpose();
    const la::RangeSplit rs = la::range_split(C2t);
    kb.Yhat = rs.range.sparseView();
    kb.Y = rs.complement.sparseView();
    kb.k2 = static_cast<int>(kb.Y.cols());
    kb.provenance = Provenance::Fallback;
    return kb;
}

KernelCheck check_kernel_bases(const KernelBases& kb, const la::SparseMatrix& C2, const la::SparseMatrix* G2) {
    KernelCheck c;
    c.C2Y = la::frobenius_norm(la::SparseMatrix(C2 * kb.Y));
    c.YtYhat = la::frobenius_norm(la::SparseMatrix(la::transpose(kb.Y) * kb.Yhat));
    if (G2 && kb.Z1.size() > 0) {
        const la::SparseMatrix P = la::transpose(kb.Z1) * (la::transpose(*G2) * kb.Yhat);
        c.Z1G2Yhat = la::frobenius_norm(P);
    }
    // [Yhat, Y] must be square and nonsingular; a sparse LU with pivot
    // checking decides.
    const la::SparseMatrix T = la::block2x2(kb.Yhat, kb.Y, la::SparseMatrix(0, kb.Yhat.cols()),
                                            la::SparseMatrix(0, kb.Y.cols()));
    if (T.rows() == T.cols()) {
        try {
            la::factorize(T);
            c.rank = kb.n2;
        } catch (const SingularMatrixError& e) {
            c.rank = la::numerical_rank(la::DenseMatrix(T), 1e-12);
        }
    }
    const double tol = kb.provenance == Provenance::Graph ? 0.0 : 1e-10 * std::max(1.0, la::frobenius_norm(C2));
    c.ok = c.C2Y <= tol && c.Z1G2Yhat <= tol && c.rank == kb.n2;
    c.detail = "||C2 Y|| = " + std::to_string(c.C2Y) + ", ||Z1'G2'Yhat|| = " + std::to_string(c.Z1G2Yhat) +
               ", rank [Yhat Y] = " + std::to_string(c.rank) + " of " + std::to_string(kb.n2);
    return c;
}

}  // namespace mqsbt::reg
