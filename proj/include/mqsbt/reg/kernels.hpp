#pragma once

#include "mqsbt/la/types.hpp"
#include "mqsbt/mesh/incidence.hpp"

#include <string>

namespace mqsbt::reg {

enum class Provenance { Graph, Fallback };
const char* provenance_name(Provenance p);

struct KernelResult {
    la::SparseMatrix basis;
    Provenance provenance = Provenance::Graph;
};

// Basis of ker(A). When every row of A is an incidence row (at most two
// nonzeros, +-1, opposite signs when two) the rows are read as edges and
// the basis consists of indicators of the components not tied to ground by
// a one-entry row. When every column is an incidence column the columns are
// read as edges and the basis consists of fundamental cycles of a BFS forest
// rooted at ground. Anything else goes through a dense rank-revealing QR.
KernelResult kernel_incidence(const la::SparseMatrix& A);

struct ReducedGradient {
    la::SparseMatrix G, G1, G2;
};
// On the eliminated complex G is G0 itself; on the full complex the last
// node column is dropped.
ReducedGradient reduced_gradient(const mesh::IncidenceSet& inc);

struct KernelBases {
    la::SparseMatrix Y;     // n2 x k2, basis of ker(C2)
    la::SparseMatrix Yhat;  // n2 x (n2 - k2), basis of im(C2^T)
    la::SparseMatrix Z1;    // basis of ker(G1), graph path only
    int n2 = 0;
    int k2 = 0;
    int num_nodes = 0;  // columns of the reduced gradient (graph path)
    Provenance provenance = Provenance::Graph;
};

// Graph path: Z1 = ker(G1), Y = independent columns of G2 Z1,
// Yhat = ker(Z1^T G2^T).
KernelBases kernel_bases(const mesh::IncidenceSet& inc);
// Dense path from C2 alone.
KernelBases kernel_bases_dense(const la::SparseMatrix& C2);

struct KernelCheck {
    double C2Y = 0.0;       // ||C2 Y||_F
    double Z1G2Yhat = 0.0;  // ||Z1^T G2^T Yhat||_F (graph path)
    double YtYhat = 0.0;    // ||Y^T Yhat||_F
    la::Index rank = 0;     // rank of [Yhat, Y]
    bool ok = false;
    std::string detail;
};
KernelCheck check_kernel_bases(const KernelBases& kb, const la::SparseMatrix& C2,
                               const la::SparseMatrix* G2 = nullptr);

}  // namespace mqsbt::reg
