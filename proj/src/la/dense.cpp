#include "mqsbt/la/dense.hpp"

#include "mqsbt/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <numeric>
#include <string>

namespace mqsbt::la {

SymEig dense_sym_eig(const DenseMatrix& A, double sym_tol) {
    if (A.rows() != A.cols()) throw ValidationError("dense_sym_eig: matrix not square");
    const double nrm = A.norm();
    const double asym = (A - A.transpose()).norm();
    if (asym > sym_tol * nrm)
        throw ValidationError("dense_sym_eig: asymmetry " + std::to_string(asym) +
                              " exceeds tolerance relative to norm " + std::to_string(nrm));
    SymEig out;
    const Index n = A.rows();
    if (n == 0) return out;
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(symmetrize(A));
    if (es.info() != Eigen::Success) throw NumericalError("dense_sym_eig: no convergence");
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Index i = 0; i < n; ++i) {
        out.values(i) = es.eigenvalues()(n - 1 - i);
        out.vectors.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    return out;
}

RangeSplit range_split(const DenseMatrix& A, double rank_tol) {
    RangeSplit out;
    const Index n = A.rows();
    if (A.cols() == 0) {
        out.complement = DenseMatrix::Identity(n, n);
        out.range.resize(n, 0);
        return out;
    }
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(A);
    qr.setThreshold(rank_tol);
    out.rank = qr.rank();
    DenseMatrix Q = qr.householderQ();
    out.range = Q.leftCols(out.rank);
    out.complement = Q.rightCols(n - out.rank);
    return out;
}

DenseMatrix orthogonal_complement(const DenseMatrix& A, double rank_tol) {
    const Index n = A.rows();
    if (A.cols() == 0) return DenseMatrix::Identity(n, n);
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(A);
    qr.setThreshold(rank_tol);
    const Index r = qr.rank();
    DenseMatrix C = DenseMatrix::Zero(n, n - r);
    C.bottomRows(n - r).setIdentity();
    C.applyOnTheLeft(qr.householderQ());
    return C;
}

Index numerical_rank(const DenseMatrix& A, double rank_tol) {
    if (A.size() == 0) return 0;
    Eigen::ColPivHouseholderQR<DenseMatrix> qr(A);
    qr.setThreshold(rank_tol);
    return qr.rank();
}

DenseMatrix null_space(const DenseMatrix& A, double rank_tol) {
    // ker(A) = im(A^T)^perp
    DenseMatrix At = A.transpose();
    return orthogonal_complement(At, rank_tol);
}

DenseMatrix symmetrize(const DenseMatrix& A) { return 0.5 * (A + A.transpose()); }

}  // namespace mqsbt::la
