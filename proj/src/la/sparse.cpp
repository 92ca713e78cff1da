#include "mqsbt/la/sparse.hpp"

#include "mqsbt/errors.hpp"

#include <cmath>
#include <string>

namespace mqsbt::la {

SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& entries) {
    for (const auto& t : entries) {
        if (t.row() < 0 || t.row() >= rows || t.col() < 0 || t.col() >= cols)
            throw ValidationError("triplet (" + std::to_string(t.row()) + "," +
                                  std::to_string(t.col()) + ") out of bounds for " +
                                  std::to_string(rows) + "x" + std::to_string(cols));
    }
    SparseMatrix A(rows, cols);
    A.setFromTriplets(entries.begin(), entries.end());
    A.prune(0.0);
    A.makeCompressed();
    return A;
}

Vector spmv(const SparseMatrix& A, const Vector& v) {
    if (v.size() != A.cols())
        throw ValidationError("spmv: vector length " + std::to_string(v.size()) +
                              " != columns " + std::to_string(A.cols()));
    Vector y(A.rows());
    for (Index i = 0; i < A.outerSize(); ++i) {
        double s = 0.0;
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) s += it.value() * v(it.col());
        y(i) = s;
    }
    return y;
}

DenseMatrix spmm(const SparseMatrix& A, const DenseMatrix& V) {
    if (V.rows() != A.cols()) throw ValidationError("spmm: dimension mismatch");
    DenseMatrix Y(A.rows(), V.cols());
    for (Index j = 0; j < V.cols(); ++j) Y.col(j) = spmv(A, V.col(j));
    return Y;
}

SparseMatrix select_rows(const SparseMatrix& A, const std::vector<int>& rows) {
    std::vector<Triplet> t;
    for (size_t r = 0; r < rows.size(); ++r)
        for (SparseMatrix::InnerIterator it(A, rows[r]); it; ++it)
            t.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
    return from_triplets(static_cast<Index>(rows.size()), A.cols(), t);
}

SparseMatrix select_cols(const SparseMatrix& A, const std::vector<int>& cols) {
    std::vector<int> map(A.cols(), -1);
    for (size_t c = 0; c < cols.size(); ++c) map[cols[c]] = static_cast<int>(c);
    std::vector<Triplet> t;
    for (Index i = 0; i < A.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it)
            if (map[it.col()] >= 0) t.emplace_back(static_cast<int>(i), map[it.col()], it.value());
    return from_triplets(A.rows(), static_cast<Index>(cols.size()), t);
}

SparseMatrix block2x2(const SparseMatrix& A, const SparseMatrix& B,
                      const SparseMatrix& C, const SparseMatrix& D) {
    const Index r0 = std::max(A.rows(), B.rows());
    const Index r1 = std::max(C.rows(), D.rows());
    const Index c0 = std::max(A.cols(), C.cols());
    const Index c1 = std::max(B.cols(), D.cols());
    std::vector<Triplet> t;
    auto put = [&](const SparseMatrix& M, Index ro, Index co) {
        for (Index i = 0; i < M.outerSize(); ++i)
            for (SparseMatrix::InnerIterator it(M, i); it; ++it)
                t.emplace_back(static_cast<int>(ro + i), static_cast<int>(co + it.col()), it.value());
    };
    put(A, 0, 0);
    put(B, 0, c0);
    put(C, r0, 0);
    put(D, r0, c0);
    return from_triplets(r0 + r1, c0 + c1, t);
}

SparseMatrix identity(Index n) {
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
    return from_triplets(n, n, t);
}

SparseMatrix transpose(const SparseMatrix& A) {
    SparseMatrix T = A.transpose();
    T.makeCompressed();
    return T;
}

double frobenius_norm(const SparseMatrix& A) {
    double s = 0.0;
    for (Index i = 0; i < A.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) s += it.value() * it.value();
    return std::sqrt(s);
}

double max_abs(const SparseMatrix& A) {
    double m = 0.0;
    for (Index i = 0; i < A.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

bool is_symmetric(const SparseMatrix& A, double rel_tol) {
    if (A.rows() != A.cols()) return false;
    SparseMatrix D = A - transpose(A);
    return frobenius_norm(D) <= rel_tol * frobenius_norm(A);
}

bool all_integer(const SparseMatrix& A) {
    for (Index i = 0; i < A.outerSize(); ++i)
        for (SparseMatrix::InnerIterator it(A, i); it; ++it)
            if (it.value() != std::round(it.value())) return false;
    return true;
}

}  // namespace mqsbt::la
