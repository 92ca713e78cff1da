#pragma once

#include "mqsbt/la/types.hpp"

namespace mqsbt::la {

struct SymEig {
    Vector values;        // descending
    DenseMatrix vectors;  // orthonormal columns matching values
};

// Throws ValidationError when ||A - A^T||_F > sym_tol * ||A||_F.
SymEig dense_sym_eig(const DenseMatrix& A, double sym_tol = 1e-12);

// Orthonormal basis of the orthogonal complement of im(A), from a
// column-pivoted Householder QR. rank_tol is relative to the largest |r_ii|.
struct RangeSplit {
    Index rank = 0;
    DenseMatrix range;       // n x rank
    DenseMatrix complement;  // n x (n - rank)
};
RangeSplit range_split(const DenseMatrix& A, double rank_tol = 1e-10);

// Only the complement part of range_split; cheaper when it is thin.
DenseMatrix orthogonal_complement(const DenseMatrix& A, double rank_tol = 1e-10);
Index numerical_rank(const DenseMatrix& A, double rank_tol = 1e-10);

// Orthonormal basis of ker(A).
DenseMatrix null_space(const DenseMatrix& A, double rank_tol = 1e-10);

DenseMatrix symmetrize(const DenseMatrix& A);

}  // namespace mqsbt::la
