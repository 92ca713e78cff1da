#pragma once

#include "mqsbt/la/types.hpp"

#include <vector>

namespace mqsbt::la {

// Duplicates are summed, exact zeros dropped.
SparseMatrix from_triplets(Index rows, Index cols, const std::vector<Triplet>& entries);

// A*v accumulated row by row in stored order.
Vector spmv(const SparseMatrix& A, const Vector& v);
DenseMatrix spmm(const SparseMatrix& A, const DenseMatrix& V);

SparseMatrix select_rows(const SparseMatrix& A, const std::vector<int>& rows);
SparseMatrix select_cols(const SparseMatrix& A, const std::vector<int>& cols);

// [A B; C D] with any block allowed to be empty (0 rows or 0 cols).
SparseMatrix block2x2(const SparseMatrix& A, const SparseMatrix& B,
                      const SparseMatrix& C, const SparseMatrix& D);

SparseMatrix identity(Index n);
SparseMatrix transpose(const SparseMatrix& A);

double frobenius_norm(const SparseMatrix& A);
double max_abs(const SparseMatrix& A);
bool is_symmetric(const SparseMatrix& A, double rel_tol = 0.0);
bool all_integer(const SparseMatrix& A);

}  // namespace mqsbt::la
