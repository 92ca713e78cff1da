#pragma once

#include "mqsbt/la/types.hpp"

#include <string>

namespace mqsbt::la {

// Coordinate real, 1-based, values printed with 17 significant digits.
// With symmetric = true only the lower triangle is written and the header
// says "symmetric"; the matrix must then be exactly symmetric.
void write_matrix_market(const std::string& path, const SparseMatrix& A, bool symmetric = false);
// Dense matrices are written as a full coordinate listing (zeros included).
void write_matrix_market(const std::string& path, const DenseMatrix& A);

// Reads coordinate or array, real or integer, general or symmetric.
SparseMatrix read_matrix_market(const std::string& path);
DenseMatrix read_matrix_market_dense(const std::string& path);

}  // namespace mqsbt::la
