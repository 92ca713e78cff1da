#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <complex>
#include <vector>

namespace mqsbt::la {

using Index = Eigen::Index;
using Complex = std::complex<double>;
using Vector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXd;
using CDenseMatrix = Eigen::MatrixXcd;

// Canonical storage is compressed rows. Coordinate form appears only at
// construction and IO boundaries.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;
using Triplet = Eigen::Triplet<double, int>;

}  // namespace mqsbt::la
