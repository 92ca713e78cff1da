#pragma once

#include "mqsbt/la/types.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

namespace mqsbt::la {

struct FactorizationOptions {
    // A U pivot with |u_jj| <= pivot_tol * max|u_ii| counts as singular.
    double pivot_tol = 64.0 * 2.220446049250313e-16;
    // Residual invariant checked once after factorization.
    double residual_tol = 1e-10;
    bool verify = true;
    // Threshold partial pivoting: a diagonal pivot is kept when it is at
    // least this fraction of the column maximum.
    double pivot_threshold = 1.0;
};

namespace detail {

// Exposes the diagonal of U, which SparseLU keeps inside the supernodal L store.
template <class Scalar>
class InspectableLU
    : public Eigen::SparseLU<Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>,
                             Eigen::NaturalOrdering<int>> {
public:
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u_diagonal() const {
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d =
            Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(this->cols());
        for (Index j = 0; j < this->cols(); ++j)
            for (typename decltype(this->m_Lstore)::InnerIterator it(this->m_Lstore, j); it; ++it)
                if (it.index() == j) {
                    d(j) = it.value();
                    break;
                }
        return d;
    }
};

}  // namespace detail

// Sparse LU with partial pivoting for real or complex square matrices. The
// matrix is first permuted symmetrically by AMD on the pattern of S + S^T,
// which keeps the fill of the symmetric-pattern bordered systems low.
template <class Scalar>
class SparseFactorization {
public:
    using Matrix = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    explicit SparseFactorization(const Matrix& S, const FactorizationOptions& opt = {});

    Vec solve(const Vec& w) const;
    Dense solve(const Dense& W) const;

    Index size() const { return S_.rows(); }
    const Matrix& matrix() const { return S_; }
    // Relative residual measured at construction when verify is on.
    double verified_residual() const { return verified_residual_; }

private:
    Matrix S_;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P_;
    detail::InspectableLU<Scalar> lu_;
    double normF_ = 0.0;
    double verified_residual_ = 0.0;
};

using RealFactorization = SparseFactorization<double>;
using ComplexFactorization = SparseFactorization<Complex>;

RealFactorization factorize(const SparseMatrix& S, const FactorizationOptions& opt = {});
ComplexFactorization factorize_complex(const Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>& S,
                                       const FactorizationOptions& opt = {});

extern template class SparseFactorization<double>;
extern template class SparseFactorization<Complex>;

}  // namespace mqsbt::la
