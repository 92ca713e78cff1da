#include "mqsbt/la/factorization.hpp"

#include "mqsbt/errors.hpp"

#include <cmath>
#include <string>

namespace mqsbt::la {

template <class Scalar>
SparseFactorization<Scalar>::SparseFactorization(const Matrix& S, const FactorizationOptions& opt)
    : S_(S) {
    if (S_.rows() != S_.cols())
        throw ValidationError("factorize: matrix is " + std::to_string(S_.rows()) + "x" +
                              std::to_string(S_.cols()) + ", not square");
    if (S_.rows() == 0) return;
    S_.makeCompressed();
    normF_ = S_.norm();
    Eigen::AMDOrdering<int> amd;
    amd(S_, P_);
    const Matrix Sp = P_.transpose() * S_ * P_;
    lu_.setPivotThreshold(opt.pivot_threshold);
    lu_.analyzePattern(Sp);
    lu_.factorize(Sp);
    if (lu_.info() != Eigen::Success) {
        // SparseLU reports the 1-based elimination step of an exactly zero pivot.
        const std::string msg = lu_.lastErrorMessage();
        long pivot = -1;
        auto pos = msg.find_last_of(' ');
        if (pos != std::string::npos) {
            try {
                pivot = std::stol(msg.substr(pos + 1)) - 1;
            } catch (...) {
            }
        }
        throw SingularMatrixError("singular matrix: zero pivot at elimination step " +
                                      std::to_string(pivot) + " (" + msg + ")",
                                  pivot);
    }
    const Vec d = lu_.u_diagonal();
    const double dmax = d.cwiseAbs().maxCoeff();
    for (Index j = 0; j < d.size(); ++j) {
        if (!(std::abs(d(j)) > opt.pivot_tol * dmax)) {
            const auto& pc = lu_.colsPermutation().indices();
            long col = -1;
            for (Index k = 0; k < pc.size(); ++k)
                if (pc(k) == j) col = static_cast<long>(P_.indices()(k));
            throw SingularMatrixError("singular matrix: pivot " + std::to_string(j) + " (column " +
                                          std::to_string(col) + ") has |u| = " +
                                          std::to_string(std::abs(d(j))) + " vs max " +
                                          std::to_string(dmax),
                                      static_cast<long>(j));
        }
    }
    if (opt.verify) {
        // Deterministic right-hand side with all entries nonzero.
        Vec w(S_.rows());
        for (Index i = 0; i < w.size(); ++i) w(i) = Scalar(1.0 + 0.5 * std::sin(1.0 + 3.0 * i));
        Vec x = solve(w);
        const double r = (S_ * x - w).norm();
        verified_residual_ = r / (normF_ * x.norm() + w.norm());
        if (!(verified_residual_ <= opt.residual_tol))
            throw NumericalError("factorize: residual check failed, relative residual " +
                                 std::to_string(verified_residual_));
    }
}

template <class Scalar>
typename SparseFactorization<Scalar>::Vec SparseFactorization<Scalar>::solve(const Vec& w) const {
    if (w.size() != S_.rows())
        throw ValidationError("solve: rhs length " + std::to_string(w.size()) + " != " +
                              std::to_string(S_.rows()));
    if (S_.rows() == 0) return Vec();
    const Vec y = lu_.solve(Vec(P_.transpose() * w));
    return P_ * y;
}

template <class Scalar>
typename SparseFactorization<Scalar>::Dense SparseFactorization<Scalar>::solve(const Dense& W) const {
    if (W.rows() != S_.rows()) throw ValidationError("solve: rhs rows mismatch");
    Dense X(W.rows(), W.cols());
    for (Index j = 0; j < W.cols(); ++j) X.col(j) = solve(Vec(W.col(j)));
    return X;
}

template class SparseFactorization<double>;
template class SparseFactorization<Complex>;

RealFactorization factorize(const SparseMatrix& S, const FactorizationOptions& opt) {
    RealFactorization::Matrix C = S;
    return RealFactorization(C, opt);
}

ComplexFactorization factorize_complex(const Eigen::SparseMatrix<Complex, Eigen::ColMajor, int>& S,
                                       const FactorizationOptions& opt) {
    return ComplexFactorization(S, opt);
}

}  // namespace mqsbt::la
