#include "mqsbt/reg/regularized.hpp"

#include "mqsbt/errors.hpp"
#include "mqsbt/la/dense.hpp"
#include "mqsbt/la/sparse.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace mqsbt::reg {

RegularizedSystem::RegularizedSystem(std::shared_ptr<const fem::AssembledSystem> sys, KernelBases bases)
    : sys_(std::move(sys)), bases_(std::move(bases)) {
    const auto& s = *sys_;
    if (bases_.n2 != s.n2 || bases_.Y.rows() != s.n2 || bases_.Yhat.rows() != s.n2)
        throw ValidationError("kernel bases do not match the non-conducting block");
    const la::SparseMatrix Yt = la::transpose(bases_.Yhat);
    YtK22Y_ = Yt * (s.K22 * bases_.Yhat);
    YtK22Y_.makeCompressed();
    YtX2_ = Yt * s.X2;
    YtX2_.makeCompressed();
    C2Yhat_ = s.C2 * bases_.Yhat;
    C2Yhat_.makeCompressed();

    Eigen::LLT<la::DenseMatrix> rl(s.R);
    if (rl.info() != Eigen::Success) throw ValidationError("R is not positive definite");
    Rinv_ = rl.solve(la::DenseMatrix::Identity(s.m, s.m));
    Rinv_ = la::symmetrize(Rinv_);

    const la::DenseMatrix YX = la::DenseMatrix(YtX2_);
    if (la::numerical_rank(YX, 1e-12) < s.m)
        throw NumericalError("Yhat^T X2 is rank deficient; the winding does not couple to the field");
    const la::DenseMatrix G = YX.transpose() * YX;
    Z_ = YX * G.llt().solve(la::DenseMatrix::Identity(s.m, s.m));

    Br_.resize(nr(), s.m);
    Br_.topRows(s.n1) = la::DenseMatrix(s.X1) * Rinv_;
    Br_.bottomRows(nr2()) = YX * Rinv_;
}

la::Vector RegularizedSystem::apply_Er(const la::Vector& x) const {
    const auto& s = *sys_;
    if (x.size() != nr()) throw ValidationError("apply_Er: wrong length");
    const la::Vector x1 = x.head(s.n1), x2 = x.tail(nr2());
    la::Vector q = la::spmv(la::transpose(s.X1), x1);
    q += la::spmv(la::transpose(YtX2_), x2);
    q = Rinv_ * q;
    la::Vector y(nr());
    y.head(s.n1) = la::spmv(s.M11, x1) + la::spmv(s.X1, q);
    y.tail(nr2()) = la::spmv(YtX2_, q);
    return y;
}

la::Vector RegularizedSystem::apply_Ar(const la::Vector& x) const {
    const auto& s = *sys_;
    if (x.size() != nr()) throw ValidationError("apply_Ar: wrong length");
    la::Vector c = la::spmv(s.C1, x.head(s.n1)) + la::spmv(C2Yhat_, x.tail(nr2()));
    const la::Vector y = la::spmv(s.M_nu, c);
    la::Vector out(nr());
    out.head(s.n1) = -(s.C1.transpose() * y);
    out.tail(nr2()) = -(C2Yhat_.transpose() * y);
    return out;
}

la::DenseMatrix RegularizedSystem::apply_Er(const la::DenseMatrix& X) const {
    la::DenseMatrix Y(nr(), X.cols());
    for (la::Index j = 0; j < X.cols(); ++j) Y.col(j) = apply_Er(la::Vector(X.col(j)));
    return Y;
}

la::DenseMatrix RegularizedSystem::apply_Ar(const la::DenseMatrix& X) const {
    la::DenseMatrix Y(nr(), X.cols());
    for (la::Index j = 0; j < X.cols(); ++j) Y.col(j) = apply_Ar(la::Vector(X.col(j)));
    return Y;
}

la::SparseMatrix RegularizedSystem::F_sigma() const {
    const auto& s = *sys_;
    return la::block2x2(la::identity(s.n1), s.X1, la::SparseMatrix(nr2(), s.n1), YtX2_);
}

la::SparseMatrix RegularizedSystem::M_sigma() const {
    const auto& s = *sys_;
    return la::block2x2(s.M11, la::SparseMatrix(s.n1, s.m), la::SparseMatrix(s.m, s.n1),
                        la::SparseMatrix(Rinv_.sparseView()));
}

la::SparseMatrix RegularizedSystem::F_nu() const {
    const auto& s = *sys_;
    return la::block2x2(la::transpose(s.C1), la::SparseMatrix(s.n1, 0), la::transpose(C2Yhat_),
                        la::SparseMatrix(nr2(), 0));
}

la::SparseMatrix RegularizedSystem::sparse_Er() const {
    const la::SparseMatrix F = F_sigma();
    la::SparseMatrix E = F * (M_sigma() * la::transpose(F));
    E.makeCompressed();
    return E;
}

la::SparseMatrix RegularizedSystem::sparse_Ar() const {
    const la::SparseMatrix F = F_nu();
    la::SparseMatrix A = -(F * (sys_->M_nu * la::transpose(F)));
    A.makeCompressed();
    return A;
}

std::string Theorem1Report::summary() const {
    std::ostringstream o;
    o << "k2=" << k2 << " E-residual=" << E_residual << " K-residual=" << K_residual
      << (exact ? " (exact)" : "");
    if (dense_kernel_dim >= 0) o << " dense-kernel-dim=" << dense_kernel_dim << " gap=" << dense_gap;
    o << (pass ? " PASS" : " FAIL");
    return o.str();
}

Theorem1Report theorem1_check(const fem::AssembledSystem& s, const KernelBases& kb, bool dense) {
    Theorem1Report r;
    r.k2 = kb.k2;
    const la::SparseMatrix C2Y = s.C2 * kb.Y;
    // E [0; y] = M [0; y] + X R^{-1} Upsilon^T (C2 y); the M part vanishes
    // because M lives on the conducting block.
    const la::DenseMatrix UtC2Y = la::DenseMatrix(la::transpose(s.Upsilon) * C2Y);
    const la::DenseMatrix EY = la::DenseMatrix(s.X) * (s.R.llt().solve(UtC2Y));
    const la::SparseMatrix KY = la::transpose(s.C) * (s.M_nu * C2Y);
    const double nE = la::frobenius_norm(s.M) + la::DenseMatrix(s.X).squaredNorm() * s.R.inverse().norm();
    const double nK = la::frobenius_norm(s.K);
    double e = 0, k = 0;
    for (la::Index j = 0; j < EY.cols(); ++j) e = std::max(e, EY.col(j).norm());
    const la::DenseMatrix KYd(KY);
    for (la::Index j = 0; j < KYd.cols(); ++j) k = std::max(k, KYd.col(j).norm());
    r.E_residual = nE > 0 ? e / nE : e;
    r.K_residual = nK > 0 ? k / nK : k;
    r.exact = e == 0.0 && k == 0.0;
    bool ok = r.exact || (r.E_residual <= 1e-12 && r.K_residual <= 1e-12);
    if (dense) {
        const la::DenseMatrix X(s.X);
        la::DenseMatrix E = la::DenseMatrix(s.M) + X * s.R.llt().solve(X.transpose());
        la::DenseMatrix K(s.K);
        la::DenseMatrix S = E / E.norm() + K / K.norm();
        Eigen::SelfAdjointEigenSolver<la::DenseMatrix> es(la::symmetrize(S), Eigen::EigenvaluesOnly);
        const la::Vector ev = es.eigenvalues();  // ascending
        const double tol = 1e-11 * ev(ev.size() - 1);
        int cnt = 0;
        while (cnt < ev.size() && ev(cnt) <= tol) ++cnt;
        r.dense_kernel_dim = cnt;
        const double dropped = cnt > 0 ? std::max(std::abs(ev(cnt - 1)), 1e-300) : 0.0;
        r.dense_gap = (cnt > 0 && cnt < ev.size()) ? ev(cnt) / dropped : 0.0;
        ok = ok && cnt == kb.k2;
    }
    r.pass = ok;
    return r;
}

}  // namespace mqsbt::reg
