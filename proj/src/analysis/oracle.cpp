#include "mqsbt/analysis/oracle.hpp"

#include "mqsbt/errors.hpp"
#include "mqsbt/la/dense.hpp"
#include "mqsbt/la/sparse.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>

namespace mqsbt::analysis {

namespace {

// X (L^{-T}) with L L^T = G
la::DenseMatrix scale_by_inverse_cholesky(const la::DenseMatrix& X, const la::DenseMatrix& G, const char* what) {
    if (X.cols() == 0) return X;
    Eigen::LLT<la::DenseMatrix> llt(la::symmetrize(G));
    if (llt.info() != Eigen::Success)
        throw NumericalError(std::string("dense oracle: ") + what + " is not positive definite");
    la::DenseMatrix Xt = X.transpose();
    llt.matrixL().solveInPlace(Xt);
    return Xt.transpose();
}

// X^T Y for X^T Y known symmetric; only the lower half is computed.
la::DenseMatrix gram(const la::DenseMatrix& X, const la::DenseMatrix& Y) {
    la::DenseMatrix G = la::DenseMatrix::Zero(X.cols(), X.cols());
    G.triangularView<Eigen::Lower>() = X.transpose() * Y;
    return G.selfadjointView<Eigen::Lower>();
}

double rel(const la::DenseMatrix& M, double scale) {
    if (M.size() == 0) return 0.0;
    return M.norm() / scale;
}

// Orthonormal basis of im(M)^perp for M of full column rank, from an
// unpivoted blocked QR; the rank is confirmed on the diagonal of R.
la::DenseMatrix full_rank_complement(const la::DenseMatrix& M, double rank_tol, const char* what) {
    const la::Index n = M.rows(), k = M.cols();
    if (k == 0) return la::DenseMatrix::Identity(n, n);
    if (k > n) throw NumericalError(std::string("dense oracle: ") + what + " has more columns than rows");
    Eigen::HouseholderQR<la::DenseMatrix> qr(M);
    const la::Vector d = qr.matrixQR().diagonal().cwiseAbs();
    if (!(d.minCoeff() > rank_tol * d.maxCoeff()))
        throw NumericalError(std::string("dense oracle: ") + what + " is numerically rank deficient");
    la::DenseMatrix C = la::DenseMatrix::Zero(n, n - k);
    C.bottomRows(n - k).setIdentity();
    C.applyOnTheLeft(qr.householderQ());
    return C;
}

la::DenseMatrix orthonormal_columns(const la::DenseMatrix& X) {
    Eigen::HouseholderQR<la::DenseMatrix> qr(X);
    return qr.householderQ() * la::DenseMatrix::Identity(X.rows(), X.cols());
}

// ker(P) for symmetric positive semidefinite P by shifted subspace iteration
// with (P + delta I)^{-1} followed by Rayleigh-Ritz. The block grows until it
// holds at least one Ritz value above the threshold, so the kernel dimension
// is read off a visible gap.
la::DenseMatrix psd_kernel(const la::DenseMatrix& P, double rank_tol) {
    const la::Index n = P.rows();
    const double nP = P.norm();
    if (n == 0 || nP == 0.0) return la::DenseMatrix::Identity(n, n);
    const double thresh = rank_tol * nP;
    Eigen::LLT<la::DenseMatrix> llt(P + 1e-2 * thresh * la::DenseMatrix::Identity(n, n));
    if (llt.info() != Eigen::Success) throw NumericalError("dense oracle: shifted matrix is not positive definite");
    std::mt19937_64 rng(20240601);
    std::normal_distribution<double> nd;
    for (la::Index p = std::min<la::Index>(64, n);; p = std::min(2 * p, n)) {
        la::DenseMatrix Q = la::DenseMatrix::NullaryExpr(n, p, [&]() { return nd(rng); });
        for (int it = 0; it < 4; ++it) Q = orthonormal_columns(llt.solve(Q));
        Eigen::SelfAdjointEigenSolver<la::DenseMatrix> es(la::symmetrize(Q.transpose() * P * Q));
        const la::Vector& ev = es.eigenvalues();
        la::Index k = 0;
        while (k < p && ev(k) <= thresh) ++k;
        if (k < p || p == n) {
            la::DenseMatrix Y = Q * es.eigenvectors().leftCols(k);
            if (k > 0 && (P * Y).norm() > thresh * std::sqrt(double(k)))
                throw NumericalError("dense oracle: kernel of A_r not resolved");
            return Y;
        }
    }
}

}  // namespace

DenseOracle build_dense_oracle(const reg::RegularizedSystem& rs, const OracleOptions& opt) {
    const int n = rs.nr();
    if (n > opt.cap)
        throw ValidationError("dense oracle: n_r = " + std::to_string(n) + " exceeds the dense cap " +
                              std::to_string(opt.cap));
    DenseOracle o;
    o.nr = n;
    o.Fs = rs.F_sigma();
    o.Ms = rs.M_sigma();
    o.Fn = rs.F_nu();
    o.Mn = rs.sys().M_nu;
    o.E = o.mulE(la::DenseMatrix::Identity(n, n));
    o.A = o.mulA(la::DenseMatrix::Identity(n, n));
    o.B = la::DenseMatrix(rs.F_nu() * rs.sys().Upsilon) * rs.Rinv();
    const double nE = o.E.norm(), nA = o.A.norm();

    // ker(E_r) = ker(F_sigma^T); F_sigma has full column rank.
    const la::DenseMatrix Ys0 = full_rank_complement(la::DenseMatrix(o.Fs), opt.rank_tol, "F_sigma");
    const la::DenseMatrix Yn0 = psd_kernel(-o.A, opt.rank_tol);
    o.Ynu = scale_by_inverse_cholesky(Yn0, gram(Yn0, o.mulE(Yn0)), "Ynu^T E Ynu");
    o.Ysigma = scale_by_inverse_cholesky(Ys0, -gram(Ys0, o.mulA(Ys0)), "-Ysigma^T A Ysigma");
    o.ninf = static_cast<int>(o.Ysigma.cols());
    o.n0 = static_cast<int>(o.Ynu.cols());

    const la::DenseMatrix EYn = o.mulE(o.Ynu), AYs = o.mulA(o.Ysigma);
    la::DenseMatrix M(n, EYn.cols() + AYs.cols());
    M << EYn, AYs;
    o.W1 = full_rank_complement(M, opt.rank_tol, "[E Ynu, A Ysigma]");
    o.ns = static_cast<int>(o.W1.cols());

    const la::DenseMatrix EW = o.mulE(o.W1), AW = o.mulA(o.W1);
    o.E11 = la::symmetrize(o.W1.transpose() * EW);
    o.A11 = la::symmetrize(o.W1.transpose() * AW);
    o.B1 = o.W1.transpose() * o.B;
    Eigen::LLT<la::DenseMatrix> le(o.E11), la_(-o.A11);
    o.E11_spd = le.info() == Eigen::Success;
    o.A11_nsd = la_.info() == Eigen::Success;
    if (!o.E11_spd) throw NumericalError("dense oracle: E11 is not positive definite");

    // Off-diagonal and identity blocks of W^T E W and W^T A W.
    const la::DenseMatrix EYs = o.mulE(o.Ysigma), AYn = o.mulA(o.Ynu);
    const auto I0 = la::DenseMatrix::Identity(o.n0, o.n0);
    const auto Ii = la::DenseMatrix::Identity(o.ninf, o.ninf);
    o.block_residual = std::max({rel(o.W1.transpose() * EYn, nE), rel(o.W1.transpose() * EYs, nE),
                                 rel(o.Ynu.transpose() * EYs, nE), rel(o.Ysigma.transpose() * EYs, nE),
                                 rel(o.W1.transpose() * AYn, nA), rel(o.W1.transpose() * AYs, nA),
                                 rel(o.Ynu.transpose() * AYs, nA), rel(o.Ynu.transpose() * AYn, nA),
                                 rel(o.Ynu.transpose() * EYn - I0, nE * std::sqrt(std::max(1, o.n0))),
                                 rel(o.Ysigma.transpose() * AYs + Ii, nA * std::sqrt(std::max(1, o.ninf)))});

    const la::DenseMatrix E11inv = le.solve(la::DenseMatrix::Identity(o.ns, o.ns));
    o.Einv = o.W1 * E11inv * o.W1.transpose() + o.Ynu * o.Ynu.transpose();
    o.Einv = la::symmetrize(o.Einv);
    o.W1hat = EW * E11inv;
    o.Pi = o.W1 * o.W1hat.transpose();
    return o;
}

la::DenseMatrix DenseOracle::mulE(const la::DenseMatrix& X) const {
    const la::DenseMatrix T = Fs.transpose() * X;
    return Fs * (Ms * T);
}

la::DenseMatrix DenseOracle::mulA(const la::DenseMatrix& X) const {
    const la::DenseMatrix T = Fn.transpose() * X;
    return -(Fn * (Mn * T));
}

la::DenseMatrix DenseOracle::Ainv() const {
    Eigen::LLT<la::DenseMatrix> l(-A11);
    if (l.info() != Eigen::Success) throw NumericalError("dense oracle: -A11 is not positive definite");
    const la::DenseMatrix A11inv = -l.solve(la::DenseMatrix::Identity(ns, ns));
    return la::symmetrize(W1 * A11inv * W1.transpose() - Ysigma * Ysigma.transpose());
}

la::DenseMatrix lyap_dense(const la::DenseMatrix& E, const la::DenseMatrix& A, const la::DenseMatrix& Q) {
    const la::Index n = E.rows();
    if (n == 0) return la::DenseMatrix(0, 0);
    Eigen::LLT<la::DenseMatrix> llt(E);
    if (llt.info() != Eigen::Success) throw NumericalError("lyap_dense: E is not positive definite");
    const auto L = llt.matrixL();
    // Abar = L^{-1} A L^{-T}, Qbar = L^{-1} Q L^{-T}
    la::DenseMatrix Abar = L.solve(A);
    Abar = L.solve(la::DenseMatrix(Abar.transpose())).transpose();
    la::DenseMatrix Qbar = L.solve(Q);
    Qbar = L.solve(la::DenseMatrix(Qbar.transpose())).transpose();
    Eigen::SelfAdjointEigenSolver<la::DenseMatrix> es(la::symmetrize(Abar));
    const la::Vector d = es.eigenvalues();
    const la::DenseMatrix& U = es.eigenvectors();
    la::DenseMatrix C = U.transpose() * Qbar * U;
    for (la::Index i = 0; i < n; ++i)
        for (la::Index j = 0; j < n; ++j) {
            const double den = d(i) + d(j);
            if (!(den < 0.0)) throw NumericalError("lyap_dense: A is not negative definite");
            C(i, j) = -C(i, j) / den;
        }
    // X = L^{-T} U C U^T L^{-1}
    la::DenseMatrix X = U * C * U.transpose();
    X = L.transpose().solve(X);
    X = L.transpose().solve(la::DenseMatrix(X.transpose())).transpose();
    return la::symmetrize(X);
}

Gramians dense_gramians(const DenseOracle& o) {
    Gramians g;
    const la::DenseMatrix Xc = lyap_dense(o.E11, o.A11, o.B1 * o.B1.transpose());
    const la::DenseMatrix C1 = -(o.B1.transpose() * o.E11.llt().solve(o.A11));
    const la::DenseMatrix Xo = lyap_dense(o.E11, o.A11, C1.transpose() * C1);
    g.Gc = la::symmetrize(o.W1 * Xc * o.W1.transpose());
    g.Go = la::symmetrize(o.W1 * Xo * o.W1.transpose());
    g.Xc = Xc;
    g.Xo = Xo;
    return g;
}

double gramian_identity_residual(const DenseOracle& o, const Gramians& g) {
    const la::DenseMatrix EW = o.mulE(o.W1), AW = o.mulA(o.W1);
    const la::DenseMatrix lhs = EW * g.Xo * EW.transpose();
    const la::DenseMatrix rhs = AW * g.Xc * AW.transpose();
    const double d = rhs.norm();
    return d > 0 ? (lhs - rhs).norm() / d : (lhs - rhs).norm();
}

PencilSpectrum pencil_spectrum(const DenseOracle& o, double class_tol) {
    PencilSpectrum ps;
    const la::Index n = o.E.rows();
    const double theta = o.E.norm() / o.A.norm();
    Eigen::LLT<la::DenseMatrix> llt(la::symmetrize(o.E - theta * o.A));
    if (llt.info() != Eigen::Success)
        throw NumericalError("pencil_spectrum: E - theta A is not positive definite (pencil is singular)");
    const auto L = llt.matrixL();
    // L^{-1} E L^{-T} = G Ms G^T with G = L^{-1} Fs
    const la::DenseMatrix G = L.solve(la::DenseMatrix(o.Fs));
    const la::DenseMatrix T = G * (o.Ms * G.transpose());
    Eigen::SelfAdjointEigenSolver<la::DenseMatrix> es(la::symmetrize(T), Eigen::EigenvaluesOnly);
    const la::Vector mu = es.eigenvalues();  // ascending, in [0, 1]
    std::vector<double> fin;
    double max_inf_mu = 0.0, min_kept_mu = 1.0, min_zero_gap = 1.0, max_kept_mu = 0.0;
    for (la::Index i = 0; i < n; ++i) {
        const double m = mu(i);
        if (m <= class_tol) {
            ++ps.ninf;
            max_inf_mu = std::max(max_inf_mu, std::abs(m));
        } else if (m >= 1.0 - class_tol) {
            ++ps.nzero;
            min_zero_gap = std::min(min_zero_gap, std::max(std::abs(1.0 - m), 1e-16));
        } else {
            fin.push_back((m - 1.0) / (m * theta));
            min_kept_mu = std::min(min_kept_mu, m);
            max_kept_mu = std::max(max_kept_mu, m);
        }
    }
    std::sort(fin.begin(), fin.end());
    ps.nfinite = static_cast<int>(fin.size());
    ps.finite = Eigen::Map<la::Vector>(fin.data(), static_cast<la::Index>(fin.size()));
    ps.max_finite = fin.empty() ? 0.0 : fin.back();
    ps.gap_inf = ps.ninf > 0 ? min_kept_mu / std::max(max_inf_mu, 1e-16) : 0.0;
    ps.gap_zero = ps.nzero > 0 && !fin.empty() ? (1.0 - max_kept_mu) / min_zero_gap : 0.0;

    if (o.ns > 0) {
        const la::DenseMatrix K = o.E11.llt().solve(o.A11);
        Eigen::EigenSolver<la::DenseMatrix> ev(K, false);
        const la::CVector lam = ev.eigenvalues();
        const double big = lam.cwiseAbs().maxCoeff();
        ps.max_imag = lam.imag().cwiseAbs().maxCoeff() / big;
    }
    return ps;
}

ModalTransfer::ModalTransfer(const DenseOracle& o, const la::DenseMatrix& Rinv) : Rinv_(Rinv) {
    // A11 v = lambda E11 v with V^T E11 V = I
    Eigen::GeneralizedSelfAdjointEigenSolver<la::DenseMatrix> es(o.A11, o.E11);
    if (es.info() != Eigen::Success) throw NumericalError("ModalTransfer: eigensolver failed");
    poles_ = es.eigenvalues();
    Bm_ = es.eigenvectors().transpose() * o.B1;
}

la::CDenseMatrix ModalTransfer::operator()(la::Complex s) const {
    la::CDenseMatrix H = Rinv_.cast<la::Complex>();
    const la::Index m = Bm_.cols();
    for (la::Index k = 0; k < poles_.size(); ++k) {
        const la::Complex f = s / (s - poles_(k));
        for (la::Index i = 0; i < m; ++i)
            for (la::Index j = 0; j < m; ++j) H(i, j) -= f * Bm_(k, i) * Bm_(k, j);
    }
    return H;
}

}  // namespace mqsbt::analysis
