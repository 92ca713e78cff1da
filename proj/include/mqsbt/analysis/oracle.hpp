#pragma once

#include "mqsbt/la/types.hpp"
#include "mqsbt/reg/regularized.hpp"

#include <string>

namespace mqsbt::analysis {

struct OracleOptions {
    int cap = 5000;           // largest n_r handled densely
    double rank_tol = 1e-10;  // relative, for rank decisions
};

// Dense quasi-Weierstrass construction for (E_r, A_r).
// W = [W1, Ynu, Ysigma] with Ynu^T E Ynu = I and Ysigma^T (-A) Ysigma = I, so
// W^T E W = diag(E11, I, 0) and W^T A W = diag(A11, 0, -I).
struct DenseOracle {
    la::DenseMatrix E, A, B;
    // E_r = Fs Ms Fs^T and A_r = -Fn Mn Fn^T, kept factored for products
    la::SparseMatrix Fs, Ms, Fn, Mn;
    la::DenseMatrix Ysigma, Ynu, W1, W1hat;
    la::DenseMatrix E11, A11, B1;
    la::DenseMatrix Einv;  // W1 E11^{-1} W1^T + Ynu Ynu^T
    la::DenseMatrix Pi;    // W1 W1hat^T
    int nr = 0, ns = 0, n0 = 0, ninf = 0;
    // max over the off-diagonal blocks of W^T E W and W^T A W, and the
    // deviation of the identity blocks, each relative to ||E|| or ||A||
    double block_residual = 0.0;
    bool E11_spd = false, A11_nsd = false;

    // W (A11^{-1}, 0, -I) W^T
    la::DenseMatrix Ainv() const;
    la::DenseMatrix mulE(const la::DenseMatrix& X) const;
    la::DenseMatrix mulA(const la::DenseMatrix& X) const;
};

DenseOracle build_dense_oracle(const reg::RegularizedSystem& rs, const OracleOptions& opt = {});

// Solves E X A + A X E = -Q for symmetric Q, E SPD and -A SPD, through
// E = L L^T and the eigendecomposition of L^{-1} A L^{-T}.
la::DenseMatrix lyap_dense(const la::DenseMatrix& E, const la::DenseMatrix& A, const la::DenseMatrix& Q);

struct Gramians {
    la::DenseMatrix Xc, Xo;  // reduced solutions on the W1 coordinates
    la::DenseMatrix Gc, Go;
};

// Projected Gramians W1 X W1^T with E11 X A11 + A11 X E11 = -B1 B1^T
// (resp. -C1^T C1, C1 = -B1^T E11^{-1} A11).
Gramians dense_gramians(const DenseOracle& o);

// ||E Go E - A Gc A||_F / ||A Gc A||_F, formed from the thin factors E W1, A W1.
double gramian_identity_residual(const DenseOracle& o, const Gramians& g);

// Generalized eigenvalues of (E, A) via S = E - theta A = L L^T and the
// eigenvalues mu of L^{-1} E L^{-T}: lambda = (mu - 1) / (mu theta),
// mu = 0 infinite, mu = 1 zero.
struct PencilSpectrum {
    la::Vector finite;       // finite nonzero eigenvalues, ascending
    int ninf = 0, nzero = 0, nfinite = 0;
    double max_finite = 0.0;  // largest finite eigenvalue
    double max_imag = 0.0;    // max |Im| / max |lambda| of eig(E11^{-1} A11)
    double gap_inf = 0.0;     // smallest kept mu / largest mu counted as infinite
    double gap_zero = 0.0;    // (1 - largest finite mu) / (1 - smallest mu counted as zero)
};

PencilSpectrum pencil_spectrum(const DenseOracle& o, double class_tol = 1e-9);

// H(s) = R^{-1} - s B1^T (s E11 - A11)^{-1} B1 via the eigendecomposition
// of (A11, E11).
class ModalTransfer {
public:
    ModalTransfer(const DenseOracle& o, const la::DenseMatrix& Rinv);
    la::CDenseMatrix operator()(la::Complex s) const;
    const la::Vector& poles() const { return poles_; }

private:
    la::Vector poles_;
    la::DenseMatrix Bm_;  // modal input weights, n_s x m
    la::DenseMatrix Rinv_;
};

}  // namespace mqsbt::analysis
