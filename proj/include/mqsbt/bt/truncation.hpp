#pragma once

#include "mqsbt/bt/adi.hpp"
#include "mqsbt/la/types.hpp"
#include "mqsbt/ops/context.hpp"

#include <string>

namespace mqsbt::bt {

struct TruncationOptions {
    int ell = 0;            // 0 selects the order from tol
    double tol = 1e-8;      // bound target relative to ||R^{-1}||_2
    int ns = -1;            // number of finite nonzero eigenvalues; -1 if unknown
    double rank_tol = 1e-14;  // lambda_i <= rank_tol * lambda_1 counts as zero
};

// E = I implicitly; C = B^T.
struct ReducedModel {
    la::DenseMatrix A, B, C;
    la::DenseMatrix Rinv;
    la::Vector hsv;  // all eigenvalues of -Z^T A_r Z, descending
    int ell = 0;
    int m = 0;
    int ns = -1;
    int nc = 0;
    double error_bound = -1.0;  // -1 when ns is unknown
    // Hankel mass missing from the truncated Gramian: the Hankel values of the
    // exact Gramian sum to trace(B_r^T E_r^- B_r) / 2, the trace of the
    // projected Lyapunov equation.
    double hankel_deficit = 0.0;
    // error_bound + 2 max(hankel_deficit, 0). Z Z^T <= G_c, so by Ky Fan the
    // exact tail sum exceeds the computed one by at most the deficit.
    double certified_bound = -1.0;
    double hinf_error = 0.0;
    double identity_residual = 0.0;  // ||-(A_r V)^T E_r^- E_r V - I||_F
    double asymmetry = 0.0;          // ||A - A^T||_F / ||A||_F before symmetrization
    bool bound_met = true;
};

// 2 (lambda_{l+1} + ... + lambda_{nc-1} + (ns - l + 1) lambda_nc), 1-based,
// negative round-off values clamped to zero.
double error_bound(const la::Vector& hsv, int ell, int ns);
// ||R^{-1} + B^T A^{-1} B||_2.
double hinf_error(const la::DenseMatrix& A, const la::DenseMatrix& B, const la::DenseMatrix& Rinv);

ReducedModel balanced_truncate(const ops::OperatorContext& ctx, const LowRankFactor& Zc,
                               const TruncationOptions& opt = {});

// Header reduced_model.txt plus A.mtx, B.mtx, C.mtx, Rinv.mtx in dir.
void write_reduced_model(const std::string& dir, const ReducedModel& model);
ReducedModel read_reduced_model(const std::string& dir);

}  // namespace mqsbt::bt
