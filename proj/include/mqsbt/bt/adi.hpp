#pragma once

#include "mqsbt/bt/shifts.hpp"
#include "mqsbt/la/types.hpp"
#include "mqsbt/ops/context.hpp"

#include <string>
#include <vector>

namespace mqsbt::bt {

struct AdiOptions {
    double tol = 1e-10;  // on ||R_k^T R_k||_F / ||B_r^T B_r||_F
    int maxit = 60;      // iterations; each adds m columns
};

enum class AdiStatus { Converged, MaxIterations, Stagnated };
const char* adi_status_name(AdiStatus s);

struct LowRankFactor {
    la::DenseMatrix Z;               // n_r x n_c
    std::vector<double> residuals;   // residuals[k] after k steps, residuals[0] = 1
    std::vector<double> shifts_used;
    int iterations = 0;
    AdiStatus status = AdiStatus::MaxIterations;
    std::string message;
    // First k steps of the factor.
    la::DenseMatrix prefix(int k) const;
};

// F_k = (tau_k E_r + A_r)^{-1} R_{k-1}, R_k = R_{k-1} - 2 tau_k E_r F_k,
// Z_k = [Z_{k-1}, sqrt(-2 tau_k) F_k], R_0 = B_r. Shifts are cycled.
// A full cycle without residual decrease stops with status Stagnated.
LowRankFactor lr_adi(const ops::OperatorContext& ctx, const ShiftSet& shifts, const AdiOptions& opt = {});

void write_residual_history(const std::string& path, const LowRankFactor& f);

}  // namespace mqsbt::bt
