#pragma once

#include "mqsbt/bt/truncation.hpp"
#include "mqsbt/la/types.hpp"
#include "mqsbt/ops/context.hpp"

#include <string>
#include <vector>

namespace mqsbt::analysis {

// H_r(s) = -s B_r^T (s E_r - A_r)^{-1} B_r + R^{-1}; H_r(0) = R^{-1}.
la::CDenseMatrix transfer_full(const ops::OperatorContext& ctx, la::Complex s);
// C_r (s E_r - A_r)^{-1} B_r with C_r = -B_r^T E_r^- A_r.
la::CDenseMatrix transfer_full_output_form(const ops::OperatorContext& ctx, la::Complex s);
// C (sI - A)^{-1} B.
la::CDenseMatrix transfer_reduced(const bt::ReducedModel& model, la::Complex s);

std::vector<double> log_grid(double lo, double hi, int n);

struct FrequencyResponse {
    std::vector<double> omega;
    std::vector<la::CDenseMatrix> full, reduced;
    std::vector<double> error;  // ||H(i w) - H~(i w)||_2, empty unless both present
};

// Either ctx or model may be null.
FrequencyResponse frequency_sweep(const ops::OperatorContext* ctx, const bt::ReducedModel* model,
                                  const std::vector<double>& omega);

double spectral_norm(const la::CDenseMatrix& H);

// Columns: omega, |H|, |H~|, |H-H~| (spectral norms for m > 1).
void write_frequency_csv(const std::string& path, const FrequencyResponse& fr);

}  // namespace mqsbt::analysis
