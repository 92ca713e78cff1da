#pragma once

#include "mqsbt/la/types.hpp"

#include <cstdint>
#include <functional>

namespace mqsbt::analysis {

using TransferFunction = std::function<la::CDenseMatrix(la::Complex)>;

struct PassivityReport {
    int samples = 0;
    double min_margin = 0.0;  // min over s of lambda_min(H + H^*) / ||H||
    double min_eigenvalue = 0.0;  // unnormalized value at the worst sample
    la::Complex worst_s{0.0, 0.0};
    bool pass = false;
};

// Half the samples on a grid (Re s log-spaced in [1e-2, 1e4], Im s in
// {0, +-log-spaced up to 1e6}), half random with log-uniform magnitudes.
PassivityReport passivity_scan(const TransferFunction& H, int sample_count, std::uint64_t seed,
                               double tol = 1e-10);

}  // namespace mqsbt::analysis
