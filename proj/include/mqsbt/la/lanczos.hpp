#pragma once

#include "mqsbt/la/types.hpp"

#include <functional>

namespace mqsbt::la {

using LinearOp = std::function<Vector(const Vector&)>;

struct LanczosOptions {
    int maxit = 100;
    double tol = 1e-8;
    // Inner product <x,y> = x^T M y. Empty means Euclidean.
    LinearOp metric;
    // ||w||_M below breakdown_tol * ||L q||_M ends the recurrence.
    double breakdown_tol = 1e-12;
};

struct LanczosResult {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    Vector ritz;  // ascending
    int iterations = 0;
    bool converged = false;
    // Krylov space became invariant; the Ritz values are then exact.
    bool breakdown = false;
};

// Lanczos with full reorthogonalization (two passes of classical Gram-Schmidt
// in the chosen inner product). op must be self-adjoint in that inner product
// on the Krylov space generated from start.
LanczosResult lanczos_extremal(const LinearOp& op, const Vector& start,
                               const LanczosOptions& opt = {});

}  // namespace mqsbt::la
