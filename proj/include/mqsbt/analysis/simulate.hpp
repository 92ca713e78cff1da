#pragma once

#include "mqsbt/bt/truncation.hpp"
#include "mqsbt/la/types.hpp"
#include "mqsbt/ops/context.hpp"

#include <functional>
#include <string>
#include <vector>

namespace mqsbt::analysis {

// Input voltages at time t, one per winding.
using Input = std::function<la::Vector(double t)>;

// u(t) = amplitude sin(2 pi f t) on every port.
Input sine_input(int m, double amplitude, double frequency);

struct Trajectory {
    std::vector<double> t;    // t_0 = 0, ..., t_N
    la::DenseMatrix u;        // m x (N+1)
    la::DenseMatrix y;        // m x (N+1)
};

// Implicit Euler from x_0 = 0. Full model: (E_r - h A_r) x_k = E_r x_{k-1} + h B_r u_k,
// y_k = -B_r^T (x_k - x_{k-1}) / h + R^{-1} u_k.
Trajectory simulate_full(const ops::OperatorContext& ctx, const Input& u, double t_final, int steps);
// Reduced: (I - h A) x_k = x_{k-1} + h B u_k, y_k = C x_k.
Trajectory simulate_reduced(const bt::ReducedModel& model, const Input& u, double t_final, int steps);

struct SimulationResult {
    Trajectory full, reduced;
    std::vector<double> relerr;  // ||y - y~|| / max_t ||y|| per step
    double max_relerr = 0.0;
};

SimulationResult compare(const Trajectory& full, const Trajectory& reduced);

// Columns: t, u_j, y_j, y~_j per port, relerr.
void write_simulation_csv(const std::string& path, const SimulationResult& r);

}  // namespace mqsbt::analysis
