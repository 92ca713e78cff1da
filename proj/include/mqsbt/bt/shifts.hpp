#pragma once

#include <string>
#include <vector>

namespace mqsbt::bt {

enum class ShiftMethod { Wachspress, Logspace };
const char* shift_method_name(ShiftMethod m);

struct ShiftSet {
    std::vector<double> shifts;  // negative, within [-b, -a]
    ShiftMethod method = ShiftMethod::Wachspress;
    double rho = 0.0;  // achieved minimax value on [a, b]
    double a = 0.0, b = 0.0;
};

// max over x in [a, b] of prod_j |(x - p_j) / (x + p_j)| with p_j = -shifts[j].
// Log-spaced grid followed by golden-section refinement around the peaks.
double adi_minimax(const std::vector<double>& shifts, double a, double b);

// J Wachspress parameters p_j = b dn((2j - 1) K / (2J), k) with k' = a / b.
ShiftSet wachspress_shifts(double a, double b, int J);
// Smallest J with rho^2 <= eps. The normalized residual ||R^T R|| of one
// full LR-ADI cycle scales with rho^2.
ShiftSet wachspress_shifts(double a, double b, double eps, int max_shifts = 64);
// J parameters geometrically spaced in [a, b].
ShiftSet logspace_shifts(double a, double b, int J);

}  // namespace mqsbt::bt
