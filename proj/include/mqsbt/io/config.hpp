#pragma once

#include "mqsbt/bt/shifts.hpp"
#include "mqsbt/fem/assembly.hpp"
#include "mqsbt/mesh/mesh.hpp"

#include <string>
#include <vector>

namespace mqsbt::io {

struct MorSpec {
    double tol_adi = 1e-10;
    int maxit = 60;
    double eps_shift = 1e-10;
    bt::ShiftMethod shift_method = bt::ShiftMethod::Wachspress;
    int shift_count = 0;  // 0: smallest Wachspress count meeting eps_shift
    int ell = 0;          // 0: smallest order with error_bound <= tol_hsv ||R^{-1}||
    double tol_hsv = 1e-8;
    int n0 = -1;  // -1: interior nodes minus k2
};

struct AnalysisSpec {
    double omega_min = 1e-4, omega_max = 1e6;
    int omega_points = 200;
    double t_final = 0.08;
    int steps = 300;
    double amplitude = 5e4;
    double frequency = 150.0;
    int passivity_samples = 50;
};

struct RunConfig {
    mesh::GeometrySpec geometry;
    fem::MaterialSpec material;
    double turns = 1600.0;
    double area = 2e-4;
    MorSpec mor;
    AnalysisSpec analysis;
    std::string output_dir = "run";
    int oracle_cap = 5000;

    // One winding on the coil shell of the geometry.
    std::vector<fem::WindingSpec> windings() const;
    // "key = value" lines for every key, full precision, in table order.
    std::string echo() const;
};

// Flat "section.key = value" lines; '#' starts a comment; blank lines are
// ignored. Unknown or repeated keys, malformed values and violated
// invariants throw ValidationError with the line number.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");
RunConfig parse_config(const std::string& path);

// Cross-field checks (geometry ordering, output range ordering).
void validate(const RunConfig& cfg);

// Every accepted key, in table order.
std::vector<std::string> config_keys();

}  // namespace mqsbt::io
