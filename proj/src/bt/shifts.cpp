#include "mqsbt/bt/shifts.hpp"

#include "mqsbt/errors.hpp"

#include <boost/math/special_functions/jacobi_elliptic.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mqsbt::bt {

namespace {

void check_interval(double a, double b) {
    if (!(a > 0.0) || !(b >= a) || !std::isfinite(b))
        throw ValidationError("shifts: need 0 < a <= b, got a = " + std::to_string(a) +
                              ", b = " + std::to_string(b));
}

double log_ratio(const std::vector<double>& shifts, double x) {
    double s = 0.0;
    for (double t : shifts) {
        const double p = -t;
        const double num = std::abs(x - p);
        if (num == 0.0) return -INFINITY;
        s += std::log(num / (x + p));
    }
    return s;
}

}  // namespace

const char* shift_method_name(ShiftMethod m) {
    return m == ShiftMethod::Wachspress ? "wachspress" : "logspace";
}

double adi_minimax(const std::vector<double>& shifts, double a, double b) {
    check_interval(a, b);
    if (shifts.empty()) return 1.0;
    if (a == b) return std::exp(log_ratio(shifts, a));
    const int N = 4000;
    const double la = std::log(a), lb = std::log(b);
    std::vector<double> f(N + 1);
    for (int i = 0; i <= N; ++i) f[i] = log_ratio(shifts, std::exp(la + (lb - la) * i / N));
    double best = *std::max_element(f.begin(), f.end());
    // Refine every interior local maximum of the grid.
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int i = 1; i < N; ++i) {
        if (!(f[i] >= f[i - 1] && f[i] >= f[i + 1])) continue;
        double lo = la + (lb - la) * (i - 1) / N, hi = la + (lb - la) * (i + 1) / N;
        double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
        double f1 = log_ratio(shifts, std::exp(x1)), f2 = log_ratio(shifts, std::exp(x2));
        for (int it = 0; it < 60; ++it) {
            if (f1 > f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = log_ratio(shifts, std::exp(x1));
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = log_ratio(shifts, std::exp(x2));
            }
        }
        best = std::max({best, f1, f2});
    }
    return std::exp(best);
}

ShiftSet wachspress_shifts(double a, double b, int J) {
    check_interval(a, b);
    if (J < 1) throw ValidationError("wachspress_shifts: J must be positive");
    ShiftSet s;
    s.method = ShiftMethod::Wachspress;
    s.a = a;
    s.b = b;
    if (a == b) {
        s.shifts.assign(1, -a);
        s.rho = 0.0;
        return s;
    }
    const double kp = a / b;
    const double k = std::sqrt((1.0 - kp) * (1.0 + kp));
    // K(k) = pi / (2 AGM(1, k')), accurate for k close to 1.
    double x = 1.0, y = kp;
    while (std::abs(x - y) > 1e-15 * x) {
        const double t = 0.5 * (x + y);
        y = std::sqrt(x * y);
        x = t;
    }
    const double K = std::numbers::pi / (2.0 * x);
    for (int j = 1; j <= J; ++j) {
        const double u = (2.0 * j - 1.0) * K / (2.0 * J);
        double p = b * boost::math::jacobi_dn(k, u);
        p = std::clamp(p, a, b);
        s.shifts.push_back(-p);
    }
    s.rho = adi_minimax(s.shifts, a, b);
    return s;
}

ShiftSet wachspress_shifts(double a, double b, double eps, int max_shifts) {
    check_interval(a, b);
    if (!(eps > 0.0 && eps < 1.0)) throw ValidationError("wachspress_shifts: eps must lie in (0, 1)");
    ShiftSet s;
    for (int J = 1; J <= max_shifts; ++J) {
        s = wachspress_shifts(a, b, J);
        if (s.rho * s.rho <= eps) return s;
    }
    return s;
}

ShiftSet logspace_shifts(double a, double b, int J) {
    check_interval(a, b);
    if (J < 1) throw ValidationError("logspace_shifts: J must be positive");
    ShiftSet s;
    s.method = ShiftMethod::Logspace;
    s.a = a;
    s.b = b;
    for (int j = 0; j < J; ++j) {
        const double t = J == 1 ? 0.5 : static_cast<double>(j) / (J - 1);
        s.shifts.push_back(-std::exp(std::log(a) + t * (std::log(b) - std::log(a))));
    }
    s.rho = adi_minimax(s.shifts, a, b);
    return s;
}

}  // namespace mqsbt::bt
