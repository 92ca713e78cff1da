#include "mqsbt/bt/adi.hpp"

#include "mqsbt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace mqsbt::bt {

const char* adi_status_name(AdiStatus s) {
    switch (s) {
        case AdiStatus::Converged: return "converged";
        case AdiStatus::MaxIterations: return "max_iterations";
        case AdiStatus::Stagnated: return "stagnated";
    }
    return "?";
}

la::DenseMatrix LowRankFactor::prefix(int k) const {
    const la::Index m = iterations > 0 ? Z.cols() / iterations : 0;
    return Z.leftCols(std::min<la::Index>(Z.cols(), m * k));
}

LowRankFactor lr_adi(const ops::OperatorContext& ctx, const ShiftSet& shifts, const AdiOptions& opt) {
    if (shifts.shifts.empty()) throw ValidationError("lr_adi: empty shift set");
    for (double t : shifts.shifts)
        if (!(t < 0.0)) throw ValidationError("lr_adi: shifts must be negative");
    const auto& rs = ctx.reg();
    LowRankFactor out;
    out.Z.resize(ctx.nr(), 0);
    la::DenseMatrix R = rs.Br();
    const double nb = (R.transpose() * R).norm();
    if (nb == 0.0) {
        out.residuals.push_back(0.0);
        out.status = AdiStatus::Converged;
        return out;
    }
    out.residuals.push_back(1.0);
    const int J = static_cast<int>(shifts.shifts.size());
    double cycle_start = 1.0;
    for (int k = 0; k < opt.maxit; ++k) {
        const double tau = shifts.shifts[k % J];
        const la::DenseMatrix F = ctx.shifted_solve(tau, R);
        R -= 2.0 * tau * rs.apply_Er(F);
        out.Z.conservativeResize(Eigen::NoChange, out.Z.cols() + F.cols());
        out.Z.rightCols(F.cols()) = std::sqrt(-2.0 * tau) * F;
        out.shifts_used.push_back(tau);
        out.iterations = k + 1;
        const double res = (R.transpose() * R).norm() / nb;
        out.residuals.push_back(res);
        if (!std::isfinite(res)) throw NumericalError("lr_adi: residual is not finite at step " + std::to_string(k + 1));
        if (res <= opt.tol) {
            out.status = AdiStatus::Converged;
            return out;
        }
        if ((k + 1) % J == 0) {
            if (res >= cycle_start) {
                out.status = AdiStatus::Stagnated;
                out.message = "no residual decrease over shift cycle ending at step " + std::to_string(k + 1);
                return out;
            }
            cycle_start = res;
        }
    }
    out.status = AdiStatus::MaxIterations;
    out.message = "residual " + std::to_string(out.residuals.back()) + " after " + std::to_string(opt.maxit) +
                  " steps";
    return out;
}

void write_residual_history(const std::string& path, const LowRankFactor& f) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write " + path);
    os << "iteration,residual\n";
    char buf[64];
    for (std::size_t k = 0; k < f.residuals.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%zu,%.17e\n", k, f.residuals[k]);
        os << buf;
    }
}

}  // namespace mqsbt::bt
