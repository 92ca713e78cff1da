#include "mqsbt/analysis/simulate.hpp"

#include "mqsbt/errors.hpp"

#include <Eigen/LU>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

namespace mqsbt::analysis {

namespace {

void check_grid(double t_final, int steps) {
    if (!(t_final > 0.0) || steps < 1)
        throw ValidationError("simulate: need t_final > 0 and steps >= 1 (step size h must be positive)");
}

la::Vector input_at(const Input& u, double t, int m) {
    la::Vector v = u(t);
    if (v.size() != m) throw ValidationError("simulate: input has wrong length");
    return v;
}

}  // namespace

Input sine_input(int m, double amplitude, double frequency) {
    return [=](double t) {
        return la::Vector::Constant(m, amplitude * std::sin(2.0 * std::numbers::pi * frequency * t));
    };
}

Trajectory simulate_full(const ops::OperatorContext& ctx, const Input& u, double t_final, int steps) {
    check_grid(t_final, steps);
    const auto& rs = ctx.reg();
    const int m = rs.m();
    const double h = t_final / steps;
    Trajectory tr;
    tr.u.resize(m, steps + 1);
    tr.y.resize(m, steps + 1);
    la::Vector x = la::Vector::Zero(ctx.nr());
    tr.t.push_back(0.0);
    tr.u.col(0) = input_at(u, 0.0, m);
    tr.y.col(0) = rs.Rinv() * tr.u.col(0);
    for (int k = 1; k <= steps; ++k) {
        const double t = k * h;
        const la::Vector uk = input_at(u, t, m);
        const la::Vector rhs = rs.apply_Er(x) + h * (rs.Br() * uk);
        // E - hA = -h (tau E + A) with tau = -1/h
        const la::Vector xn = ctx.shifted_solve(-1.0 / h, rhs) * (-1.0 / h);
        tr.t.push_back(t);
        tr.u.col(k) = uk;
        tr.y.col(k) = -(rs.Br().transpose() * (xn - x)) / h + rs.Rinv() * uk;
        x = xn;
    }
    return tr;
}

Trajectory simulate_reduced(const bt::ReducedModel& model, const Input& u, double t_final, int steps) {
    check_grid(t_final, steps);
    const int m = static_cast<int>(model.B.cols());
    const la::Index l = model.A.rows();
    const double h = t_final / steps;
    const Eigen::PartialPivLU<la::DenseMatrix> lu(la::DenseMatrix::Identity(l, l) - h * model.A);
    Trajectory tr;
    tr.u.resize(m, steps + 1);
    tr.y.resize(m, steps + 1);
    la::Vector x = la::Vector::Zero(l);
    tr.t.push_back(0.0);
    tr.u.col(0) = input_at(u, 0.0, m);
    tr.y.col(0) = model.C * x;
    for (int k = 1; k <= steps; ++k) {
        const double t = k * h;
        const la::Vector uk = input_at(u, t, m);
        x = lu.solve(la::Vector(x + h * (model.B * uk)));
        tr.t.push_back(t);
        tr.u.col(k) = uk;
        tr.y.col(k) = model.C * x;
    }
    return tr;
}

SimulationResult compare(const Trajectory& full, const Trajectory& reduced) {
    if (full.t.size() != reduced.t.size() || full.y.rows() != reduced.y.rows())
        throw ValidationError("compare: trajectories differ in shape");
    SimulationResult r;
    r.full = full;
    r.reduced = reduced;
    double ymax = 0.0;
    for (la::Index k = 0; k < full.y.cols(); ++k) ymax = std::max(ymax, full.y.col(k).norm());
    for (la::Index k = 0; k < full.y.cols(); ++k) {
        const double e = (full.y.col(k) - reduced.y.col(k)).norm();
        const double rel = ymax > 0.0 ? e / ymax : e;
        r.relerr.push_back(rel);
        r.max_relerr = std::max(r.max_relerr, rel);
    }
    return r;
}

void write_simulation_csv(const std::string& path, const SimulationResult& r) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write " + path);
    const la::Index m = r.full.y.rows();
    os << "t";
    for (la::Index j = 0; j < m; ++j) {
        const std::string s = m == 1 ? "" : "_" + std::to_string(j + 1);
        os << ",u" << s << ",y" << s << ",y_reduced" << s;
    }
    os << ",relerr\n";
    char buf[64];
    for (std::size_t k = 0; k < r.full.t.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17e", r.full.t[k]);
        os << buf;
        for (la::Index j = 0; j < m; ++j) {
            std::snprintf(buf, sizeof buf, ",%.17e", r.full.u(j, k));
            os << buf;
            std::snprintf(buf, sizeof buf, ",%.17e", r.full.y(j, k));
            os << buf;
            std::snprintf(buf, sizeof buf, ",%.17e", r.reduced.y(j, k));
            os << buf;
        }
        std::snprintf(buf, sizeof buf, ",%.17e\n", r.relerr[k]);
        os << buf;
    }
}

}  // namespace mqsbt::analysis
