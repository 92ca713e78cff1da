#include "mqsbt/analysis/frequency.hpp"

#include "mqsbt/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace mqsbt::analysis {

la::CDenseMatrix transfer_full(const ops::OperatorContext& ctx, la::Complex s) {
    const auto& rs = ctx.reg();
    const la::DenseMatrix& B = rs.Br();
    la::CDenseMatrix H = rs.Rinv().cast<la::Complex>();
    if (s == la::Complex(0.0)) return H;
    la::CDenseMatrix X(B.rows(), B.cols());
    for (la::Index j = 0; j < B.cols(); ++j) X.col(j) = ctx.resolvent(s, la::CVector(B.col(j).cast<la::Complex>()));
    H -= s * (B.transpose().cast<la::Complex>() * X);
    return H;
}

la::CDenseMatrix transfer_full_output_form(const ops::OperatorContext& ctx, la::Complex s) {
    const auto& rs = ctx.reg();
    const la::DenseMatrix& B = rs.Br();
    // A_r is singular, so s = 0 is taken as the limit, which is R^{-1}.
    if (s == la::Complex(0.0)) return rs.Rinv().cast<la::Complex>();
    la::CDenseMatrix H(B.cols(), B.cols());
    for (la::Index j = 0; j < B.cols(); ++j) {
        const la::CVector x = ctx.resolvent(s, la::CVector(B.col(j).cast<la::Complex>()));
        const la::Vector yr = ctx.apply_Cr(la::Vector(x.real()));
        const la::Vector yi = ctx.apply_Cr(la::Vector(x.imag()));
        for (la::Index i = 0; i < H.rows(); ++i) H(i, j) = la::Complex(yr(i), yi(i));
    }
    return H;
}

la::CDenseMatrix transfer_reduced(const bt::ReducedModel& model, la::Complex s) {
    const la::Index l = model.A.rows();
    const la::CDenseMatrix M = s * la::CDenseMatrix::Identity(l, l) - model.A.cast<la::Complex>();
    return model.C.cast<la::Complex>() * Eigen::PartialPivLU<la::CDenseMatrix>(M).solve(model.B.cast<la::Complex>());
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw ValidationError("log_grid: need 0 < lo <= hi and n >= 1");
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        g[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    g.front() = lo;
    if (n > 1) g.back() = hi;
    return g;
}

double spectral_norm(const la::CDenseMatrix& H) {
    if (H.size() == 0) return 0.0;
    if (H.size() == 1) return std::abs(H(0, 0));
    return Eigen::JacobiSVD<la::CDenseMatrix>(H).singularValues()(0);
}

FrequencyResponse frequency_sweep(const ops::OperatorContext* ctx, const bt::ReducedModel* model,
                                  const std::vector<double>& omega) {
    FrequencyResponse fr;
    fr.omega = omega;
    for (double w : omega) {
        const la::Complex s(0.0, w);
        if (ctx) fr.full.push_back(transfer_full(*ctx, s));
        if (model) fr.reduced.push_back(transfer_reduced(*model, s));
        if (ctx && model) fr.error.push_back(spectral_norm(fr.full.back() - fr.reduced.back()));
    }
    return fr;
}

void write_frequency_csv(const std::string& path, const FrequencyResponse& fr) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot write " + path);
    os << "omega,abs_H,abs_H_reduced,abs_error\n";
    char buf[160];
    for (std::size_t i = 0; i < fr.omega.size(); ++i) {
        const double h = fr.full.empty() ? NAN : spectral_norm(fr.full[i]);
        const double hr = fr.reduced.empty() ? NAN : spectral_norm(fr.reduced[i]);
        const double e = fr.error.empty() ? NAN : fr.error[i];
        std::snprintf(buf, sizeof buf, "%.17e,%.17e,%.17e,%.17e\n", fr.omega[i], h, hr, e);
        os << buf;
    }
}

}  // namespace mqsbt::analysis
