#include "mqsbt/bt/truncation.hpp"

#include "mqsbt/errors.hpp"
#include "mqsbt/la/dense.hpp"
#include "mqsbt/la/matrix_market.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace mqsbt::bt {

double error_bound(const la::Vector& hsv, int ell, int ns) {
    const int nc = static_cast<int>(hsv.size());
    if (ns < 0) throw ValidationError("error_bound: n_s unknown");
    if (ell < 0 || ell > nc) throw ValidationError("error_bound: order out of range");
    if (nc == 0) return 0.0;
    auto lam = [&](int i) { return std::max(0.0, hsv(i - 1)); };
    double s = 0.0;
    for (int i = ell + 1; i <= nc - 1; ++i) s += lam(i);
    s += static_cast<double>(ns - ell + 1) * lam(nc);
    return 2.0 * s;
}

double hinf_error(const la::DenseMatrix& A, const la::DenseMatrix& B, const la::DenseMatrix& Rinv) {
    Eigen::LDLT<la::DenseMatrix> f(A);
    if (f.info() != Eigen::Success || !(f.vectorD().cwiseAbs().minCoeff() > 0.0))
        throw NumericalError("hinf_error: reduced A is singular");
    const la::DenseMatrix D = Rinv + B.transpose() * f.solve(B);
    if (D.size() == 0) return 0.0;
    return Eigen::JacobiSVD<la::DenseMatrix>(D).singularValues()(0);
}

ReducedModel balanced_truncate(const ops::OperatorContext& ctx, const LowRankFactor& Zc,
                               const TruncationOptions& opt) {
    const auto& rs = ctx.reg();
    const la::DenseMatrix& Z = Zc.Z;
    if (Z.cols() == 0) throw ValidationError("balanced_truncate: empty Gramian factor");
    ReducedModel out;
    out.m = rs.m();
    out.ns = opt.ns;
    out.nc = static_cast<int>(Z.cols());
    out.Rinv = rs.Rinv();

    const la::DenseMatrix G = la::symmetrize(-(Z.transpose() * rs.apply_Ar(Z)));
    const la::SymEig eig = la::dense_sym_eig(G, 1e-8);
    out.hsv = eig.values;
    const double lmax = std::max(eig.values(0), 0.0);
    int rank = 0;
    while (rank < out.nc && eig.values(rank) > opt.rank_tol * lmax) ++rank;

    int ell = opt.ell;
    if (ell > 0) {
        if (ell > out.nc || eig.values(ell - 1) <= 0.0 || ell > rank)
            throw NumericalError("balanced_truncate: lambda_" + std::to_string(ell) +
                                 " is not positive; requested order exceeds the numerical rank " +
                                 std::to_string(rank));
    } else {
        if (rank == 0) throw NumericalError("balanced_truncate: Gramian factor has numerical rank 0");
        const double target = opt.tol * Eigen::JacobiSVD<la::DenseMatrix>(out.Rinv).singularValues()(0);
        ell = rank;
        out.bound_met = false;
        for (int l = 1; l <= rank; ++l) {
            double bound = 0.0;
            if (opt.ns >= 0) {
                bound = error_bound(out.hsv, l, opt.ns);
            } else {
                for (int i = l; i < out.nc; ++i) bound += 2.0 * std::max(0.0, out.hsv(i));
            }
            if (bound <= target) {
                ell = l;
                out.bound_met = true;
                break;
            }
        }
    }
    out.ell = ell;

    la::DenseMatrix V = Z * eig.vectors.leftCols(ell);
    for (int j = 0; j < ell; ++j) V.col(j) /= std::sqrt(eig.values(j));
    const la::DenseMatrix AV = rs.apply_Ar(V);
    const la::DenseMatrix EinvAV = ctx.apply_EinvA(V);
    const la::DenseMatrix Araw = -(AV.transpose() * EinvAV);
    out.asymmetry = (Araw - Araw.transpose()).norm() / Araw.norm();
    out.A = la::symmetrize(Araw);
    out.B = -(AV.transpose() * ctx.apply_EinvB());
    out.C = out.B.transpose();

    const la::DenseMatrix EV = rs.apply_Er(V);
    la::DenseMatrix EinvEV(V.rows(), ell);
    for (int j = 0; j < ell; ++j) EinvEV.col(j) = ctx.apply_Einv_range(la::Vector(EV.col(j)));
    out.identity_residual =
        (-(AV.transpose() * EinvEV) - la::DenseMatrix::Identity(ell, ell)).norm();

    Eigen::LLT<la::DenseMatrix> llt(-out.A);
    if (llt.info() != Eigen::Success) throw NumericalError("balanced_truncate: -A is not positive definite");
    out.hinf_error = hinf_error(out.A, out.B, out.Rinv);
    const la::DenseMatrix BEB = rs.Br().transpose() * ctx.apply_EinvB();
    out.hankel_deficit = 0.5 * BEB.trace() - out.hsv.sum();
    if (opt.ns >= 0) {
        out.error_bound = error_bound(out.hsv, ell, opt.ns);
        out.certified_bound = out.error_bound + 2.0 * std::max(out.hankel_deficit, 0.0);
    }
    return out;
}

void write_reduced_model(const std::string& dir, const ReducedModel& model) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const fs::path d(dir);
    std::ofstream os(d / "reduced_model.txt");
    if (!os) throw ValidationError("cannot write " + (d / "reduced_model.txt").string());
    char buf[96];
    os << "ell " << model.ell << "\nm " << model.m << "\nn_s " << model.ns << "\nn_c " << model.nc << "\n";
    std::snprintf(buf, sizeof buf, "error_bound %.17e\nhinf_error %.17e\n", model.error_bound, model.hinf_error);
    os << buf;
    std::snprintf(buf, sizeof buf, "hankel_deficit %.17e\ncertified_bound %.17e\n", model.hankel_deficit,
                  model.certified_bound);
    os << buf;
    os << "hsv";
    for (la::Index i = 0; i < model.hsv.size(); ++i) {
        std::snprintf(buf, sizeof buf, " %.17e", model.hsv(i));
        os << buf;
    }
    os << "\n";
    la::write_matrix_market((d / "A.mtx").string(), model.A);
    la::write_matrix_market((d / "B.mtx").string(), model.B);
    la::write_matrix_market((d / "C.mtx").string(), model.C);
    la::write_matrix_market((d / "Rinv.mtx").string(), model.Rinv);
}

ReducedModel read_reduced_model(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path d(dir);
    std::ifstream is(d / "reduced_model.txt");
    if (!is) throw ValidationError("cannot read " + (d / "reduced_model.txt").string());
    ReducedModel model;
    std::string line;
    while (std::getline(is, line)) {
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "ell") ls >> model.ell;
        else if (key == "m") ls >> model.m;
        else if (key == "n_s") ls >> model.ns;
        else if (key == "n_c") ls >> model.nc;
        else if (key == "error_bound") ls >> model.error_bound;
        else if (key == "hinf_error") ls >> model.hinf_error;
        else if (key == "hankel_deficit") ls >> model.hankel_deficit;
        else if (key == "certified_bound") ls >> model.certified_bound;
        else if (key == "hsv") {
            std::vector<double> v;
            double x;
            while (ls >> x) v.push_back(x);
            model.hsv = Eigen::Map<la::Vector>(v.data(), static_cast<la::Index>(v.size()));
        }
    }
    model.A = la::read_matrix_market_dense((d / "A.mtx").string());
    model.B = la::read_matrix_market_dense((d / "B.mtx").string());
    model.C = la::read_matrix_market_dense((d / "C.mtx").string());
    model.Rinv = la::read_matrix_market_dense((d / "Rinv.mtx").string());
    return model;
}

}  // namespace mqsbt::bt
