#include "mqsbt/analysis/passivity.hpp"

#include "mqsbt/analysis/frequency.hpp"
#include "mqsbt/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

namespace mqsbt::analysis {

PassivityReport passivity_scan(const TransferFunction& H, int sample_count, std::uint64_t seed, double tol) {
    if (sample_count < 1) throw ValidationError("passivity_scan: sample_count must be positive");
    std::vector<la::Complex> pts;
    const int ngrid = sample_count / 2;
    for (int i = 0; i < ngrid; ++i) {
        const double t = ngrid == 1 ? 0.0 : static_cast<double>(i) / (ngrid - 1);
        const double re = std::pow(10.0, -2.0 + 6.0 * t);
        double im = 0.0;
        if (i % 3 == 1) im = std::pow(10.0, -2.0 + 8.0 * t);
        if (i % 3 == 2) im = -std::pow(10.0, -2.0 + 8.0 * t);
        pts.emplace_back(re, im);
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ure(-6.0, 4.0), uim(-4.0, 6.0), sign(0.0, 1.0);
    while (static_cast<int>(pts.size()) < sample_count) {
        const double re = std::pow(10.0, ure(rng));
        const double im = (sign(rng) < 0.5 ? -1.0 : 1.0) * std::pow(10.0, uim(rng));
        pts.emplace_back(re, im);
    }
    PassivityReport rep;
    rep.min_margin = std::numeric_limits<double>::infinity();
    for (const la::Complex& s : pts) {
        const la::CDenseMatrix Hs = H(s);
        const la::CDenseMatrix S = Hs + Hs.adjoint();
        const double lmin = Eigen::SelfAdjointEigenSolver<la::CDenseMatrix>(S, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .minCoeff();
        const double nrm = spectral_norm(Hs);
        const double margin = nrm > 0.0 ? lmin / nrm : lmin;
        if (margin < rep.min_margin) {
            rep.min_margin = margin;
            rep.min_eigenvalue = lmin;
            rep.worst_s = s;
        }
        ++rep.samples;
    }
    rep.pass = rep.min_margin >= -tol;
    return rep;
}

}  // namespace mqsbt::analysis
