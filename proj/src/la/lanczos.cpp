#include "mqsbt/la/lanczos.hpp"

#include "mqsbt/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <vector>

namespace mqsbt::la {

namespace {

struct Ritz {
    Vector values;
    Vector last_row;  // last components of the normalized eigenvectors
};

Ritz tridiagonal_ritz(const std::vector<double>& alpha, const std::vector<double>& beta) {
    const Index k = static_cast<Index>(alpha.size());
    Vector d(k), e(std::max<Index>(k - 1, 0));
    for (Index i = 0; i < k; ++i) d(i) = alpha[i];
    for (Index i = 0; i + 1 < k; ++i) e(i) = beta[i];
    Ritz r;
    if (k == 1) {
        r.values = d;
        r.last_row = Vector::Ones(1);
        return r;
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es;
    es.computeFromTridiagonal(d, e, Eigen::ComputeEigenvectors);
    r.values = es.eigenvalues();
    r.last_row = es.eigenvectors().row(k - 1).transpose();
    return r;
}

}  // namespace

LanczosResult lanczos_extremal(const LinearOp& op, const Vector& start, const LanczosOptions& opt) {
    auto M = [&](const Vector& x) -> Vector { return opt.metric ? opt.metric(x) : x; };
    Vector Mq = M(start);
    double nrm2 = start.dot(Mq);
    if (!(nrm2 > 0.0)) throw ValidationError("lanczos: start vector has zero norm");

    LanczosResult res;
    std::vector<Vector> Q, MQ;
    std::vector<double> alpha, beta;
    double nrm = std::sqrt(nrm2);
    Q.push_back(start / nrm);
    MQ.push_back(Mq / nrm);
    double prev_min = 0.0, prev_max = 0.0;

    for (int j = 0; j < opt.maxit; ++j) {
        Vector w = op(Q[j]);
        const double a = MQ[j].dot(w);
        alpha.push_back(a);
        Vector Mw = M(w);
        const double scale_w = std::sqrt(std::max(w.dot(Mw), 0.0));
        for (int pass = 0; pass < 2; ++pass)
            for (size_t i = 0; i < Q.size(); ++i) {
                const double c = MQ[i].dot(w);
                w -= c * Q[i];
            }
        Mw = M(w);
        const double b2 = w.dot(Mw);
        const double b = b2 > 0.0 ? std::sqrt(b2) : 0.0;

        Ritz r = tridiagonal_ritz(alpha, beta);
        res.ritz = r.values;
        res.lambda_min = r.values(0);
        res.lambda_max = r.values(r.values.size() - 1);
        res.iterations = j + 1;

        if (b <= opt.breakdown_tol * std::max(scale_w, std::abs(a))) {
            res.breakdown = true;
            res.converged = true;
            return res;
        }
        if (j >= 1) {
            const double scale = std::max(std::abs(res.lambda_min), std::abs(res.lambda_max));
            const Index k = r.values.size();
            const double est_min = b * std::abs(r.last_row(0));
            const double est_max = b * std::abs(r.last_row(k - 1));
            const bool steady = std::abs(res.lambda_min - prev_min) <= opt.tol * scale &&
                                std::abs(res.lambda_max - prev_max) <= opt.tol * scale;
            const bool small_residual = est_min <= opt.tol * scale && est_max <= opt.tol * scale;
            if (steady && small_residual) {
                res.converged = true;
                return res;
            }
        }
        prev_min = res.lambda_min;
        prev_max = res.lambda_max;
        beta.push_back(b);
        Q.push_back(w / b);
        MQ.push_back(Mw / b);
    }
    return res;
}

}  // namespace mqsbt::la
