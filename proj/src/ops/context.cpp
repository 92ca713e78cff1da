#include "mqsbt/ops/context.hpp"

#include "mqsbt/errors.hpp"
#include "mqsbt/la/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mqsbt::ops {

namespace {

template <class Scalar>
void put_block(std::vector<Eigen::Triplet<Scalar, int>>& t, const la::SparseMatrix& B, la::Index ro,
               la::Index co, Scalar f) {
    for (la::Index i = 0; i < B.outerSize(); ++i)
        for (la::SparseMatrix::InnerIterator it(B, i); it; ++it)
            t.emplace_back(static_cast<int>(ro + i), static_cast<int>(co + it.col()), f * it.value());
}

std::string shift_name(la::Complex tau) {
    std::ostringstream o;
    o.precision(17);
    o << "tau = " << tau.real();
    if (tau.imag() != 0.0) o << (tau.imag() < 0 ? " - " : " + ") << std::abs(tau.imag()) << "i";
    return o.str();
}

}  // namespace

OperatorContext::OperatorContext(std::shared_ptr<const reg::RegularizedSystem> rs, ContextOptions opt)
    : rs_(std::move(rs)), opt_(opt) {
    const auto& s = rs_->sys();
    if (s.n1 > 0) M11_ = std::make_unique<la::RealFactorization>(la::RealFactorization::Matrix(s.M11),
                                                                 opt_.factorization);
    const la::SparseMatrix YX = rs_->YtX2();
    const la::SparseMatrix Bd = la::block2x2(-rs_->YtK22Y(), YX, la::transpose(YX), la::SparseMatrix(s.m, s.m));
    try {
        border_ = std::make_unique<la::RealFactorization>(la::RealFactorization::Matrix(Bd), opt_.factorization);
    } catch (const SingularMatrixError& e) {
        throw NumericalError(std::string("internal error: infinite-part bordered matrix is singular: ") + e.what());
    }
    const la::SparseMatrix YtY = la::transpose(rs_->Yhat()) * rs_->Yhat();
    YtY_ = std::make_unique<la::RealFactorization>(la::RealFactorization::Matrix(YtY), opt_.factorization);

    EinvB_.resize(nr(), m());
    for (int j = 0; j < m(); ++j) {
        la::Vector u = la::Vector::Zero(nr());
        u.tail(rs_->nr2()) = rs_->Z().col(j);
        EinvB_.col(j) = u - apply_Pi_inf(u);
    }
}

la::Vector OperatorContext::solve_Y_sigma(const la::Vector& v) const {
    const int q = rs_->nr2();
    la::Vector rhs = la::Vector::Zero(q + m());
    rhs.head(q) = v.tail(q);
    const la::Vector sol = border_->solve(rhs);
    la::Vector z = la::Vector::Zero(nr());
    z.tail(q) = sol.head(q);
    return z;
}

la::Vector OperatorContext::apply_Pi_inf(const la::Vector& w) const {
    if (w.size() != nr()) throw ValidationError("apply_Pi_inf: wrong length");
    return solve_Y_sigma(rs_->apply_Ar(w));
}

la::Vector OperatorContext::apply_Einv_range(const la::Vector& vhat) const {
    const auto& s = rs_->sys();
    const int n1 = s.n1, q = rs_->nr2();
    const la::DenseMatrix& Z = rs_->Z();
    // step 3
    const la::Vector w2hat = Z.transpose() * vhat.tail(q);
    // step 4
    la::Vector w1;
    if (n1 > 0) {
        la::Vector r1 = vhat.head(n1) - la::spmv(s.X1, w2hat);
        w1 = M11_->solve(r1);
    } else {
        w1 = la::Vector(0);
    }
    // step 5
    const la::Vector w2 = -Z * (la::spmv(la::transpose(s.X1), w1) - s.R * w2hat);
    la::Vector w(nr());
    w.head(n1) = w1;
    w.tail(q) = w2;
    // steps 6 and 7
    return w - apply_Pi_inf(w);
}

la::Vector OperatorContext::apply_EinvA(const la::Vector& v) const {
    if (v.size() != nr()) throw ValidationError("apply_EinvA: wrong length");
    return apply_Einv_range(rs_->apply_Ar(v));
}

la::DenseMatrix OperatorContext::apply_EinvA(const la::DenseMatrix& V) const {
    la::DenseMatrix Y(nr(), V.cols());
    for (la::Index j = 0; j < V.cols(); ++j) Y.col(j) = apply_EinvA(la::Vector(V.col(j)));
    return Y;
}

la::Vector OperatorContext::apply_Cr(const la::Vector& v) const {
    return -(rs_->Br().transpose() * apply_EinvA(v));
}

template <class Scalar>
Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int> OperatorContext::bordered_shift_matrix(Scalar tau) const {
    const auto& s = rs_->sys();
    const la::Index n1 = s.n1, n2 = s.n2, mm = s.m;
    const la::Index r1 = n1, r2 = n1 + n2, r3 = n1 + n2 + mm, n = r3 + rs_->k2();
    std::vector<Eigen::Triplet<Scalar, int>> t;
    const Scalar one(1.0);
    put_block<Scalar>(t, s.M11, 0, 0, tau);
    put_block<Scalar>(t, s.K11, 0, 0, -one);
    put_block<Scalar>(t, s.K12, 0, r1, -one);
    put_block<Scalar>(t, s.X1, 0, r2, one);
    put_block<Scalar>(t, s.K21, r1, 0, -one);
    put_block<Scalar>(t, s.K22, r1, r1, -one);
    put_block<Scalar>(t, s.X2, r1, r2, one);
    put_block<Scalar>(t, rs_->bases().Y, r1, r3, one);
    put_block<Scalar>(t, la::transpose(s.X1), r2, 0, tau);
    put_block<Scalar>(t, la::transpose(s.X2), r2, r1, tau);
    put_block<Scalar>(t, la::SparseMatrix(s.R.sparseView()), r2, r2, -one);
    put_block<Scalar>(t, la::transpose(rs_->bases().Y), r3, r1, one);
    Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int> S(n, n);
    S.setFromTriplets(t.begin(), t.end());
    S.makeCompressed();
    return S;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> OperatorContext::shifted_solve_impl(
    const la::SparseFactorization<Scalar>& F, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w) const {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const auto& s = rs_->sys();
    const la::Index n1 = s.n1, n2 = s.n2, q = rs_->nr2();
    const la::SparseMatrix& Yh = rs_->Yhat();
    // Yhat (Yhat^T Yhat)^{-1} w2, real and imaginary parts separately
    auto ytyinv = [&](const Vec& x) -> Vec {
        if constexpr (std::is_same_v<Scalar, double>) {
            return YtY_->solve(x);
        } else {
            const la::Vector re = YtY_->solve(la::Vector(x.real()));
            const la::Vector im = YtY_->solve(la::Vector(x.imag()));
            Vec r(x.size());
            for (la::Index i = 0; i < x.size(); ++i) r(i) = Scalar(re(i), im(i));
            return r;
        }
    };
    Vec rhs = Vec::Zero(F.size());
    rhs.head(n1) = w.head(n1);
    const Eigen::SparseMatrix<Scalar, Eigen::RowMajor, int> Yhs = Yh.template cast<Scalar>();
    rhs.segment(n1, n2) = Yhs * ytyinv(Vec(w.tail(q)));
    const Vec sol = F.solve(rhs);
    Vec z(nr());
    z.head(n1) = sol.head(n1);
    z.tail(q) = ytyinv(Vec(Yhs.transpose() * sol.segment(n1, n2)));
    return z;
}

std::shared_ptr<const la::RealFactorization> OperatorContext::real_factor(double tau) const {
    const Key k{tau, 0.0};
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = real_cache_.find(k);
        if (it != real_cache_.end()) {
            lru_.remove_if([&](const Key& x) { return !(x < k) && !(k < x); });
            lru_.push_back(k);
            return it->second;
        }
    }
    std::shared_ptr<const la::RealFactorization> f;
    try {
        f = std::make_shared<const la::RealFactorization>(bordered_shift_matrix<double>(tau), opt_.factorization);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError("shifted system singular at " + shift_name(tau) + ": " + e.what(), e.pivot());
    }
    std::lock_guard<std::mutex> g(mu_);
    real_cache_[k] = f;
    lru_.push_back(k);
    while (lru_.size() > opt_.cache_capacity) {
        real_cache_.erase(lru_.front());
        lru_.pop_front();
    }
    return f;
}

std::shared_ptr<const la::ComplexFactorization> OperatorContext::complex_factor(la::Complex tau) const {
    const Key k{tau.real(), tau.imag()};
    {
        std::lock_guard<std::mutex> g(mu_);
        auto it = complex_cache_.find(k);
        if (it != complex_cache_.end()) {
            complex_lru_.remove_if([&](const Key& x) { return !(x < k) && !(k < x); });
            complex_lru_.push_back(k);
            return it->second;
        }
    }
    std::shared_ptr<const la::ComplexFactorization> f;
    try {
        f = std::make_shared<const la::ComplexFactorization>(bordered_shift_matrix<la::Complex>(tau),
                                                             opt_.factorization);
    } catch (const SingularMatrixError& e) {
        throw SingularMatrixError("shifted system singular at " + shift_name(tau) + ": " + e.what(), e.pivot());
    }
    std::lock_guard<std::mutex> g(mu_);
    complex_cache_[k] = f;
    complex_lru_.push_back(k);
    while (complex_lru_.size() > opt_.complex_cache_capacity) {
        complex_cache_.erase(complex_lru_.front());
        complex_lru_.pop_front();
    }
    return f;
}

la::Vector OperatorContext::shifted_solve(double tau, const la::Vector& w) const {
    if (w.size() != nr()) throw ValidationError("shifted_solve: wrong length");
    return shifted_solve_impl<double>(*real_factor(tau), w);
}

la::DenseMatrix OperatorContext::shifted_solve(double tau, const la::DenseMatrix& W) const {
    la::DenseMatrix Z(nr(), W.cols());
    auto f = real_factor(tau);
    for (la::Index j = 0; j < W.cols(); ++j) Z.col(j) = shifted_solve_impl<double>(*f, la::Vector(W.col(j)));
    return Z;
}

la::CVector OperatorContext::shifted_solve(la::Complex tau, const la::CVector& w) const {
    if (w.size() != nr()) throw ValidationError("shifted_solve: wrong length");
    return shifted_solve_impl<la::Complex>(*complex_factor(tau), w);
}

la::CVector OperatorContext::resolvent(la::Complex s, const la::CVector& w) const {
    return -shifted_solve(-s, w);
}

std::size_t OperatorContext::cached_factorizations() const {
    std::lock_guard<std::mutex> g(mu_);
    return real_cache_.size() + complex_cache_.size();
}

SpectralBounds bounds_from_ritz(const la::Vector& ritz, double zero_ritz) {
    SpectralBounds b;
    const double big = ritz.size() ? ritz.cwiseAbs().maxCoeff() : 0.0;
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (la::Index i = 0; i < ritz.size(); ++i) {
        const double v = ritz(i);
        if (v >= 0 || std::abs(v) < zero_ritz * big) continue;
        if (!any) lo = hi = -v;
        lo = std::min(lo, -v);
        hi = std::max(hi, -v);
        any = true;
    }
    if (!any) throw NumericalError("spectral_bounds: no negative Ritz value found");
    b.a = lo;
    b.b = hi;
    return b;
}

SpectralBounds spectral_bounds(const OperatorContext& ctx, const SpectralOptions& opt) {
    const la::Vector start = ctx.apply_EinvB().col(0);
    if (start.norm() == 0.0) throw ValidationError("spectral_bounds: E_r^- B_r is zero");
    const auto& rs = ctx.reg();
    la::LanczosOptions lo;
    lo.maxit = opt.maxit;
    lo.tol = opt.tol;
    lo.metric = [&](const la::Vector& x) { return rs.apply_Er(x); };
    const la::LanczosResult r1 =
        la::lanczos_extremal([&](const la::Vector& v) { return ctx.apply_EinvA(v); }, start, lo);
    SpectralBounds out = bounds_from_ritz(r1.ritz, opt.zero_ritz);
    out.iterations = r1.iterations;
    out.converged = r1.converged;

    // Refine a with the shifted operator; its spectrum lies in (0, 1) and
    // the kernel of A_r maps to 0.
    double a = out.a;
    for (int pass = 0; pass < opt.refine_passes; ++pass) {
        const double tau = -a;
        const la::LanczosResult r2 = la::lanczos_extremal(
            [&](const la::Vector& v) { return ctx.shifted_solve(tau, rs.apply_Ar(v)); }, start, lo);
        double fmin = 2.0;
        for (la::Index i = 0; i < r2.ritz.size(); ++i)
            if (r2.ritz(i) > opt.refine_zero && r2.ritz(i) < fmin) fmin = r2.ritz(i);
        if (!(fmin < 1.0)) break;
        const double anew = fmin * a / (1.0 - fmin);
        out.iterations += r2.iterations;
        out.converged = out.converged && r2.converged;
        const bool settled = std::abs(anew - a) <= 1e-3 * anew;
        a = anew;
        if (settled) break;
    }
    out.a = std::min(a, out.b);
    return out;
}

}  // namespace mqsbt::ops
