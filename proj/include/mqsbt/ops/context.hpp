#pragma once

#include "mqsbt/la/factorization.hpp"
#include "mqsbt/la/lanczos.hpp"
#include "mqsbt/reg/regularized.hpp"

#include <list>
#include <map>
#include <memory>
#include <mutex>

namespace mqsbt::ops {

struct ContextOptions {
    std::size_t cache_capacity = 64;         // real shifts, reused by ADI cycles
    std::size_t complex_cache_capacity = 2;  // sweeps rarely repeat a point
    la::FactorizationOptions factorization;
};

// Structured operator algebra on a regularized system. Pi is the spectral
// projector onto the finite nonzero part of the pencil, Pi_inf the one for
// the infinite part. No projector or inverse is ever formed explicitly.
class OperatorContext {
public:
    explicit OperatorContext(std::shared_ptr<const reg::RegularizedSystem> rs, ContextOptions opt = {});

    const reg::RegularizedSystem& reg() const { return *rs_; }
    int nr() const { return rs_->nr(); }
    int m() const { return rs_->m(); }

    // z = Y_s (Y_s^T A_r Y_s)^{-1} Y_s^T v, returned as [0; z2].
    la::Vector solve_Y_sigma(const la::Vector& v) const;
    // Pi_inf w = solve_Y_sigma(A_r w).
    la::Vector apply_Pi_inf(const la::Vector& w) const;
    // (I - Pi_inf) Yh_s (Yh_s^T E_r Yh_s)^{-1} Yh_s^T u with Yh_s = diag(I, Z).
    la::Vector apply_Einv_range(const la::Vector& u) const;
    // E_r^- A_r v for v = Pi v, by the seven-step algorithm.
    la::Vector apply_EinvA(const la::Vector& v) const;
    la::DenseMatrix apply_EinvA(const la::DenseMatrix& V) const;
    // E_r^- B_r = (I - Pi_inf) [0; Z].
    const la::DenseMatrix& apply_EinvB() const { return EinvB_; }
    // C_r v = -B_r^T E_r^- A_r v.
    la::Vector apply_Cr(const la::Vector& v) const;

    // (tau E_r + A_r)^{-1} w through the bordered system in edge coordinates.
    la::Vector shifted_solve(double tau, const la::Vector& w) const;
    la::DenseMatrix shifted_solve(double tau, const la::DenseMatrix& W) const;
    la::CVector shifted_solve(la::Complex tau, const la::CVector& w) const;
    // (s E_r - A_r)^{-1} w = -(-s E_r + A_r)^{-1} w
    la::CVector resolvent(la::Complex s, const la::CVector& w) const;

    std::size_t cached_factorizations() const;

private:
    template <class Scalar>
    Eigen::SparseMatrix<Scalar, Eigen::ColMajor, int> bordered_shift_matrix(Scalar tau) const;
    template <class Scalar>
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> shifted_solve_impl(
        const la::SparseFactorization<Scalar>& F, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& w) const;

    std::shared_ptr<const la::RealFactorization> real_factor(double tau) const;
    std::shared_ptr<const la::ComplexFactorization> complex_factor(la::Complex tau) const;

    std::shared_ptr<const reg::RegularizedSystem> rs_;
    ContextOptions opt_;
    std::unique_ptr<la::RealFactorization> M11_;
    std::unique_ptr<la::RealFactorization> border_;  // shift-independent bordered system
    std::unique_ptr<la::RealFactorization> YtY_;     // Yhat^T Yhat
    la::DenseMatrix EinvB_;

    struct Key {
        double re, im;
        bool operator<(const Key& o) const { return re < o.re || (re == o.re && im < o.im); }
    };
    mutable std::mutex mu_;
    mutable std::list<Key> lru_, complex_lru_;
    mutable std::map<Key, std::shared_ptr<const la::RealFactorization>> real_cache_;
    mutable std::map<Key, std::shared_ptr<const la::ComplexFactorization>> complex_cache_;
};

struct SpectralBounds {
    double a = 0.0;  // smallest magnitude of the finite nonzero eigenvalues
    double b = 0.0;  // largest
    int iterations = 0;
    bool converged = false;
};

struct SpectralOptions {
    int maxit = 100;
    double tol = 1e-8;
    double zero_ritz = 1e-8;  // |lambda| < zero_ritz * max|lambda| counts as zero
    int refine_passes = 4;
    // Ritz values of the shifted operator below this are taken as zero or
    // round-off pollution; the smallest genuine one is |l| / (|l| + a) with
    // a at most a few times |l|.
    double refine_zero = 1e-4;
};

// Ritz extremes of the negative Ritz values, zeros excluded.
SpectralBounds bounds_from_ritz(const la::Vector& ritz, double zero_ritz);

// b from Lanczos on E_r^- A_r in the E_r inner product started at E_r^- B_r;
// a refined by Lanczos on (tau E_r + A_r)^{-1} A_r with tau = -a, whose
// eigenvalues lambda / (lambda + tau) put the small end of the spectrum at
// an extreme with a wide relative gap.
SpectralBounds spectral_bounds(const OperatorContext& ctx, const SpectralOptions& opt = {});

}  // namespace mqsbt::ops
