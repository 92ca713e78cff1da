#pragma once

#include "mqsbt/fem/assembly.hpp"
#include "mqsbt/la/types.hpp"
#include "mqsbt/reg/kernels.hpp"

#include <memory>
#include <string>

namespace mqsbt::reg {

// E_r = F_s M_s F_s^T, A_r = -F_n M_nu F_n^T, B_r = F_n Upsilon R^{-1} with
// F_s = [I X1; 0 Yhat^T X2], M_s = diag(M11, R^{-1}), F_n = [C1^T; Yhat^T C2^T].
// State x = (x1, x2) with x1 of length n1 and x2 of length n2 - k2.
class RegularizedSystem {
public:
    RegularizedSystem(std::shared_ptr<const fem::AssembledSystem> sys, KernelBases bases);

    const fem::AssembledSystem& sys() const { return *sys_; }
    const KernelBases& bases() const { return bases_; }

    int n1() const { return sys_->n1; }
    int n2() const { return sys_->n2; }
    int k2() const { return bases_.k2; }
    int m() const { return sys_->m; }
    int nr() const { return n1() + n2() - k2(); }
    int nr2() const { return n2() - k2(); }

    la::Vector apply_Er(const la::Vector& x) const;
    la::Vector apply_Ar(const la::Vector& x) const;
    la::DenseMatrix apply_Er(const la::DenseMatrix& X) const;
    la::DenseMatrix apply_Ar(const la::DenseMatrix& X) const;
    const la::DenseMatrix& Br() const { return Br_; }

    const la::SparseMatrix& Yhat() const { return bases_.Yhat; }
    const la::SparseMatrix& YtK22Y() const { return YtK22Y_; }
    const la::SparseMatrix& YtX2() const { return YtX2_; }
    const la::DenseMatrix& Z() const { return Z_; }
    const la::DenseMatrix& Rinv() const { return Rinv_; }

    // Explicit factors, used by the dense oracle and tests.
    la::SparseMatrix F_sigma() const;
    la::SparseMatrix M_sigma() const;
    la::SparseMatrix F_nu() const;
    la::SparseMatrix sparse_Er() const;
    la::SparseMatrix sparse_Ar() const;

private:
    std::shared_ptr<const fem::AssembledSystem> sys_;
    KernelBases bases_;
    la::SparseMatrix YtK22Y_, YtX2_, C2Yhat_;
    la::DenseMatrix Z_, Rinv_, Br_;
};

struct Theorem1Report {
    double E_residual = 0.0;  // max column ||E [0; y]|| / ||E||
    double K_residual = 0.0;
    bool exact = false;       // both products exactly zero
    int k2 = 0;
    int dense_kernel_dim = -1;  // -1 when the dense check is skipped
    double dense_gap = 0.0;     // smallest kept eigenvalue / largest dropped one
    bool pass = false;
    std::string summary() const;
};

// Common kernel of the unregularized E = M + X R^{-1} X^T and K = C^T M_nu C.
// The products are evaluated in factored form; the dense check counts the
// zero eigenvalues of E/||E|| + K/||K||.
Theorem1Report theorem1_check(const fem::AssembledSystem& sys, const KernelBases& bases, bool dense);

}  // namespace mqsbt::reg
