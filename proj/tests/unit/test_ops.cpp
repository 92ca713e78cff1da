#include "mqsbt/analysis/oracle.hpp"
#include "mqsbt/errors.hpp"
#include "mqsbt/la/lanczos.hpp"
#include "mqsbt/ops/context.hpp"
#include "support/fixtures.hpp"

#include <doctest.h>

#include <Eigen/LU>

#include <random>

using namespace mqsbt;

namespace {

la::Vector v2(double a, double b) { return (la::Vector(2) << a, b).finished(); }

struct SmallOracle {
    fixtures::Small s;
    std::unique_ptr<ops::OperatorContext> ctx;
    analysis::DenseOracle o;
};

const SmallOracle& small_oracle() {
    static const SmallOracle so = [] {
        SmallOracle x;
        x.s = fixtures::small();
        x.ctx = std::make_unique<ops::OperatorContext>(x.s.rs);
        x.o = analysis::build_dense_oracle(*x.s.rs);
        return x;
    }();
    return so;
}

double rel(const la::DenseMatrix& a, const la::DenseMatrix& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_SUITE("ops") {

TEST_CASE("toy operators") {
    ops::OperatorContext ctx(fixtures::toy());
    const la::Vector w = v2(0.3, -1.7);
    CHECK(ctx.apply_Pi_inf(w).norm() == 0.0);
    const la::Vector e = ctx.apply_EinvA(v2(0, 1));
    CHECK((e - v2(0, -2)).norm() <= 1e-15);
    CHECK((ctx.apply_EinvB().col(0) - v2(0, 1)).norm() <= 1e-15);
    CHECK((ctx.reg().apply_Er(la::Vector(ctx.apply_EinvB().col(0))) - v2(1, 1)).norm() <= 1e-15);
    const la::Vector z = ctx.shifted_solve(-1.0, v2(1, 1));
    CHECK((z - v2(0, -1.0 / 3.0)).norm() <= 1e-15);
    CHECK(ctx.apply_Cr(v2(0, 1))(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(ctx.apply_Cr(v2(1, 0))(0) == doctest::Approx(2.0).epsilon(1e-15));
    // E_r^{-1} A_r = [[0,0],[-2,-2]]
    CHECK((ctx.apply_EinvA(v2(1, 0)) - v2(0, -2)).norm() <= 1e-15);
}

TEST_CASE("toy spectral bounds and Lanczos") {
    ops::OperatorContext ctx(fixtures::toy());
    const auto& rs = ctx.reg();
    la::LanczosOptions lo;
    lo.metric = [&](const la::Vector& x) { return rs.apply_Er(x); };
    const auto r = la::lanczos_extremal([&](const la::Vector& v) { return ctx.apply_EinvA(v); },
                                        ctx.apply_EinvB().col(0), lo);
    REQUIRE(r.ritz.size() == 1);
    CHECK(r.ritz(0) == doctest::Approx(-2.0).epsilon(1e-12));
    const auto b = ops::spectral_bounds(ctx);
    CHECK(b.a == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(b.b == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("bounds_from_ritz") {
    la::Vector r(5);
    r << -100.0, -3.0, -1e-13, 0.0, 2e-14;
    const auto b = ops::bounds_from_ritz(r, 1e-8);
    CHECK(b.a == 3.0);
    CHECK(b.b == 100.0);
}

TEST_CASE("small fixture against the dense oracle") {
    const auto& so = small_oracle();
    const auto& ctx = *so.ctx;
    const auto& o = so.o;
    std::mt19937_64 g(21);
    const la::DenseMatrix V = fixtures::random_matrix(g, ctx.nr(), 10);
    const la::DenseMatrix PV = o.Pi * V;

    // Pi_inf = -Ys Ys^T A with Ys^T (-A) Ys = I
    for (int j = 0; j < 10; ++j) {
        const la::Vector v = V.col(j);
        const la::Vector p = ctx.apply_Pi_inf(v);
        const la::Vector po = -o.Ysigma * (o.Ysigma.transpose() * (o.A * v));
        CHECK(rel(p, po) <= 1e-9);
        CHECK(rel(ctx.apply_Pi_inf(p), p) <= 1e-9);
    }
    for (la::Index j = 0; j < std::min<la::Index>(5, o.Ysigma.cols()); ++j) {
        const la::Vector y = o.Ysigma.col(j);
        CHECK(rel(ctx.apply_Pi_inf(y), y) <= 1e-9);
    }

    const la::DenseMatrix EA = ctx.apply_EinvA(PV);
    const la::DenseMatrix EAo = o.Einv * (o.A * PV);
    CHECK(rel(EA, EAo) <= 1e-9);
    // closure: E^- A maps im(Pi) into itself
    CHECK(rel(o.Pi * EA, EA) <= 1e-9);
    CHECK(rel(ctx.apply_EinvB(), o.Einv * o.B) <= 1e-9);
    for (int j = 0; j < 3; ++j) {
        const la::Vector c = ctx.apply_Cr(la::Vector(PV.col(j)));
        const la::Vector co = -(o.B.transpose() * EAo.col(j));
        CHECK(rel(c, co) <= 1e-9);
    }
}

TEST_CASE("small fixture shifted solves") {
    const auto& so = small_oracle();
    const auto& ctx = *so.ctx;
    const auto& o = so.o;
    std::mt19937_64 g(22);
    // shifts inside the spectral interval [-b, -a], where LR-ADI uses them
    for (double tau : {-2.5, -40.0, -300.0, -1e4, -3e5}) {
        const la::Vector w = fixtures::random_vector(g, ctx.nr());
        const la::Vector z = ctx.shifted_solve(tau, w);
        const la::DenseMatrix S = tau * o.E + o.A;
        const la::Vector zo = S.partialPivLu().solve(w);
        INFO("tau = " << tau << ", residual " << (S * z - w).norm() / w.norm() << ", oracle residual "
                      << (S * zo - w).norm() / w.norm());
        CHECK(rel(z, zo) <= 1e-9);
    }
    const la::Complex s(3.0, 1e3);
    la::CVector w = fixtures::random_vector(g, ctx.nr()).cast<la::Complex>();
    const la::CVector r = ctx.resolvent(s, w);
    const la::CDenseMatrix P = s * o.E.cast<la::Complex>() - o.A.cast<la::Complex>();
    CHECK((P * r - w).norm() <= 1e-10 * w.norm());
    CHECK(ctx.cached_factorizations() >= 1);
}

TEST_CASE("factorization cache bounds") {
    ops::ContextOptions opt;
    opt.cache_capacity = 3;
    opt.complex_cache_capacity = 1;
    ops::OperatorContext ctx(fixtures::toy(), opt);
    const la::Vector w = la::Vector::Ones(2);
    for (double tau : {-1.0, -2.5, -4.0, -8.0, -1.0}) ctx.shifted_solve(tau, w);
    CHECK(ctx.cached_factorizations() == 3);
    for (double im : {1.0, 2.0, 3.0}) ctx.resolvent({0.0, im}, w.cast<la::Complex>());
    CHECK(ctx.cached_factorizations() == 4);
    // a complex shift on the real axis does not evict the real factorization
    const la::Vector a = ctx.shifted_solve(-4.0, w);
    const la::CVector b = ctx.shifted_solve(la::Complex(-4.0, 0.0), w.cast<la::Complex>());
    CHECK((b.real() - a).norm() <= 1e-14);
    CHECK(ctx.cached_factorizations() == 4);
}

TEST_CASE("small fixture spectral interval") {
    const auto& so = small_oracle();
    const auto ps = analysis::pencil_spectrum(so.o);
    const double amin = -ps.finite.maxCoeff(), amax = -ps.finite.minCoeff();
    const auto b = ops::spectral_bounds(*so.ctx);
    CHECK(b.a == doctest::Approx(amin).epsilon(1e-6));
    CHECK(b.b <= amax * (1 + 1e-8));
    CHECK(b.b >= 0.5 * amax);
}

TEST_CASE("wrong lengths are rejected") {
    ops::OperatorContext ctx(fixtures::toy());
    CHECK_THROWS_AS(ctx.apply_EinvA(la::Vector(la::Vector::Ones(3))), ValidationError);
    CHECK_THROWS_AS(ctx.apply_Pi_inf(la::Vector(la::Vector::Ones(1))), ValidationError);
}

}
