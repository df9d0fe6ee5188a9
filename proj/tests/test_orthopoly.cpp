#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cdop/orthopoly.hpp"
#include "cdop/specfun.hpp"

using namespace cdop;
using namespace cdop::orthopoly;

namespace {

const PrecisionContext ctx256{};

bool close_abs(const Real& a, const Real& b, double tol) {
    return abs(a - b) < Real(tol, a.prec());
}

Real gram_entry(const WeightFamily& w, long n, long m, const PrecisionContext& ctx) {
    long X = truncation_index(w, n + m, ctx);
    Real sum(0L, ctx.prec());
    for (long x = 0; x <= X; ++x) {
        Real px(ctx.prec()), qx(ctx.prec());
        if (w.kind == FamilyKind::Charlier) {
            px = charlier_eval(n, Real(x, ctx.prec()), w.a, ctx);
            qx = charlier_eval(m, Real(x, ctx.prec()), w.a, ctx);
        } else {
            px = meixner_eval(n, Real(x, ctx.prec()), w.beta, w.xi, ctx);
            qx = meixner_eval(m, Real(x, ctx.prec()), w.beta, w.xi, ctx);
        }
        sum = sum + weight_at(w, x, ctx) * px * qx;
    }
    return sum;
}

// n-th forward difference of P at 0 divided by n! recovers the leading
// coefficient of a degree-n polynomial.
Real forward_diff_leading(const WeightFamily& w, long n, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real sum(0L, prec);
    Real binom(1.0, prec);
    for (long j = 0; j <= n; ++j) {
        Real pj = (w.kind == FamilyKind::Charlier)
                      ? charlier_eval(n, Real(j, prec), w.a, ctx)
                      : meixner_eval(n, Real(j, prec), w.beta, w.xi, ctx);
        Real term = binom * pj;
        sum = ((n - j) % 2 == 0) ? sum + term : sum - term;
        binom = binom * Real(n - j, prec) / Real(j + 1, prec);
    }
    return sum / Real::factorial(static_cast<unsigned long>(n), prec);
}

}  // namespace

TEST_CASE("weight values and normalization") {
    mpfr_prec_t prec = ctx256.prec();
    WeightFamily ch = WeightFamily::charlier(Real(1.0, prec));
    CHECK(close_abs(weight_at(ch, 0, ctx256), exp(Real(-1L, prec)), 1e-70));

    WeightFamily mx = WeightFamily::meixner(Real(1.5, prec), Real(0.3, prec));
    CHECK(close_abs(weight_at(mx, 0, ctx256), Real(1.0, prec), 1e-70));

    // negative-binomial summation: sum_x w(x) = (1-xi)^{-beta}
    Real sum(0L, prec);
    for (long x = 0; x <= 200; ++x) sum = sum + weight_at(mx, x, ctx256);
    Real expect = pow(Real(1L, prec) - Real(0.3, prec), Real(-1.5, prec));
    CHECK(close_abs(sum, expect, 1e-25));

    CHECK_THROWS_AS(WeightFamily::meixner(Real(1.5, prec), Real(1.2, prec)), ConfigError);
    CHECK_THROWS_AS(WeightFamily::charlier(Real(-1.0, prec)), ConfigError);
}

TEST_CASE("Charlier values: degree 0 and the root of degree 1") {
    mpfr_prec_t prec = ctx256.prec();
    Real a(2.0, prec);
    CHECK(close_abs(charlier_eval(0, Real(3.7, prec), a, ctx256), Real(1.0, prec), 1e-70));
    // C_1(x; a) = (a - x)/sqrt(a) vanishes at x = a
    CHECK(close_abs(charlier_eval(1, a, a, ctx256), Real(0L, prec), 1e-70));
    CHECK(close_abs(charlier_eval(1, Real(0L, prec), a, ctx256), sqrt(a), 1e-70));
}

TEST_CASE("Charlier derivative: explicit degree-1 and finite differences") {
    mpfr_prec_t prec = ctx256.prec();
    Real a(2.0, prec);
    CHECK(charlier_eval_dx(0, Real(1.3, prec), a, ctx256).is_zero());
    CHECK(close_abs(charlier_eval_dx(1, Real(5.9, prec), a, ctx256),
                    Real(-1.0, prec) / sqrt(a), 1e-70));

    Real x(3.3, prec);
    Real h(1e-6, prec);
    Real fd = (charlier_eval(5, x + h, a, ctx256) - charlier_eval(5, x - h, a, ctx256)) /
              (Real(2L, prec) * h);
    CHECK(close_abs(charlier_eval_dx(5, x, a, ctx256), fd, 1e-9));
}

TEST_CASE("derivatives converge at second order in the step size") {
    mpfr_prec_t prec = ctx256.prec();
    Real a(2.0, prec);
    Real x(3.3, prec);
    Real exact = charlier_eval_dx(5, x, a, ctx256);
    double hs[3] = {1e-4, 1e-5, 1e-6};
    double errs[3];
    for (int i = 0; i < 3; ++i) {
        Real h(hs[i], prec);
        Real fd = (charlier_eval(5, x + h, a, ctx256) -
                   charlier_eval(5, x - h, a, ctx256)) / (Real(2L, prec) * h);
        errs[i] = std::abs((fd - exact).to_double());
    }
    for (int i = 0; i < 2; ++i) {
        double order = std::log(errs[i] / errs[i + 1]) / std::log(hs[i] / hs[i + 1]);
        CHECK(order >= 1.9);
    }

    // Meixner derivative under the same finite-difference check
    Real beta(1.5, prec), xi(0.3, prec);
    Real exact_m = meixner_eval_dx(6, x, beta, xi, ctx256);
    for (int i = 0; i < 3; ++i) {
        Real h(hs[i], prec);
        Real fd = (meixner_eval(6, x + h, beta, xi, ctx256) -
                   meixner_eval(6, x - h, beta, xi, ctx256)) / (Real(2L, prec) * h);
        errs[i] = std::abs((fd - exact_m).to_double());
    }
    for (int i = 0; i < 2; ++i) {
        double order = std::log(errs[i] / errs[i + 1]) / std::log(hs[i] / hs[i + 1]);
        CHECK(order >= 1.9);
    }
}

TEST_CASE("Meixner values at x = 0 are identically 1") {
    mpfr_prec_t prec = ctx256.prec();
    Real beta(1.5, prec), xi(0.3, prec);
    for (long n = 0; n <= 8; ++n)
        CHECK(close_abs(meixner_eval(n, Real(0L, prec), beta, xi, ctx256),
                        Real(1.0, prec), 1e-70));
}

TEST_CASE("orthogonality: Gram matrices diagonal, Meixner norms closed-form") {
    mpfr_prec_t prec = ctx256.prec();
    WeightFamily ch = WeightFamily::charlier(Real(2.0, prec));
    WeightFamily mx = WeightFamily::meixner(Real(1.5, prec), Real(0.3, prec));
    for (long n = 0; n <= 8; ++n) {
        for (long m = 0; m <= n; ++m) {
            Real gch = gram_entry(ch, n, m, ctx256);
            Real gmx = gram_entry(mx, n, m, ctx256);
            if (n != m) {
                CHECK(close_abs(gch, Real(0L, prec), 1e-20));
                CHECK(close_abs(gmx, Real(0L, prec), 1e-20));
            } else {
                CHECK(close_abs(gch, squared_norm(ch, n, ctx256), 1e-20));
                CHECK(close_abs(gmx, squared_norm(mx, n, ctx256), 1e-18));
            }
        }
    }
}

TEST_CASE("measured Charlier squared norms come out as 1") {
    mpfr_prec_t prec = ctx256.prec();
    WeightFamily ch = WeightFamily::charlier(Real(2.0, prec));
    for (long n = 0; n <= 8; ++n)
        CHECK(close_abs(squared_norm(ch, n, ctx256), Real(1.0, prec), 1e-40));
}

TEST_CASE("leading coefficients match the forward-difference extraction") {
    mpfr_prec_t prec = ctx256.prec();
    WeightFamily ch = WeightFamily::charlier(Real(2.0, prec));
    WeightFamily mx = WeightFamily::meixner(Real(1.5, prec), Real(0.3, prec));
    for (long n = 0; n <= 6; ++n) {
        Real cch = leading_coeff(ch, n, ctx256);
        Real cmx = leading_coeff(mx, n, ctx256);
        CHECK(abs(forward_diff_leading(ch, n, ctx256) / cch - Real(1L, prec)) <
              ctx256.tol_rel());
        CHECK(abs(forward_diff_leading(mx, n, ctx256) / cmx - Real(1L, prec)) <
              ctx256.tol_rel());
    }
}

TEST_CASE("joint_eval agrees with the single-point routes") {
    mpfr_prec_t prec = ctx256.prec();
    WeightFamily ch = WeightFamily::charlier(Real(2.0, prec));
    auto single = joint_eval(ch, 0, 0, Real(4.2, prec), ctx256);
    REQUIRE(single.size() == 1);
    CHECK(close_abs(single[0].value, Real(1.0, prec), 1e-70));
    CHECK(single[0].deriv.is_zero());

    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> ux(-3.0, 12.0);
    std::uniform_int_distribution<long> un(0, 20);
    for (int t = 0; t < 20; ++t) {
        long m = un(rng);
        Real x(ux(rng), prec);
        auto jd = joint_eval(ch, 0, 20, x, ctx256);
        Real scale = abs(jd[static_cast<size_t>(m)].value) + Real(1L, prec);
        CHECK(abs(jd[static_cast<size_t>(m)].value -
                  charlier_eval(m, x, Real(2.0, prec), ctx256)) < ctx256.tol_rel() * scale);
        Real dscale = abs(jd[static_cast<size_t>(m)].deriv) + Real(1L, prec);
        CHECK(abs(jd[static_cast<size_t>(m)].deriv -
                  charlier_eval_dx(m, x, Real(2.0, prec), ctx256)) < ctx256.tol_rel() * dscale);
    }
}

TEST_CASE("joint_eval sequence satisfies the three-term recurrence") {
    // normalized recurrence from the monic one: P_n = c_n p_n, so
    // (c_n/c_{n+1}) P_{n+1} = (x - A_n) P_n - B_n (c_n/c_{n-1}) P_{n-1}
    mpfr_prec_t prec = ctx256.prec();
    WeightFamily ch = WeightFamily::charlier(Real(2.0, prec));
    Real a(2.0, prec);
    Real x(5.4, prec);
    auto jd = joint_eval(ch, 0, 12, x, ctx256);
    for (long n = 1; n < 12; ++n) {
        Real cn = leading_coeff(ch, n, ctx256);
        Real cp = leading_coeff(ch, n + 1, ctx256);
        Real cm = leading_coeff(ch, n - 1, ctx256);
        Real A = Real(n, prec) + a;
        Real B = Real(n, prec) * a;
        Real lhs = cn / cp * jd[static_cast<size_t>(n + 1)].value;
        Real rhs = (x - A) * jd[static_cast<size_t>(n)].value -
                   B * cn / cm * jd[static_cast<size_t>(n - 1)].value;
        Real scale = abs(lhs) + abs(rhs) + Real(1L, prec);
        CHECK(abs(lhs - rhs) < ctx256.tol_rel() * scale);
    }
}

TEST_CASE("series route and recurrence route agree across the switchover") {
    mpfr_prec_t prec = ctx256.prec();
    WeightFamily ch = WeightFamily::charlier(Real(2.0, prec));
    WeightFamily mx = WeightFamily::meixner(Real(1.5, prec), Real(0.3, prec));
    Real x(7.8, prec);
    // joint_eval always uses the recurrence; the single-point route uses the
    // terminating series up to degree 30
    auto jch = joint_eval(ch, 25, 30, x, ctx256);
    auto jmx = joint_eval(mx, 25, 30, x, ctx256);
    for (long n = 25; n <= 30; ++n) {
        size_t i = static_cast<size_t>(n - 25);
        Real sch = charlier_eval(n, x, Real(2.0, prec), ctx256);
        Real smx = meixner_eval(n, x, Real(1.5, prec), Real(0.3, prec), ctx256);
        CHECK(abs(jch[i].value / sch - Real(1L, prec)) < ctx256.tol_rel() * Real(100L, prec));
        CHECK(abs(jmx[i].value / smx - Real(1L, prec)) < ctx256.tol_rel() * Real(100L, prec));
    }
}

TEST_CASE("finite difference of P_n drops the degree by one") {
    // the (n+1)-st forward difference of a degree-n polynomial vanishes
    mpfr_prec_t prec = ctx256.prec();
    WeightFamily mx = WeightFamily::meixner(Real(1.5, prec), Real(0.3, prec));
    long n = 5;
    Real sum(0L, prec);
    Real binom(1.0, prec);
    for (long j = 0; j <= n + 1; ++j) {
        Real pj = meixner_eval(n, Real(j, prec), Real(1.5, prec), Real(0.3, prec), ctx256);
        Real term = binom * pj;
        sum = ((n + 1 - j) % 2 == 0) ? sum + term : sum - term;
        binom = binom * Real(n + 1 - j, prec) / Real(j + 1, prec);
    }
    CHECK(abs(sum) < ctx256.tol_rel() * Real(1000L, prec));
}
