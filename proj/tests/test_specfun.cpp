#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cdop/specfun.hpp"
#include "oracles.hpp"

using namespace cdop;
using namespace cdop::specfun;

namespace {
const PrecisionContext ctx256(256);

bool close_abs(const Real& a, const Real& b, double tol) {
    return abs(a - b) < Real(tol, a.prec());
}
bool close_rel(const Real& a, const Real& b, double tol) {
    return abs(a - b) <= Real(tol, a.prec()) * max(abs(a), abs(b));
}
} // namespace

TEST_CASE("pochhammer basic values") {
    CHECK(pochhammer(ctx256.make(5.2), 0) == ctx256.one());
    CHECK(pochhammer(ctx256.make(2.0), 3) == ctx256.make(24.0));
    CHECK(pochhammer(ctx256.make(-1.5), 2) == ctx256.make(0.75));
    // exact zero through an integer-offset pole
    CHECK(pochhammer(ctx256.make(-2.0), 5).is_zero());
}

TEST_CASE("generalized pochhammer: box and row routes agree") {
    CHECK(gen_pochhammer(ctx256.makec(1.7, 0.3), Partition{}).re == ctx256.one());
    Complex a = ctx256.makec(2.25, 0.0);
    CHECK(gen_pochhammer(a, Partition{1}).re == a.re);
    CHECK(gen_pochhammer(ctx256.makec(3.0), Partition{2, 1}).re == ctx256.make(24.0));

    // cross-assert both routes on all partitions of size <= 8
    std::vector<Partition> ps;
    std::vector<unsigned> cur;
    auto rec = [&](auto&& self, unsigned rem, unsigned maxp) -> void {
        ps.emplace_back(cur);
        for (unsigned p = std::min(rem, maxp); p >= 1; --p) {
            cur.push_back(p);
            self(self, rem - p, p);
            cur.pop_back();
        }
    };
    rec(rec, 8, 8);
    Complex z = ctx256.makec(0.6, -1.1);
    for (const Partition& lam : ps) {
        Complex bx = gen_pochhammer(z, lam);
        Complex rw = gen_pochhammer_rows(z, lam);
        CHECK(abs(bx - rw) <= ctx256.tol_rel() * (abs(bx) + ctx256.one()));
    }
}

TEST_CASE("gamma function") {
    CHECK(close_rel(gamma_fn(ctx256.one()), ctx256.one(), 1e-70));
    // reflection at w = 1/2: Gamma(1/2)^2 = pi
    Real g_half = gamma_fn(ctx256.make(0.5));
    CHECK(close_rel(g_half * g_half, Real::pi(ctx256.prec()), 1e-70));
    CHECK(close_rel(digamma(ctx256.one()), -Real::euler(ctx256.prec()), 1e-70));
    CHECK_THROWS_AS(gamma_fn(ctx256.make(-3.0)), PoleError);
    CHECK_THROWS_AS(digamma(ctx256.make(0.0)), PoleError);
}

TEST_CASE("gamma functional equation on random complex points") {
    std::mt19937_64 rng(12345);
    auto uniform = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    int checked = 0;
    while (checked < 100) {
        double re = uniform(-5.0, 5.0), im = uniform(-5.0, 5.0);
        if (std::abs(im) < 1e-3 && std::abs(re - std::round(re)) < 1e-3) continue;
        Complex w = ctx256.makec(re, im);
        Complex lhs = gamma_fn(w + ctx256.one());
        Complex rhs = w * gamma_fn(w);
        CHECK(abs(lhs - rhs) <= ctx256.tol_rel() * abs(lhs));
        ++checked;
    }
}

TEST_CASE("complex gamma against real route and conjugation symmetry") {
    // Gamma(conj(w)) = conj(Gamma(w))
    Complex w = ctx256.makec(0.75, 2.5);
    Complex g = gamma_fn(w);
    Complex gc = gamma_fn(conj(w));
    CHECK(abs(gc - conj(g)) <= ctx256.tol_rel() * abs(g));
    // |Gamma(1/2 + iy)|^2 = pi / cosh(pi y)
    Real y = ctx256.make(1.25);
    Complex gh = gamma_fn(Complex(ctx256.make(0.5), y));
    Real lhs = gh.re * gh.re + gh.im * gh.im;
    Real piy = Real::pi(ctx256.prec()) * y;
    Real rhs = Real::pi(ctx256.prec()) * 2L / (exp(piy) + exp(-piy));
    CHECK(close_rel(lhs, rhs, 1e-70));
}

TEST_CASE("complex digamma against difference identity") {
    Complex w = ctx256.makec(-2.3, 1.7);
    Complex lhs = digamma(w + ctx256.one()) - digamma(w);
    Complex rhs = Complex(ctx256.one()) / w;
    CHECK(abs(lhs - rhs) <= ctx256.tol_rel() * abs(rhs));
}

TEST_CASE("hypergeometric pFq") {
    // zero upper parameter truncates at n=0
    Complex one_val = hyp_pFq({ctx256.makec(0.0), ctx256.makec(2.0)},
                              {ctx256.makec(3.0)}, ctx256.makec(0.7), ctx256);
    CHECK(one_val.re == ctx256.one());

    // 2F0(-1, -x; ; -1/a) = 1 - x/a
    Real x = ctx256.make(2.7), a = ctx256.make(1.9);
    Complex v = hyp_pFq({ctx256.makec(-1.0), Complex(-x)}, {}, Complex(-1L / a), ctx256);
    CHECK(close_rel(v.re, ctx256.one() - x / a, 1e-70));

    // 2F1(1,1;2;w) = -log(1-w)/w at w = 0.5
    Complex lg = hyp_pFq({ctx256.makec(1.0), ctx256.makec(1.0)}, {ctx256.makec(2.0)},
                         ctx256.makec(0.5), ctx256);
    Real expect = -log(ctx256.make(0.5)) / ctx256.make(0.5);
    CHECK(close_rel(lg.re, expect, 1e-70));

    CHECK_THROWS_AS(hyp_pFq({ctx256.makec(0.5), ctx256.makec(0.5)}, {ctx256.makec(1.5)},
                            ctx256.makec(1.0), ctx256),
                    DivergenceError);
    CHECK_THROWS_AS(hyp_pFq({ctx256.makec(0.5)}, {ctx256.makec(-2.0)},
                            ctx256.makec(0.1), ctx256),
                    PoleError);
}

TEST_CASE("hyp2F1_neg: Pfaff route") {
    Complex a = ctx256.makec(0.3), b = ctx256.makec(0.7), c = ctx256.makec(1.1);

    CHECK(hyp2F1_neg(a, b, c, ctx256.zero(), ctx256).re == ctx256.one());

    // terminating a = -2: exact quadratic in w
    for (double wd : {-0.4, -1.7, -9.0}) {
        Real w = ctx256.make(wd);
        Complex got = hyp2F1_neg(ctx256.makec(-2.0), b, c, w, ctx256);
        // direct terminating sum: 1 + (-2)b/c w + (-2)(-1)b(b+1)/(c(c+1)) w^2/2
        Real direct = ctx256.one() - 2L * b.re / c.re * w +
                      b.re * (b.re + 1L) / (c.re * (c.re + 1L)) * w * w;
        CHECK(close_rel(got.re, direct, 1e-70));
    }

    // two Pfaff routes (transform in a vs in b) agree at 512 bits at w = -1
    PrecisionContext ctx512(512);
    Real w = ctx512.make(-1.0);
    Complex a5 = ctx512.makec(0.3), b5 = ctx512.makec(0.7), c5 = ctx512.makec(1.1);
    Complex route_a = hyp2F1_neg(a5, b5, c5, w, ctx512);
    Real wt = w / (w - 1L);
    Complex route_b = exp(-b5 * Complex(log(ctx512.one() - w))) *
                      hyp_pFq({b5, c5 - a5}, {c5}, Complex(wt), ctx512);
    CHECK(abs(route_a - route_b) <= ctx512.tol_rel() * abs(route_a) * Real(1e6, ctx512.prec()));

    // agreement with the direct series inside the radius
    for (double wd : {-0.85, -0.5, -0.05}) {
        Real wr = ctx256.make(wd);
        Complex pf = hyp2F1_neg(a, b, c, wr, ctx256);
        Complex direct = hyp_pFq({a, b}, {c}, Complex(wr), ctx256);
        CHECK(abs(pf - direct) <= ctx256.tol_rel() * abs(pf) * Real(100.0, ctx256.prec()));
    }
}

TEST_CASE("bessel_J: generating series and symmetry") {
    // sum_x J_x(2 sqrt(alpha)) = e^0 = 1 at z = 1
    std::vector<Real> js = bessel_J_int_batch(-60, 60, ctx256.one(), ctx256);
    Real s(ctx256.prec());
    for (const Real& j : js) s += j;
    CHECK(close_abs(s, ctx256.one(), 1e-20));

    // J_{-n} = (-1)^n J_n
    for (long n : {1L, 2L, 5L}) {
        Real lhs = js[static_cast<size_t>(60 - n)];
        Real rhs = js[static_cast<size_t>(60 + n)];
        if (n % 2 == 1) rhs = -rhs;
        CHECK(close_abs(lhs, rhs, 1e-60));
    }

    // generating-function residual at z = e^{i theta}
    Real theta = ctx256.make(1.0);
    Complex z(cos(theta), sin(theta));
    Complex sum(ctx256.prec());
    Complex zp = pow(z, Complex(ctx256.make(-60.0)));
    for (long xv = -60; xv <= 60; ++xv) {
        sum += js[static_cast<size_t>(xv + 60)] * zp;
        zp *= z;
    }
    Complex target = exp(Complex(z - Complex(ctx256.one()) / z));
    CHECK(abs(sum - target) < ctx256.make(1e-20));
}

TEST_CASE("bessel_J: series oracle and batch vs scalar route") {
    BesselParams p = BesselParams::of(1.0, ctx256);
    Real j0 = bessel_J(ctx256.zero(), p, ctx256);
    Real j0_series = test_oracles::bessel_J_series(ctx256.zero(), ctx256.one(), ctx256.prec());
    CHECK(close_abs(j0, j0_series, 1e-30));

    // non-integer order against the series oracle
    Real nu = ctx256.make(0.3);
    Real jn = bessel_J(nu, p, ctx256);
    Real jn_series = test_oracles::bessel_J_series(nu, ctx256.one(), ctx256.prec());
    CHECK(close_abs(jn, jn_series, 1e-40));

    // negative non-integer order (exercises the s-integral tail bound)
    Real num = ctx256.make(-1.7);
    CHECK(close_abs(bessel_J(num, p, ctx256),
                    test_oracles::bessel_J_series(num, ctx256.one(), ctx256.prec()), 1e-40));

    std::vector<Real> js = bessel_J_int_batch(-3, 3, ctx256.one(), ctx256);
    for (long xv = -3; xv <= 3; ++xv) {
        Real scalar = bessel_J(ctx256.make(xv), p, ctx256);
        CHECK(close_abs(scalar, js[static_cast<size_t>(xv + 3)], 1e-60));
    }
}

TEST_CASE("bessel_L: derivative checks") {
    BesselParams p = BesselParams::of(1.0, ctx256);
    Real x = ctx256.make(0.3);
    Real L = bessel_L(x, p, ctx256);

    // central finite differences, O(h^2)
    Real h = ctx256.make(1e-6);
    Real fd = (bessel_J(x + h, p, ctx256) - bessel_J(x - h, p, ctx256)) / (2L * h);
    CHECK(abs(L - fd) < ctx256.make(1e-10)); // C * h^2 with modest C

    // series oracle
    Real L_series = test_oracles::bessel_L_series(x, ctx256.one(), ctx256.prec());
    CHECK(close_abs(L, L_series, 1e-40));

    // integer order: sin-term drops but cos-term integral remains
    Real L2 = bessel_L(ctx256.make(2.0), p, ctx256);
    Real fd2 = (bessel_J(ctx256.make(2.0) + h, p, ctx256) -
                bessel_J(ctx256.make(2.0) - h, p, ctx256)) / (2L * h);
    CHECK(abs(L2 - fd2) < ctx256.make(1e-10));

    // stability under quad_nodes doubling at (x, alpha) = (2.5, 4)
    PrecisionContext coarse(256, 32), fine(256, 64);
    BesselParams p4c = BesselParams::of(4.0, coarse), p4f = BesselParams::of(4.0, fine);
    Real a_val = bessel_L(ctx256.make(2.5), p4c, coarse);
    Real b_val = bessel_L(ctx256.make(2.5), p4f, fine);
    CHECK(abs(a_val - b_val) <= coarse.tol_rel() * max(abs(a_val), ctx256.one()) * Real(100.0, ctx256.prec()));
}

TEST_CASE("bessel_L: chain-rule sign at negated order") {
    // d/dx J_{-x} = -L_{-x}; check via finite differences of J_{-x}
    BesselParams p = BesselParams::of(1.0, ctx256);
    Real x = ctx256.make(0.7);
    Real h = ctx256.make(1e-6);
    Real fd = (bessel_J(-(x + h), p, ctx256) - bessel_J(-(x - h), p, ctx256)) / (2L * h);
    Real L_neg = bessel_L(-x, p, ctx256);
    CHECK(abs(fd - (-L_neg)) < ctx256.make(1e-10));
}

TEST_CASE("contour radius sensitivity of the bessel pair") {
    // r is a conditioning choice; values must not depend on it
    PrecisionContext c(256);
    Real x = c.make(0.3);
    BesselParams p1(c.make(1.0), c.one());
    BesselParams p2(c.make(1.0), c.make(1.35));
    CHECK(close_abs(bessel_J(x, p1, c), bessel_J(x, p2, c), 1e-55));
    CHECK(close_abs(bessel_L(x, p1, c), bessel_L(x, p2, c), 1e-50));
}
