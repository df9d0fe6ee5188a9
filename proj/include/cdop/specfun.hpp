#ifndef CDOP_SPECFUN_HPP
#define CDOP_SPECFUN_HPP

#include <vector>

#include "cdop/partition.hpp"
#include "cdop/prec.hpp"

namespace cdop::specfun {

// Rising factorial (a)_n as an exact product; no Gamma-ratio shortcut, so
// integer-offset poles come out as exact zeros.
Real pochhammer(const Real& a, unsigned long n);
Complex pochhammer(const Complex& a, unsigned long n);

// Generalized Pochhammer symbol over a partition. Box-product route
// prod_{(i,j) in lam} (a - i + j); the row-product route prod_i (a-i+1)_{lam_i}
// is kept as an independent algebraic path.
Complex gen_pochhammer(const Complex& a, const Partition& lam);
Complex gen_pochhammer_rows(const Complex& a, const Partition& lam);

// sin(pi*x) / cos(pi*x) with the argument reduced exactly against the integer
// lattice, so integer x gives an exact zero sine.
Real sin_pi(const Real& x);
Real cos_pi(const Real& x);

// Gamma family. Real arguments delegate to MPFR; complex arguments use
// upward recurrence plus the Stirling series (Bernoulli cache), with the
// reflection formula for Re(w) < 1/2.
Real gamma_fn(const Real& w);
Complex gamma_fn(const Complex& w);
Real log_gamma(const Real& w); // log|Gamma(w)| sign-checked positive domain
Real digamma(const Real& w);
Complex digamma(const Complex& w);

// Generalized hypergeometric series pFq. Terminating series (some a_i in -N)
// are summed exactly to the terminating index; otherwise partial sums with
// stagnation-based stopping at ctx.tol_rel().
Complex hyp_pFq(const std::vector<Complex>& as, const std::vector<Complex>& bs,
                const Complex& w, const PrecisionContext& ctx);

// Gauss 2F1 on the negative real axis via the Pfaff transformation
// w -> w/(w-1) in (0,1), then the direct series.
Complex hyp2F1_neg(const Complex& a, const Complex& b, const Complex& c,
                   const Real& w, const PrecisionContext& ctx);

struct BesselParams {
    Real alpha; // poissonization parameter, > 0
    Real r;     // contour radius, > 0

    BesselParams(Real alpha_, Real r_) : alpha(std::move(alpha_)), r(std::move(r_)) {
        if (!(alpha > Real(0L, alpha.prec()))) throw ConfigError("BesselParams: alpha must be > 0");
        if (!(r > Real(0L, r.prec()))) throw ConfigError("BesselParams: r must be > 0");
    }
    static BesselParams of(double alpha, const PrecisionContext& ctx) {
        return BesselParams(ctx.make(alpha), ctx.one());
    }
};

// J_x(2 sqrt(alpha)) for real order x, by the contour pair: periodic
// theta-integral (trapezoid) plus the sin(pi x)-weighted s-integral
// (exp-substitution then Gauss-Legendre). Integer x drops the s-integral
// exactly.
Real bessel_J(const Real& x, const BesselParams& p, const PrecisionContext& ctx);

// L_x = d/dx J_x(2 sqrt(alpha)), by the three log/cos-weighted integrals.
Real bessel_L(const Real& x, const BesselParams& p, const PrecisionContext& ctx);

// All integer orders xmin..xmax from one shared trapezoid evaluation.
std::vector<Real> bessel_J_int_batch(long xmin, long xmax, const Real& alpha,
                                     const PrecisionContext& ctx);

// Exact Bernoulli number B_{2n} as a Real at the given precision.
Real bernoulli_2n(unsigned n, mpfr_prec_t prec);

} // namespace cdop::specfun

#endif
