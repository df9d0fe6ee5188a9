#pragma once

#include <vector>

#include "cdop/prec.hpp"

namespace cdop::orthopoly {

enum class FamilyKind { Charlier, Meixner };

// Orthogonality weight on the nonnegative integers.
//   Charlier: w(x) = e^{-a} a^x / x!,       a > 0
//   Meixner:  w(x) = (beta)_x xi^x / x!,    beta > 0, 0 < xi < 1
struct WeightFamily {
    FamilyKind kind;
    Real a;     // Charlier rate
    Real beta;  // Meixner parameters
    Real xi;

    static WeightFamily charlier(Real a);
    static WeightFamily meixner(Real beta, Real xi);
};

struct ValDer {
    Real value;
    Real deriv;
};

Real weight_at(const WeightFamily& w, long x, const PrecisionContext& ctx);

// Normalized Charlier polynomial C_n(x; a) = a^{n/2}/sqrt(n!) 2F0(-n,-x;;-1/a)
// and its x-derivative. Terminating sum for n <= 30, three-term recurrence
// beyond (the two routes are cross-checked in the tests).
Real charlier_eval(long n, const Real& x, const Real& a, const PrecisionContext& ctx);
Real charlier_eval_dx(long n, const Real& x, const Real& a, const PrecisionContext& ctx);

// Meixner polynomial M_n(x; beta, xi) = 2F1(-n,-x;beta;1-1/xi) and derivative.
Real meixner_eval(long n, const Real& x, const Real& beta, const Real& xi,
                  const PrecisionContext& ctx);
Real meixner_eval_dx(long n, const Real& x, const Real& beta, const Real& xi,
                     const PrecisionContext& ctx);

// P_m(x), P_m'(x) for m = n_lo..n_hi inclusive, by one recurrence sweep.
std::vector<ValDer> joint_eval(const WeightFamily& w, long n_lo, long n_hi,
                               const Real& x, const PrecisionContext& ctx);

// Leading coefficient c_n of the polynomial as defined above (true coefficient
// of x^n, extracted from the terminating series).
Real leading_coeff(const WeightFamily& w, long n, const PrecisionContext& ctx);

// Squared l2(w)-norm h_n. Meixner uses the closed form
// n!/(xi^n (1-xi)^beta (beta)_n); Charlier norms are measured by direct
// truncated summation and memoized (they come out as 1 to working precision,
// but the measured value is what downstream kernel formulas consume).
Real squared_norm(const WeightFamily& w, long n, const PrecisionContext& ctx);

// Smallest X such that the tail sum of w(x) x^poly_degree beyond X is below
// 2^-mantissa_bits (geometric tail bound).
long truncation_index(const WeightFamily& w, long poly_degree, const PrecisionContext& ctx);

}  // namespace cdop::orthopoly
