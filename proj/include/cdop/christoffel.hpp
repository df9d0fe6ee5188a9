#pragma once

#include <vector>

#include "cdop/kernel_handle.hpp"
#include "cdop/orthopoly.hpp"
#include "cdop/prec.hpp"

namespace cdop::christoffel {

// Deformation of order k at pairwise-distinct points outside the weight
// support (non-natural reals for the Charlier/Meixner usage here).
struct DeformationSpec {
    std::vector<Real> points;

    size_t k() const { return points.size(); }
    static DeformationSpec make(std::vector<Real> pts);
};

struct EnsembleSpec {
    orthopoly::WeightFamily family;
    long N = 1;
    DeformationSpec deform;
};

// w^k(x) = prod_j (x - u_j)^2 w(x) on the natural-number support.
Real deformed_weight(const orthopoly::WeightFamily& w, const DeformationSpec& d,
                     long x, const PrecisionContext& ctx);

// Continuous extension of the base weight (x! replaced by Gamma(x+1)); used
// for real-argument kernel probes off the integer carrier.
Real weight_cont(const orthopoly::WeightFamily& w, const Real& x, const PrecisionContext& ctx);

// The 2k x 2k determinant delta_n^k with rows P_m(u_i), P'_m(u_i) and columns
// m = n .. n+2k-1. Throws DegenerateDeformationError when the value is below
// the scale-aware underflow guard.
Real delta_det(const orthopoly::WeightFamily& w, const DeformationSpec& d, long n,
               const PrecisionContext& ctx);

// The bordered (2k+1) x (2k+1) determinant D_n^k(x): columns m = n .. n+2k,
// last row P_m(x). big_D_det_dx differentiates in x (only the last row
// depends on x, so the derivative is the same determinant with the last row
// replaced by P'_m(x)).
Real big_D_det(const orthopoly::WeightFamily& w, const DeformationSpec& d, long n,
               const Real& x, const PrecisionContext& ctx);
Real big_D_det_dx(const orthopoly::WeightFamily& w, const DeformationSpec& d, long n,
                  const Real& x, const PrecisionContext& ctx);

// Monic orthogonal polynomial of the deformed weight,
//   p_n^k(x) = D_n^k(x) / (prod_i (x-u_i)^2 delta_n^k c_{n+2k}).
// Near the removable singularities x = u_i the value is recovered by
// interpolating the coefficients of D_n^k and dividing out the squared linear
// factors exactly.
Real deformed_monic(const orthopoly::WeightFamily& w, const DeformationSpec& d, long n,
                    const Real& x, const PrecisionContext& ctx);

// Squared l2(w^k)-norm h_n^k = h_n delta_{n+1}^k / (delta_n^k c_{n+2k} c_n).
Real deformed_norm(const orthopoly::WeightFamily& w, const DeformationSpec& d, long n,
                   const PrecisionContext& ctx);

// Correlation kernel of the undeformed N-point ensemble (Christoffel-Darboux
// ratio off the diagonal, the derivative form on it).
KernelHandle ope_kernel(const EnsembleSpec& spec, const PrecisionContext& ctx);

// Correlation kernel of the order-k deformed ensemble built from the
// D_N^k / delta_N^k determinants; collapses to ope_kernel at k = 0.
KernelHandle deformed_kernel(const EnsembleSpec& spec, const PrecisionContext& ctx);

// Support truncation for sums against the deformed weight: smallest X whose
// w^k x^extra_degree tail is below 2^-mantissa_bits.
long support_truncation(const orthopoly::WeightFamily& w, const DeformationSpec& d,
                        long extra_degree, const PrecisionContext& ctx);

}  // namespace cdop::christoffel
