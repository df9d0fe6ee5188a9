#pragma once

#include <vector>

#include "cdop/kernel_handle.hpp"
#include "cdop/prec.hpp"

namespace cdop::kernels {

// A proper half-integer (element of Z + 1/2), stored as twice its value.
struct HalfInt {
    long twice;  // odd

    static HalfInt from_twice(long t);
    Real value(mpfr_prec_t prec) const { return Real(twice, prec) / Real(2L, prec); }
    long plus_half() const { return (twice + 1) / 2; }  // value + 1/2 as integer
};

enum class ZSeries { Principal, Complementary, Degenerate };

// Admissible parameter pair (z, z') with xi in (0,1). Classification is
// verified at construction:
//   principal     z' = conj(z), z not real
//   complementary z, z' real in the same interval (m, m+1)
//   degenerate    z a positive integer N, z' real, z' > z - 1
struct ZParams {
    Complex z;
    Complex zp;
    Real xi;
    ZSeries series;

    static ZParams make(Complex z, Complex zp, Real xi, const PrecisionContext& ctx);
    ZParams swapped() const;  // exchange z and z' (the measures are symmetric)
};

// Parameters of the deformed Gamma-limit kernel: non-degenerate (z, z') and a
// single real deformation point off the half-integer lattice.
struct GammaDeformParams {
    ZParams zparams;
    Real u;

    static GammaDeformParams make(ZParams zp, Real u, const PrecisionContext& ctx);
};

// ---- discrete Bessel side ----

// K(x,y) = sqrt(alpha) (J_x J_{y+1} - J_y J_{x+1})/(x-y) on the integers,
// diagonal through the index-derivatives L_x.
KernelHandle discrete_bessel_kernel(const Real& alpha, const PrecisionContext& ctx);

// Wronskian-type deformation of the discrete Bessel kernel at non-integer
// points utilde_1..utilde_k (the N -> infinity limit of the deformed Charlier
// ensemble shifted by N).
KernelHandle deformed_bessel_kernel(const Real& alpha, std::vector<Real> utilde,
                                    const PrecisionContext& ctx);

// ---- psi functions of the z-measures ----

// psi_a(x; z, z', xi): hypergeometric route (direct terminating-free series
// for moderate xi, exact connection formula near xi = 1, Meixner route for
// the degenerate series).
Complex psi(HalfInt a, const Real& x, const ZParams& zp, const PrecisionContext& ctx);

// Independent contour-integral route (circle of the given radius inside the
// annulus (sqrt(xi), 1/sqrt(xi))); requires x + a integer. Serves as the
// cross-check oracle for psi.
Complex psi_integral(HalfInt a, const Real& x, const ZParams& zp,
                     const PrecisionContext& ctx, double radius = 1.0);

// d/dx psi_a(x), term-by-term.
Complex psi_dx(HalfInt a, const Real& x, const ZParams& zp, const PrecisionContext& ctx);

// phi_a(u) = psi_a'(u) - (log(xi)/2) psi_a(u).
Complex phi(HalfInt a, const Real& u, const ZParams& zp, const PrecisionContext& ctx);

// ---- Gamma-kernel building blocks ----

// f(x) = Gamma(x+z'+1/2)/sqrt(Gamma(x+z+1/2)Gamma(x+z'+1/2))
Complex f_fn(const Real& x, const ZParams& zp, const PrecisionContext& ctx);
// g(a) = sqrt(Gamma(z-a+1/2)Gamma(z'-a+1/2)) Gamma(-z+a+1/2)
Complex g_fn(HalfInt a, const ZParams& zp, const PrecisionContext& ctx);
// h(u,a) = Gamma(z'-z)/(f(u) g(a)) and its u-derivative
Complex h_fn(const Real& u, HalfInt a, const ZParams& zp, const PrecisionContext& ctx);
Complex h_dx(const Real& u, HalfInt a, const ZParams& zp, const PrecisionContext& ctx);

// xi -> 1 limit of (1-xi)^{-1}(psi_a(x)psi_b(y) - psi_a(y)psi_b(x)): the
// four-term h-product combination.
Complex psi_pair_limit(HalfInt a, HalfInt b, const Real& x, const Real& y,
                       const ZParams& zp, const PrecisionContext& ctx);
// Same limit for (1-xi)^{-1}(psi_a(x)phi_b(x) - psi_b(x)phi_a(x)) (h' enters).
Complex psi_phi_pair_limit(HalfInt a, HalfInt b, const Real& x, const ZParams& zp,
                           const PrecisionContext& ctx);
// Gamma-only expansion of psi_pair_limit (no h-products), used as a
// cross-check of the assembled four-h combination.
Complex psi_pair_limit_gamma_only(HalfInt a, HalfInt b, const Real& x, const Real& y,
                                  const ZParams& zp, const PrecisionContext& ctx);

// ---- z-measure kernels ----

// Correlation kernel of the order-k deformed z-measure on Z + 1/2.
KernelHandle zmeas_deformed_kernel(const ZParams& zp, std::vector<Real> u,
                                   const PrecisionContext& ctx);

// xi -> 1 asymptotics of psi and phi: residuals against the two-term
// h-prediction for each xi in the list.
struct AsymptoticPoint {
    Real xi;
    Real resid_psi;
    Real resid_phi;
};
struct AsymptoticReport {
    std::vector<AsymptoticPoint> points;
};
AsymptoticReport psi_asymptotic_check(HalfInt a, const Real& u, const ZParams& zp,
                                      const std::vector<Real>& xi_list,
                                      const PrecisionContext& ctx);

// xi -> 1 limit of (1-xi)^2 K^1: the deformed Gamma kernel, built as the
// limit of B-determinant cofactors (the authoritative path).
KernelHandle gamma_deformed_kernel(const GammaDeformParams& gp, const PrecisionContext& ctx);

// Literal transcription of the stated limit formula (index maps, Phi display
// and constant exactly as printed), kept side-by-side for comparison; the
// display is suspected to carry typos and is not used in experiments.
KernelHandle gamma_deformed_kernel_printed(const GammaDeformParams& gp,
                                           const PrecisionContext& ctx);

// k = 0 analogue: xi -> 1 limit of the undeformed z-measure kernel.
KernelHandle gamma_kernel_undeformed(const ZParams& zp, const PrecisionContext& ctx);

}  // namespace cdop::kernels
