#ifndef CDOP_QUAD_HPP
#define CDOP_QUAD_HPP

#include <functional>
#include <vector>

#include "cdop/prec.hpp"

namespace cdop::quad {

// Mean value (1/2pi) * integral over [-pi, pi) of a smooth 2pi-periodic
// complex integrand, by the uniform trapezoid rule with node doubling.
// Stops when two successive levels agree to tol_abs componentwise; throws
// QuadratureError when node_cap is reached first.
Complex trapezoid_periodic_mean(const std::function<Complex(const Real&)>& f,
                                long n0, long node_cap, const Real& tol_abs,
                                mpfr_prec_t prec);

// Same rule, but for a family of integrands sharing one expensive factor:
// integrand_j(theta) = base(theta) * weight_j(theta). The caller supplies a
// function returning all component values at one node.
std::vector<Complex> trapezoid_periodic_mean_batch(
    const std::function<std::vector<Complex>(const Real&)>& f, size_t m,
    long n0, long node_cap, const Real& tol_abs, mpfr_prec_t prec);

// Gauss-Legendre nodes/weights on [-1, 1], cached per (n, prec).
struct GaussLegendreRule {
    std::vector<Real> nodes;
    std::vector<Real> weights;
};
const GaussLegendreRule& gauss_legendre_rule(long n, mpfr_prec_t prec);

// Integral of f over [a, b] by Gauss-Legendre with node-count doubling from
// n0 until two successive levels agree to tol_abs, capped at node_cap.
Real gauss_legendre(const std::function<Real(const Real&)>& f, const Real& a,
                    const Real& b, long n0, long node_cap, const Real& tol_abs);

} // namespace cdop::quad

#endif
