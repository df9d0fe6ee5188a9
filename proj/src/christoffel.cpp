#include "cdop/christoffel.hpp"

#include <memory>
#include <sstream>

#include "cdop/errors.hpp"
#include "cdop/linalg.hpp"
#include "cdop/specfun.hpp"

namespace cdop::christoffel {

using orthopoly::FamilyKind;
using orthopoly::ValDer;
using orthopoly::WeightFamily;

DeformationSpec DeformationSpec::make(std::vector<Real> pts) {
    for (size_t i = 0; i < pts.size(); ++i) {
        if (pts[i].is_integer() && !(pts[i] < Real(0L, pts[i].prec())))
            throw ConfigError("DeformationSpec: point lies on the weight support");
        for (size_t j = i + 1; j < pts.size(); ++j)
            if ((pts[i] - pts[j]).is_zero())
                throw ConfigError("DeformationSpec: points must be pairwise distinct");
    }
    return DeformationSpec{std::move(pts)};
}

Real deformed_weight(const WeightFamily& w, const DeformationSpec& d, long x,
                     const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real v = orthopoly::weight_at(w, x, ctx);
    for (const Real& u : d.points) {
        Real f = Real(x, prec) - Real(u, prec);
        v = v * f * f;
    }
    return v;
}

Real weight_cont(const WeightFamily& w, const Real& x, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real xp(x, prec);
    if (w.kind == FamilyKind::Charlier) {
        Real a(w.a, prec);
        return exp(-a + xp * log(a)) / specfun::gamma_fn(xp + Real(1L, prec));
    }
    Real beta(w.beta, prec), xi(w.xi, prec);
    return specfun::gamma_fn(beta + xp) / specfun::gamma_fn(beta) *
           exp(xp * log(xi)) / specfun::gamma_fn(xp + Real(1L, prec));
}

namespace {

// P_m(u_i), P'_m(u_i) for m = m_lo .. m_hi, one sweep per point.
std::vector<std::vector<ValDer>> point_rows(const WeightFamily& w, const DeformationSpec& d,
                                            long m_lo, long m_hi, const PrecisionContext& ctx) {
    std::vector<std::vector<ValDer>> rows;
    rows.reserve(d.points.size());
    for (const Real& u : d.points)
        rows.push_back(orthopoly::joint_eval(w, m_lo, m_hi, Real(u, ctx.prec()), ctx));
    return rows;
}

// Assemble the delta matrix (no border) with columns m = n .. n+2k-1, where
// urows holds columns starting at m_lo.
std::vector<std::vector<Real>> delta_matrix(const std::vector<std::vector<ValDer>>& urows,
                                            long m_lo, long n, size_t k) {
    std::vector<std::vector<Real>> m;
    size_t off = static_cast<size_t>(n - m_lo);
    for (size_t i = 0; i < k; ++i) {
        std::vector<Real> row;
        for (size_t j = 0; j < 2 * k; ++j) row.push_back(urows[i][off + j].value);
        m.push_back(std::move(row));
    }
    for (size_t i = 0; i < k; ++i) {
        std::vector<Real> row;
        for (size_t j = 0; j < 2 * k; ++j) row.push_back(urows[i][off + j].deriv);
        m.push_back(std::move(row));
    }
    return m;
}

// Bordered matrix of D_n^k with last row taken from border (values or
// derivatives of P_m(x), m = n .. n+2k).
std::vector<std::vector<Real>> bordered_matrix(const std::vector<std::vector<ValDer>>& urows,
                                               long m_lo, long n, size_t k,
                                               const std::vector<ValDer>& border,
                                               bool deriv_border) {
    std::vector<std::vector<Real>> m;
    size_t off = static_cast<size_t>(n - m_lo);
    for (size_t i = 0; i < k; ++i) {
        std::vector<Real> row;
        for (size_t j = 0; j <= 2 * k; ++j) row.push_back(urows[i][off + j].value);
        m.push_back(std::move(row));
    }
    for (size_t i = 0; i < k; ++i) {
        std::vector<Real> row;
        for (size_t j = 0; j <= 2 * k; ++j) row.push_back(urows[i][off + j].deriv);
        m.push_back(std::move(row));
    }
    std::vector<Real> last;
    for (size_t j = 0; j <= 2 * k; ++j)
        last.push_back(deriv_border ? border[off + j].deriv : border[off + j].value);
    m.push_back(std::move(last));
    return m;
}

// Scale-aware degeneracy guard: compare the determinant against the Hadamard
// bound of the matrix times a precision-coupled threshold.
void guard_degenerate(const Real& det, const std::vector<std::vector<Real>>& m,
                      const PrecisionContext& ctx, const char* what) {
    mpfr_prec_t prec = ctx.prec();
    Real had(1.0, prec);
    for (const auto& row : m) {
        Real s(0L, prec);
        for (const Real& e : row) s = s + e * e;
        had = had * sqrt(s);
    }
    Real guard = had * Real::pow2(-(ctx.mantissa_bits - 32), prec);
    if (abs(det) <= guard)
        throw DegenerateDeformationError(std::string(what) + ": determinant below underflow guard");
}

Real delta_from_rows(const std::vector<std::vector<ValDer>>& urows, long m_lo, long n,
                     size_t k, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    if (k == 0) return Real(1.0, prec);
    auto m = delta_matrix(urows, m_lo, n, k);
    Real det = linalg::det_pp(m, prec);
    guard_degenerate(det, m, ctx, "delta_det");
    return det;
}

constexpr double kDiagonalBranch = 1e-8;
constexpr double kSingularityBranch = 1e-6;

}  // namespace

Real delta_det(const WeightFamily& w, const DeformationSpec& d, long n,
               const PrecisionContext& ctx) {
    size_t k = d.k();
    if (k == 0) return Real(1.0, ctx.prec());
    auto urows = point_rows(w, d, n, n + 2 * static_cast<long>(k) - 1, ctx);
    return delta_from_rows(urows, n, n, k, ctx);
}

Real big_D_det(const WeightFamily& w, const DeformationSpec& d, long n, const Real& x,
               const PrecisionContext& ctx) {
    size_t k = d.k();
    long m_hi = n + 2 * static_cast<long>(k);
    if (k == 0)
        return orthopoly::joint_eval(w, n, n, x, ctx)[0].value;
    auto urows = point_rows(w, d, n, m_hi, ctx);
    auto border = orthopoly::joint_eval(w, n, m_hi, x, ctx);
    auto m = bordered_matrix(urows, n, n, k, border, false);
    return linalg::det_pp(m, ctx.prec());
}

Real big_D_det_dx(const WeightFamily& w, const DeformationSpec& d, long n, const Real& x,
                  const PrecisionContext& ctx) {
    size_t k = d.k();
    long m_hi = n + 2 * static_cast<long>(k);
    if (k == 0)
        return orthopoly::joint_eval(w, n, n, x, ctx)[0].deriv;
    auto urows = point_rows(w, d, n, m_hi, ctx);
    auto border = orthopoly::joint_eval(w, n, m_hi, x, ctx);
    auto m = bordered_matrix(urows, n, n, k, border, true);
    return linalg::det_pp(m, ctx.prec());
}

namespace {

// Monomial coefficients (ascending) of the degree-d polynomial q from its
// values at the integer nodes 0..d, by Newton divided differences.
std::vector<Real> interpolate_coeffs(const std::vector<Real>& vals, mpfr_prec_t prec) {
    size_t d = vals.size() - 1;
    std::vector<Real> dd = vals;
    for (size_t lvl = 1; lvl <= d; ++lvl)
        for (size_t j = d; j >= lvl; --j)
            dd[j] = (dd[j] - dd[j - 1]) / Real(static_cast<long>(lvl), prec);
    // expand sum_j dd[j] prod_{i<j} (x - i)
    std::vector<Real> coeffs(d + 1, Real(0L, prec));
    std::vector<Real> basis{Real(1.0, prec)};
    for (size_t j = 0; j <= d; ++j) {
        for (size_t i = 0; i < basis.size(); ++i) coeffs[i] = coeffs[i] + dd[j] * basis[i];
        if (j == d) break;
        basis.push_back(Real(0L, prec));
        for (size_t i = basis.size() - 1; i > 0; --i)
            basis[i] = basis[i - 1] - Real(static_cast<long>(j), prec) * basis[i];
        basis[0] = -Real(static_cast<long>(j), prec) * basis[0];
    }
    return coeffs;
}

// Exact synthetic division of an ascending-coefficient polynomial by (x - u);
// the remainder is dropped (it vanishes for the exact-division use here).
std::vector<Real> divide_linear(const std::vector<Real>& c, const Real& u) {
    size_t d = c.size() - 1;
    std::vector<Real> q(d, Real(0L, c[0].prec()));
    Real carry = c[d];
    for (size_t j = d; j-- > 0;) {
        q[j] = carry;
        carry = c[j] + u * carry;
    }
    return q;
}

}  // namespace

Real deformed_monic(const WeightFamily& w, const DeformationSpec& d, long n, const Real& x,
                    const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    size_t k = d.k();
    Real cN2k = orthopoly::leading_coeff(w, n + 2 * static_cast<long>(k), ctx);
    if (k == 0)
        return orthopoly::joint_eval(w, n, n, x, ctx)[0].value / cN2k;
    Real delta = delta_det(w, d, n, ctx);

    bool near_point = false;
    for (const Real& u : d.points)
        if (abs(x - Real(u, prec)) < Real(kSingularityBranch, prec)) near_point = true;

    if (!near_point) {
        Real fac(1.0, prec);
        for (const Real& u : d.points) {
            Real f = x - Real(u, prec);
            fac = fac * f * f;
        }
        return big_D_det(w, d, n, x, ctx) / (fac * delta * cN2k);
    }

    // removable singularity: interpolate D_n^k, divide out the squared linear
    // factors exactly, evaluate the quotient
    long deg = n + 2 * static_cast<long>(k);
    std::vector<Real> vals;
    vals.reserve(static_cast<size_t>(deg) + 1);
    for (long t = 0; t <= deg; ++t)
        vals.push_back(big_D_det(w, d, n, Real(t, prec), ctx));
    std::vector<Real> coeffs = interpolate_coeffs(vals, prec);
    for (const Real& u : d.points) {
        coeffs = divide_linear(coeffs, Real(u, prec));
        coeffs = divide_linear(coeffs, Real(u, prec));
    }
    Real v(0L, prec);
    for (size_t j = coeffs.size(); j-- > 0;) v = v * x + coeffs[j];
    return v / (delta * cN2k);
}

Real deformed_norm(const WeightFamily& w, const DeformationSpec& d, long n,
                   const PrecisionContext& ctx) {
    long twok = 2 * static_cast<long>(d.k());
    Real hn = orthopoly::squared_norm(w, n, ctx);
    Real dn = delta_det(w, d, n, ctx);
    Real dn1 = delta_det(w, d, n + 1, ctx);
    Real cn = orthopoly::leading_coeff(w, n, ctx);
    Real cn2k = orthopoly::leading_coeff(w, n + twok, ctx);
    return hn * dn1 / (dn * cn2k * cn);
}

KernelHandle ope_kernel(const EnsembleSpec& spec, const PrecisionContext& ctx) {
    if (spec.deform.k() != 0) throw ConfigError("ope_kernel: requires k = 0");
    if (spec.N < 1) throw ConfigError("ope_kernel: N >= 1 required");
    mpfr_prec_t prec = ctx.prec();
    long N = spec.N;
    WeightFamily w = spec.family;
    Real cNm1 = orthopoly::leading_coeff(w, N - 1, ctx);
    Real cN = orthopoly::leading_coeff(w, N, ctx);
    Real hNm1 = orthopoly::squared_norm(w, N - 1, ctx);
    Real factor = cNm1 / (hNm1 * cN);

    auto eval = [=](const Real& x, const Real& y) {
        auto px = orthopoly::joint_eval(w, N - 1, N, Real(x, prec), ctx);
        Real pNx = px[1].value, pNm1x = px[0].value;
        if (abs(x - y) < Real(kDiagonalBranch, prec)) {
            Real dNx = px[1].deriv, dNm1x = px[0].deriv;
            return weight_cont(w, x, ctx) * factor * (dNx * pNm1x - pNx * dNm1x);
        }
        auto py = orthopoly::joint_eval(w, N - 1, N, Real(y, prec), ctx);
        Real pNy = py[1].value, pNm1y = py[0].value;
        return sqrt(weight_cont(w, x, ctx) * weight_cont(w, y, ctx)) * factor *
               (pNx * pNm1y - pNy * pNm1x) / (x - y);
    };
    std::ostringstream prov;
    prov << "ope N=" << N;
    return KernelHandle{eval, prov.str()};
}

KernelHandle deformed_kernel(const EnsembleSpec& spec, const PrecisionContext& ctx) {
    size_t k = spec.deform.k();
    if (k == 0) return ope_kernel(spec, ctx);
    if (spec.N < 1) throw ConfigError("deformed_kernel: N >= 1 required");
    mpfr_prec_t prec = ctx.prec();
    long N = spec.N;
    long twok = 2 * static_cast<long>(k);
    WeightFamily w = spec.family;
    DeformationSpec d = spec.deform;

    // shared precomputation: point rows over the union column range
    // m = N-1 .. N+2k, norm/leading-coefficient constants, delta_N guard
    long m_lo = N - 1, m_hi = N + twok;
    auto urows = std::make_shared<std::vector<std::vector<ValDer>>>(
        point_rows(w, d, m_lo, m_hi, ctx));
    Real deltaN = delta_from_rows(*urows, m_lo, N, k, ctx);
    Real cNm1 = orthopoly::leading_coeff(w, N - 1, ctx);
    Real cN2k = orthopoly::leading_coeff(w, N + twok, ctx);
    Real hNm1 = orthopoly::squared_norm(w, N - 1, ctx);
    Real factor = cNm1 / (hNm1 * cN2k * deltaN * deltaN);

    auto d_of = [=](const std::vector<ValDer>& border, long n, bool deriv) {
        auto m = bordered_matrix(*urows, m_lo, n, k, border, deriv);
        return linalg::det_pp(m, prec);
    };

    auto eval = [=](const Real& x, const Real& y) {
        auto bx = orthopoly::joint_eval(w, m_lo, m_hi, Real(x, prec), ctx);
        Real DNx = d_of(bx, N, false), DNm1x = d_of(bx, N - 1, false);
        Real prodx(1.0, prec);
        for (const Real& u : d.points) prodx = prodx * (x - Real(u, prec));
        if (abs(x - y) < Real(kDiagonalBranch, prec)) {
            Real dDNx = d_of(bx, N, true), dDNm1x = d_of(bx, N - 1, true);
            return weight_cont(w, x, ctx) / (prodx * prodx) * factor *
                   (dDNx * DNm1x - DNx * dDNm1x);
        }
        auto by = orthopoly::joint_eval(w, m_lo, m_hi, Real(y, prec), ctx);
        Real DNy = d_of(by, N, false), DNm1y = d_of(by, N - 1, false);
        Real prody(1.0, prec);
        for (const Real& u : d.points) prody = prody * (y - Real(u, prec));
        return sqrt(weight_cont(w, x, ctx) * weight_cont(w, y, ctx)) /
               abs(prodx * prody) * factor * (DNx * DNm1y - DNy * DNm1x) / (x - y);
    };
    std::ostringstream prov;
    prov << "deformed ope N=" << N << " k=" << k;
    return KernelHandle{eval, prov.str()};
}

long support_truncation(const WeightFamily& w, const DeformationSpec& d, long extra_degree,
                        const PrecisionContext& ctx) {
    return orthopoly::truncation_index(w, extra_degree + 2 * static_cast<long>(d.k()), ctx);
}

}  // namespace cdop::christoffel
