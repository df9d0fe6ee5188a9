#include "cdop/kernels.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "cdop/christoffel.hpp"
#include "cdop/linalg.hpp"
#include "cdop/orthopoly.hpp"
#include "cdop/quad.hpp"
#include "cdop/specfun.hpp"

namespace cdop::kernels {

using specfun::digamma;
using specfun::gamma_fn;
using specfun::pochhammer;

namespace {

constexpr long kSeriesCap = 4000000;
constexpr long kContourNodeCap = 1 << 18;
// Switch from the direct hypergeometric series to the connection formula;
// the direct series needs O(bits / -log2(xi)) terms.
constexpr double kXiSwitch = 0.85;
constexpr double kDiagonalBranch = 1e-8;
constexpr double kSingularityGuard = 1e-6;

Real imag_guard_tol(const PrecisionContext& ctx) {
    return Real::pow2(-(ctx.mantissa_bits / 2), ctx.prec());
}

// Discard a numerically-residual imaginary part; a genuinely complex value
// signals a branch violation upstream.
Real require_real(const Complex& v, const PrecisionContext& ctx, const char* what) {
    Real scale = max(Real(1L, ctx.prec()), abs(v.re));
    if (abs(v.im) > scale * imag_guard_tol(ctx))
        throw BranchError(std::string(what) + ": imaginary residue " + abs(v.im).str(8));
    return v.re;
}

// sqrt of a product that is positive-real by the series classification.
Real sqrt_positive(const Complex& p, const PrecisionContext& ctx, const char* what) {
    Real scale = max(Real(1L, ctx.prec()), abs(p.re));
    if (abs(p.im) > scale * imag_guard_tol(ctx) || !(p.re > ctx.zero()))
        throw BranchError(std::string(what) + ": product not positive real");
    return sqrt(p.re);
}

// positive real base, complex exponent
Complex cpow(const Real& base, const Complex& e) {
    if (!(base > Real(0L, base.prec()))) throw BranchError("cpow: base must be positive");
    return exp(e * log(base));
}

bool near_integer(const Real& x, double eps = 1e-9) {
    return abs(x - round(x)) < Real(eps, x.prec());
}

// 1/Gamma(s) and d/ds 1/Gamma(s) for real s, including nonpositive integers
// (where 1/Gamma has an exact zero with derivative (-1)^p p!).
struct RecipGamma {
    Real value;
    Real deriv;
};
RecipGamma recip_gamma(const Real& s, mpfr_prec_t prec) {
    if (s.is_integer() && s <= Real(0L, prec)) {
        long p = -s.to_long();
        Real d = Real::factorial(static_cast<unsigned long>(p), prec);
        if (p % 2 == 1) d = -d;
        return {Real(0L, prec), d};
    }
    Real g = gamma_fn(Real(s, prec));
    Real r = Real(1L, prec) / g;
    return {r, -digamma(Real(s, prec)) * r};
}

// Regularized Gauss series 2F1(A,B;C;w)/Gamma(C) for w <= 0 together with its
// C-derivative, via the Pfaff transform v = w/(w-1) in [0,1). C may be any
// real number, including nonpositive integers. The per-term 1/Gamma(C+n) pair
// is advanced by the functional equation through the pole lattice.
struct RegHypResult {
    Complex value;
    Complex d_c;
};
RegHypResult hyp2f1_regularized(const Complex& A, const Complex& B, const Real& C,
                                const Real& w, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real zero = ctx.zero();
    Real one = ctx.one();
    if (!(w <= zero)) throw ConfigError("hyp2f1_regularized: needs w <= 0");
    Real v = w / (w - one);

    long m = -1;  // pole index when C is a nonpositive integer
    if (C.is_integer() && C <= zero) m = -C.to_long();

    // running 1/Gamma(C+n) pair
    Real r(prec), d(prec);
    if (m >= 0) {
        // start in the pole regime: r = 0, d = (-1)^m m!
        r = zero;
        d = Real::factorial(static_cast<unsigned long>(m), prec);
        if (m % 2 == 1) d = -d;
    } else {
        RecipGamma rg = recip_gamma(C, prec);
        r = rg.value;
        d = rg.deriv;
    }

    Complex cb = Complex(C) - B;  // base of the (C-B)_n factor
    Complex pv(one);              // (C-B)_n
    Complex pd(prec);             // d/dC (C-B)_n
    Complex an(one);              // (A)_n v^n / n!
    Complex sum(prec), sum_dc(prec);
    Real tol = ctx.tol_rel();
    int stagnant = 0;

    for (long n = 0;; ++n) {
        Complex term = an * pv * r;
        Complex term_dc = an * (pd * r + Complex(pv.re * d, pv.im * d));
        sum += term;
        sum_dc += term_dc;

        if (n > m) {
            Real scale = max(one, max(abs(sum), abs(sum_dc)));
            if (abs(term) <= tol * scale && abs(term_dc) <= tol * scale) {
                if (++stagnant >= 3) break;
            } else {
                stagnant = 0;
            }
        }
        if (n >= kSeriesCap) throw DivergenceError("hyp2f1_regularized: series cap reached");

        // advance all running factors to n+1
        Complex cbn = cb + Real(n, prec);
        pd = pd * cbn + pv;
        pv = pv * cbn;
        an = an * (A + Real(n, prec)) * (v / Real(n + 1, prec));
        Real s = C + Real(n, prec);  // advance 1/Gamma(s) -> 1/Gamma(s+1)
        if (m >= 0 && n < m) {
            // still below the pole: r stays 0, d_{n+1} = -d_n/(m-n)
            d = -d / Real(m - n, prec);
        } else if (m >= 0 && n == m) {
            r = one;                       // 1/Gamma(1)
            d = Real::euler(prec);         // -psi0(1)
        } else {
            Real rn = r;
            r = r / s;
            d = (d - rn / s) / s;
        }
    }

    Complex pf = cpow(one - w, -A);  // Pfaff prefactor (1-w)^{-A}, 1-w >= 1
    return {pf * sum, pf * sum_dc};
}

// Ordinary 2F1(A,B;C;w) for w <= 0 with its B-derivative (C away from the
// nonpositive integers). Used by the connection-formula route.
struct HypDbResult {
    Complex value;
    Complex d_b;
};
HypDbResult hyp2f1_db(const Complex& A, const Complex& B, const Complex& C,
                      const Real& w, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real one = ctx.one();
    if (!(w <= ctx.zero())) throw ConfigError("hyp2f1_db: needs w <= 0");
    Real v = w / (w - one);

    Complex cb = C - B;
    Complex term(one);   // (A)_n (C-B)_n v^n / ((C)_n n!)
    Complex s1(prec);    // sum_{m<n} 1/(C-B+m)
    Complex sum(prec), sum_db(prec);
    Real tol = ctx.tol_rel();
    int stagnant = 0;

    for (long n = 0;; ++n) {
        sum += term;
        sum_db += term * (-s1);  // d/dB (C-B)_n = -(C-B)_n sum 1/(C-B+m)
        Real scale = max(one, max(abs(sum), abs(sum_db)));
        if (abs(term) <= tol * scale) {
            if (++stagnant >= 3) break;
        } else {
            stagnant = 0;
        }
        if (n >= kSeriesCap) throw DivergenceError("hyp2f1_db: series cap reached");

        Complex cbn = cb + Real(n, prec);
        s1 += Complex(one) / cbn;
        term = term * (A + Real(n, prec)) * cbn /
               ((C + Real(n, prec)) * Real(n + 1, prec)) * v;
    }

    Complex pf = cpow(one - w, -A);
    return {pf * sum, pf * sum_db};
}

Real half(const PrecisionContext& ctx) { return Real(0.5, ctx.prec()); }

// Gamma of a possibly-complex argument dispatched on the series.
Complex gamma_c(const Complex& w, const ZParams& zp) {
    if (zp.series == ZSeries::Principal && !w.im.is_zero()) return gamma_fn(w);
    if (!w.im.is_zero()) return gamma_fn(w);
    return Complex(gamma_fn(w.re));
}

// Gamma(x+z+1/2) Gamma(x+z'+1/2): positive real in every admissible series.
Complex gamma_pair_x(const Real& x, const ZParams& zp, const PrecisionContext& ctx) {
    Complex g1 = gamma_c(Complex(x) + zp.z + half(ctx), zp);
    Complex g2 = gamma_c(Complex(x) + zp.zp + half(ctx), zp);
    return g1 * g2;
}

// Gamma(z-a+1/2) Gamma(z'-a+1/2): likewise positive real.
Complex gamma_pair_a(HalfInt a, const ZParams& zp, const PrecisionContext& ctx) {
    Real av = a.value(ctx.prec());
    Complex g1 = gamma_c(zp.z - av + half(ctx), zp);
    Complex g2 = gamma_c(zp.zp - av + half(ctx), zp);
    return g1 * g2;
}

bool degenerate_support_zero(const Real& x, const ZParams& zp, const PrecisionContext& ctx) {
    if (zp.series != ZSeries::Degenerate) return false;
    Real arg = x + zp.z.re + half(ctx);  // = xtil + 1 on the shifted lattice
    return arg.is_integer() && arg <= ctx.zero();
}

// psi and d/dx psi by the direct (regularized) hypergeometric representation.
struct PsiPair {
    Complex value;
    Complex deriv;
};
PsiPair psi_direct(HalfInt a, const Real& x, const ZParams& zp,
                   const PrecisionContext& ctx, bool want_deriv) {
    mpfr_prec_t prec = ctx.prec();
    Real av = a.value(prec);

    Complex num = gamma_pair_x(x, zp, ctx);
    Complex den = gamma_pair_a(a, zp, ctx);
    Real s = sqrt_positive(num / den, ctx, "psi prefactor");

    Real one = ctx.one();
    Real expo_xi = (x + av) * half(ctx);
    Real expo_1mxi = (zp.z.re + zp.zp.re) * half(ctx) - av;  // z + z' is real
    Real pref = s * pow(zp.xi, expo_xi) * pow(one - zp.xi, expo_1mxi);

    Complex A = -zp.z + av + half(ctx);
    Complex B = -zp.zp + av + half(ctx);
    Real C = x + av + one;
    Real w = zp.xi / (zp.xi - one);

    RegHypResult f = hyp2f1_regularized(A, B, C, w, ctx);
    PsiPair out{f.value * pref, Complex(prec)};
    if (want_deriv) {
        // log-derivatives of the x-dependent prefactors + the C-derivative
        Complex dg1 = digamma(Complex(x) + zp.z + half(ctx));
        Complex dg2 = digamma(Complex(x) + zp.zp + half(ctx));
        Complex logfac = (dg1 + dg2) * half(ctx) + Complex(log(zp.xi) * half(ctx));
        out.deriv = pref * (f.value * logfac + f.d_c);
    }
    return out;
}

// psi and d/du psi by the exact two-term connection formula, efficient near
// xi = 1 (series argument (xi-1)/xi is small).
PsiPair psi_connection(HalfInt a, const Real& u, const ZParams& zp,
                       const PrecisionContext& ctx, bool want_deriv);

Complex h_fn_impl(const Real& u, HalfInt a, const ZParams& zp, const PrecisionContext& ctx);
Complex h_dx_impl(const Real& u, HalfInt a, const ZParams& zp, const PrecisionContext& ctx);

PsiPair psi_connection(HalfInt a, const Real& u, const ZParams& zp,
                       const PrecisionContext& ctx, bool want_deriv) {
    mpfr_prec_t prec = ctx.prec();
    Real one = ctx.one();
    Real av = a.value(prec);
    Real w2 = (zp.xi - one) / zp.xi;
    Real lx = log(zp.xi);

    // The (-w)^{-A} connection term with A = -z1+a+1/2 carries the
    // swapped-order coefficient h_{z2,z1}(u,a) (direct rederivation from the
    // standard two-term connection identity; the specialized display in the
    // source derivation swaps the two labels and carries a spurious xi).
    auto term = [&](const ZParams& ord) -> std::pair<Complex, Complex> {
        const Complex& z1 = ord.z;
        const Complex& z2 = ord.zp;
        Complex h = h_fn_impl(u, a, ord.swapped(), ctx);
        Complex fac = cpow(zp.xi, z1) * cpow(one - zp.xi, (z2 - z1) * half(ctx));
        Complex A = -z1 + av + half(ctx);
        Complex B = -z1 - Complex(u) + half(ctx);
        Complex C = Complex(one) + z2 - z1;
        HypDbResult f = hyp2f1_db(A, B, C, w2, ctx);
        Complex t = h * fac * f.value;
        Complex dt(prec);
        if (want_deriv) {
            Complex hp = h_dx_impl(u, a, ord.swapped(), ctx);
            // d/du B = -1
            dt = hp * fac * f.value + h * fac * (-f.d_b);
        }
        return {t, dt};
    };

    auto [t1, dt1] = term(zp);
    auto [t2, dt2] = term(zp.swapped());

    Real outer = sqrt(one - zp.xi) * pow(zp.xi, (u - av - one) * half(ctx));
    PsiPair out{outer * (t1 + t2), Complex(prec)};
    if (want_deriv)
        out.deriv = outer * ((t1 + t2) * Complex(lx * half(ctx)) + dt1 + dt2);
    return out;
}

bool use_connection(const ZParams& zp, const PrecisionContext& ctx) {
    if (zp.series == ZSeries::Degenerate) return false;  // direct route terminates
    if (!(zp.xi > Real(kXiSwitch, ctx.prec()))) return false;
    // the connection formula degenerates when z' - z is an integer
    Complex diff = zp.zp - zp.z;
    if (diff.im.is_zero() && near_integer(diff.re, 1e-6)) return false;
    return true;
}

PsiPair psi_pair(HalfInt a, const Real& x, const ZParams& zp,
                 const PrecisionContext& ctx, bool want_deriv) {
    if (degenerate_support_zero(x, zp, ctx)) {
        if (want_deriv)
            throw GuardError("psi: not differentiable at the edge of the degenerate support");
        return {Complex(ctx.prec()), Complex(ctx.prec())};
    }
    if (use_connection(zp, ctx)) return psi_connection(a, x, zp, ctx, want_deriv);
    return psi_direct(a, x, zp, ctx, want_deriv);
}

// ---- h-function internals ----

Complex f_fn_impl(const Real& x, const ZParams& zp, const PrecisionContext& ctx) {
    Complex g2 = gamma_c(Complex(x) + zp.zp + half(ctx), zp);
    Real s = sqrt_positive(gamma_pair_x(x, zp, ctx), ctx, "f_fn");
    return g2 / s;
}

Complex g_fn_impl(HalfInt a, const ZParams& zp, const PrecisionContext& ctx) {
    Real av = a.value(ctx.prec());
    Real s = sqrt_positive(gamma_pair_a(a, zp, ctx), ctx, "g_fn");
    Complex g = gamma_c(-zp.z + av + half(ctx), zp);
    return Complex(g.re * s, g.im * s);
}

Complex h_fn_impl(const Real& u, HalfInt a, const ZParams& zp, const PrecisionContext& ctx) {
    Complex gd = gamma_c(zp.zp - zp.z, zp);
    return gd / (f_fn_impl(u, zp, ctx) * g_fn_impl(a, zp, ctx));
}

Complex h_dx_impl(const Real& u, HalfInt a, const ZParams& zp, const PrecisionContext& ctx) {
    // h'/h = -f'/f = -(1/2)[psi0(u+z'+1/2) - psi0(u+z+1/2)]
    Complex d = (digamma(Complex(u) + zp.zp + half(ctx)) -
                 digamma(Complex(u) + zp.z + half(ctx))) * half(ctx);
    return -(h_fn_impl(u, a, zp, ctx) * d);
}

// Four-h combination of the pair limit at two points.
Complex pair_limit_impl(HalfInt a, HalfInt b, const Real& x, const Real& y,
                        const ZParams& zp, const PrecisionContext& ctx) {
    ZParams sw = zp.swapped();
    Complex hxa = h_fn_impl(x, a, zp, ctx), sxa = h_fn_impl(x, a, sw, ctx);
    Complex hxb = h_fn_impl(x, b, zp, ctx), sxb = h_fn_impl(x, b, sw, ctx);
    Complex hya = h_fn_impl(y, a, zp, ctx), sya = h_fn_impl(y, a, sw, ctx);
    Complex hyb = h_fn_impl(y, b, zp, ctx), syb = h_fn_impl(y, b, sw, ctx);
    return hxa * syb + sxa * hyb - hxb * sya - sxb * hya;
}

// Same-point limit combination, h' in the second slot.
Complex point_limit_impl(HalfInt a, HalfInt b, const Real& x, const ZParams& zp,
                         const PrecisionContext& ctx) {
    ZParams sw = zp.swapped();
    Complex ha = h_fn_impl(x, a, zp, ctx), sa = h_fn_impl(x, a, sw, ctx);
    Complex hb = h_fn_impl(x, b, zp, ctx), sb = h_fn_impl(x, b, sw, ctx);
    Complex dha = h_dx_impl(x, a, zp, ctx), dsa = h_dx_impl(x, a, sw, ctx);
    Complex dhb = h_dx_impl(x, b, zp, ctx), dsb = h_dx_impl(x, b, sw, ctx);
    return ha * dsb + sa * dhb - hb * dsa - sb * dha;
}

void check_offlattice_points(const std::vector<Real>& u, const char* what,
                             const PrecisionContext& ctx, bool half_lattice) {
    Real one = ctx.one();
    for (size_t i = 0; i < u.size(); ++i) {
        Real t = half_lattice ? u[i] + Real(0.5, ctx.prec()) : u[i];
        if (near_integer(t, kSingularityGuard))
            throw ConfigError(std::string(what) + ": deformation point " + u[i].str(8) +
                              " lies on the carrier lattice");
        for (size_t j = i + 1; j < u.size(); ++j)
            if (abs(u[i] - u[j]) < Real(kSingularityGuard, ctx.prec()) * one)
                throw ConfigError(std::string(what) + ": deformation points must be distinct");
    }
}

void guard_small_det(const Real& dabs, const Real& hadamard, const PrecisionContext& ctx,
                     const char* what) {
    Real floor_v = hadamard * Real::pow2(-(ctx.mantissa_bits - 32), ctx.prec());
    if (dabs <= floor_v)
        throw DegenerateDeformationError(std::string(what) +
                                         ": determinant vanishes to working precision");
}

template <typename T>
Real hadamard_bound(const std::vector<std::vector<T>>& m, const PrecisionContext& ctx) {
    Real b = ctx.one();
    for (const auto& row : m) {
        Real s = ctx.zero();
        for (const auto& e : row) s += abs(e) * abs(e);
        b *= sqrt(s);
    }
    return b;
}

}  // namespace

// ---- public types ----

HalfInt HalfInt::from_twice(long t) {
    if (t % 2 == 0) throw ConfigError("HalfInt: twice-value must be odd");
    return HalfInt{t};
}

ZParams ZParams::make(Complex z, Complex zp, Real xi, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real zero = ctx.zero();
    if (!(xi > zero) || !(xi < ctx.one()))
        throw ConfigError("ZParams: xi must lie in (0,1)");

    Real tol(1e-12, prec);
    if (!z.im.is_zero() || !zp.im.is_zero()) {
        Complex d = zp - conj(z);
        if (abs(d) > tol || z.im.is_zero())
            throw ConfigError("ZParams: complex parameters must be conjugate (principal series)");
        zp = conj(z);  // enforce exactly
        return {z, zp, xi, ZSeries::Principal};
    }

    Real zr = z.re, zpr = zp.re;
    bool zi = near_integer(zr, 1e-12), zpi = near_integer(zpr, 1e-12);
    if (zpi && !zi) {
        std::swap(zr, zpr);
        std::swap(zi, zpi);
    }
    if (zi) {
        Real zn = round(zr);
        if (zn.is_zero()) throw ConfigError("ZParams: degenerate series needs z != 0");
        if (!(zn.sign() == zpr.sign()))
            throw ConfigError("ZParams: degenerate series needs z' of the same sign");
        if (!(abs(zpr) > abs(zn) - ctx.one()))
            throw ConfigError("ZParams: degenerate series needs |z'| > |z| - 1");
        return {Complex(zn), Complex(zpr), xi, ZSeries::Degenerate};
    }
    if (!(floor(zr) == floor(zpr)))
        throw ConfigError("ZParams: real parameters must share an integer interval");
    return {Complex(zr), Complex(zpr), xi, ZSeries::Complementary};
}

ZParams ZParams::swapped() const { return {zp, z, xi, series}; }

GammaDeformParams GammaDeformParams::make(ZParams zp, Real u, const PrecisionContext& ctx) {
    if (zp.series == ZSeries::Degenerate)
        throw ConfigError("GammaDeformParams: degenerate series has no Gamma limit here");
    check_offlattice_points({u}, "GammaDeformParams", ctx, /*half_lattice=*/true);
    return {std::move(zp), std::move(u)};
}

// ---- Bessel-side kernels ----

KernelHandle deformed_bessel_kernel(const Real& alpha, std::vector<Real> utilde,
                                    const PrecisionContext& ctx) {
    if (!(alpha > ctx.zero())) throw ConfigError("deformed_bessel_kernel: alpha must be > 0");
    check_offlattice_points(utilde, "deformed_bessel_kernel", ctx, /*half_lattice=*/false);

    struct Shared {
        Real alpha;
        std::vector<Real> u;
        long k;
        PrecisionContext ctx;
        specfun::BesselParams bp;
        std::vector<std::vector<Real>> uj, ul;  // [i][t], order u_i + 1 - t, t=0..2k+1
        Real pref;
        std::map<std::string, std::pair<Real, Real>> cache;  // order -> (J, L)
        std::mutex mu;

        Shared(Real a, std::vector<Real> uu, const PrecisionContext& c)
            : alpha(std::move(a)), u(std::move(uu)), k(static_cast<long>(u.size())),
              ctx(c), bp(alpha, c.one()) {}

        std::pair<Real, Real> jl_at(const Real& order) {
            std::string key = order.str(40);
            {
                std::lock_guard<std::mutex> lk(mu);
                auto it = cache.find(key);
                if (it != cache.end()) return it->second;
            }
            Real j = specfun::bessel_J(order, bp, ctx);
            Real l = specfun::bessel_L(order, bp, ctx);
            std::lock_guard<std::mutex> lk(mu);
            return cache.emplace(key, std::make_pair(j, l)).first->second;
        }
    };

    auto sh = std::make_shared<Shared>(Real(alpha, ctx.prec()), std::move(utilde), ctx);
    long k = sh->k;

    // point rows at the deformation points: orders u_i + 1 - t, t = 0..2k+1
    for (long i = 0; i < k; ++i) {
        std::vector<Real> jr, lr;
        for (long t = 0; t <= 2 * k + 1; ++t) {
            auto [j, l] = sh->jl_at(sh->u[i] + ctx.make(1 - t));
            jr.push_back(j);
            lr.push_back(l);
        }
        sh->uj.push_back(std::move(jr));
        sh->ul.push_back(std::move(lr));
    }

    // normalizing 2k x 2k determinant: columns at orders u_i - c, c = 0..2k-1
    Real cdet = ctx.one();
    if (k > 0) {
        std::vector<std::vector<Real>> m;
        for (long i = 0; i < k; ++i) {
            std::vector<Real> row;
            for (long c = 0; c < 2 * k; ++c) row.push_back(sh->uj[i][static_cast<size_t>(c + 1)]);
            m.push_back(std::move(row));
        }
        for (long i = 0; i < k; ++i) {
            std::vector<Real> row;
            for (long c = 0; c < 2 * k; ++c) row.push_back(sh->ul[i][static_cast<size_t>(c + 1)]);
            m.push_back(std::move(row));
        }
        Real hb = hadamard_bound(m, ctx);
        cdet = linalg::det_pp(std::move(m), ctx.prec());
        guard_small_det(abs(cdet), hb, ctx, "deformed_bessel_kernel");
    }
    sh->pref = pow_si(sqrt(sh->alpha), 2 * k + 1) / (cdet * cdet);

    PrecisionContext cctx = ctx;
    auto eval = [sh, k, cctx](const Real& x, const Real& y) -> Real {
        mpfr_prec_t prec = cctx.prec();
        Real prod = cctx.one();
        for (const Real& ui : sh->u) {
            if (abs(x - ui) < Real(kSingularityGuard, prec) ||
                abs(y - ui) < Real(kSingularityGuard, prec))
                throw GuardError("deformed_bessel_kernel: evaluation at a deformation point");
            prod *= abs((x - ui) * (y - ui));
        }

        // bordered determinant with last row J (or L) at orders x + p - c
        auto adet = [&](const Real& pt, long p, bool deriv_row) -> Real {
            std::vector<std::vector<Real>> m;
            for (long i = 0; i < k; ++i) {
                std::vector<Real> row;
                for (long c = 0; c <= 2 * k; ++c)
                    row.push_back(sh->uj[i][static_cast<size_t>(c + 1 - p)]);
                m.push_back(std::move(row));
            }
            for (long i = 0; i < k; ++i) {
                std::vector<Real> row;
                for (long c = 0; c <= 2 * k; ++c)
                    row.push_back(sh->ul[i][static_cast<size_t>(c + 1 - p)]);
                m.push_back(std::move(row));
            }
            std::vector<Real> last;
            for (long c = 0; c <= 2 * k; ++c) {
                auto [j, l] = sh->jl_at(pt + cctx.make(p - c));
                last.push_back(deriv_row ? l : j);
            }
            m.push_back(std::move(last));
            return linalg::det_pp(std::move(m), prec);
        };

        if (abs(x - y) < Real(kDiagonalBranch, prec)) {
            Real a0 = adet(x, 0, false), a1 = adet(x, 1, false);
            Real d0 = adet(x, 0, true), d1 = adet(x, 1, true);
            return sh->pref * (d0 * a1 - a0 * d1) / prod;
        }
        Real a0x = adet(x, 0, false), a1x = adet(x, 1, false);
        Real a0y = adet(y, 0, false), a1y = adet(y, 1, false);
        return sh->pref * (a0x * a1y - a0y * a1x) / ((x - y) * prod);
    };

    return {eval, "bessel-limit kernel, k=" + std::to_string(k)};
}

KernelHandle discrete_bessel_kernel(const Real& alpha, const PrecisionContext& ctx) {
    KernelHandle h = deformed_bessel_kernel(alpha, {}, ctx);
    h.provenance = "discrete Bessel kernel";
    return h;
}

// ---- psi functions ----

Complex psi(HalfInt a, const Real& x, const ZParams& zp, const PrecisionContext& ctx) {
    return psi_pair(a, x, zp, ctx, /*want_deriv=*/false).value;
}

Complex psi_dx(HalfInt a, const Real& x, const ZParams& zp, const PrecisionContext& ctx) {
    return psi_pair(a, x, zp, ctx, /*want_deriv=*/true).deriv;
}

Complex phi(HalfInt a, const Real& u, const ZParams& zp, const PrecisionContext& ctx) {
    PsiPair p = psi_pair(a, u, zp, ctx, /*want_deriv=*/true);
    return p.deriv - p.value * Complex(log(zp.xi) * half(ctx));
}

Complex psi_integral(HalfInt a, const Real& x, const ZParams& zp,
                     const PrecisionContext& ctx, double radius) {
    mpfr_prec_t prec = ctx.prec();
    Real one = ctx.one();
    Real av = a.value(prec);
    Real xa = x + av;
    if (!near_integer(xa, 1e-12))
        throw ConfigError("psi_integral: x + a must be an integer");
    long m = round(xa).to_long();

    Real sx = sqrt(zp.xi);
    Real r(radius, prec);
    if (!(r > sx) || !(r < one / sx))
        throw ConfigError("psi_integral: radius must lie in (sqrt(xi), 1/sqrt(xi))");

    Complex p1 = -zp.zp + av - half(ctx);  // exponent of (1 - sqrt(xi) w)
    Complex p2 = zp.z - av - half(ctx);    // exponent of (1 - sqrt(xi)/w)
    auto integrand = [&](const Real& th) -> Complex {
        Complex w(r * cos(th), r * sin(th));
        Complex f1 = pow(Complex(one) - Complex(sx) * w, p1);
        Complex f2 = pow(Complex(one) - Complex(sx) / w, p2);
        Complex wm = pow(w, Complex(Real(-m, prec), Real(0L, prec)));
        return f1 * f2 * wm;
    };

    Real scale = abs(integrand(ctx.zero())) + abs(integrand(Real::pi(prec))) + one;
    Complex mean = quad::trapezoid_periodic_mean(integrand, ctx.quad_nodes, kContourNodeCap,
                                                 ctx.tol_rel() * scale, prec);

    Real s = sqrt_positive(gamma_pair_x(x, zp, ctx) / gamma_pair_a(a, zp, ctx), ctx,
                           "psi_integral prefactor");
    Complex gn = gamma_c(zp.zp - av + half(ctx), zp);
    Complex gd = gamma_c(zp.zp + Complex(x) + half(ctx), zp);
    Complex pw = cpow(one - zp.xi, (zp.zp - zp.z + one) * half(ctx));
    return Complex(s) * (gn / gd) * pw * mean;
}

// ---- Gamma-side building blocks ----

Complex f_fn(const Real& x, const ZParams& zp, const PrecisionContext& ctx) {
    return f_fn_impl(x, zp, ctx);
}
Complex g_fn(HalfInt a, const ZParams& zp, const PrecisionContext& ctx) {
    return g_fn_impl(a, zp, ctx);
}
Complex h_fn(const Real& u, HalfInt a, const ZParams& zp, const PrecisionContext& ctx) {
    return h_fn_impl(u, a, zp, ctx);
}
Complex h_dx(const Real& u, HalfInt a, const ZParams& zp, const PrecisionContext& ctx) {
    return h_dx_impl(u, a, zp, ctx);
}

Complex psi_pair_limit(HalfInt a, HalfInt b, const Real& x, const Real& y,
                       const ZParams& zp, const PrecisionContext& ctx) {
    return pair_limit_impl(a, b, x, y, zp, ctx);
}

Complex psi_phi_pair_limit(HalfInt a, HalfInt b, const Real& x, const ZParams& zp,
                           const PrecisionContext& ctx) {
    return point_limit_impl(a, b, x, zp, ctx);
}

Complex psi_pair_limit_gamma_only(HalfInt a, HalfInt b, const Real& x, const Real& y,
                                  const ZParams& zp, const PrecisionContext& ctx) {
    Real hv = half(ctx);
    Real av = a.value(ctx.prec()), bv = b.value(ctx.prec());
    Complex gzz = gamma_c(zp.z - zp.zp, zp) * gamma_c(zp.zp - zp.z, zp);

    Real rx = sqrt_positive(gamma_pair_x(x, zp, ctx), ctx, "pair_limit x");
    Real ry = sqrt_positive(gamma_pair_x(y, zp, ctx), ctx, "pair_limit y");
    Real qa = sqrt_positive(gamma_pair_a(a, zp, ctx), ctx, "pair_limit a");
    Real qb = sqrt_positive(gamma_pair_a(b, zp, ctx), ctx, "pair_limit b");
    Real rr = rx * ry / (qa * qb);

    Complex gza = gamma_c(-zp.z + av + hv, zp), gsa = gamma_c(-zp.zp + av + hv, zp);
    Complex gzb = gamma_c(-zp.z + bv + hv, zp), gsb = gamma_c(-zp.zp + bv + hv, zp);
    Complex gxz = gamma_c(Complex(x) + zp.z + hv, zp), gxs = gamma_c(Complex(x) + zp.zp + hv, zp);
    Complex gyz = gamma_c(Complex(y) + zp.z + hv, zp), gys = gamma_c(Complex(y) + zp.zp + hv, zp);

    Complex one(ctx.one());
    Complex t1 = one / (gza * gsb * gxs * gyz);
    Complex t2 = one / (gsa * gzb * gxz * gys);
    Complex t3 = one / (gsa * gzb * gxs * gyz);
    Complex t4 = one / (gza * gsb * gxz * gys);
    return gzz * (t1 + t2 - t3 - t4) * rr;
}

// ---- z-measure deformed kernel ----

KernelHandle zmeas_deformed_kernel(const ZParams& zp, std::vector<Real> u,
                                   const PrecisionContext& ctx) {
    check_offlattice_points(u, "zmeas_deformed_kernel", ctx, /*half_lattice=*/true);
    long k = static_cast<long>(u.size());

    struct Shared {
        ZParams zp;
        std::vector<Real> u;
        long k;
        PrecisionContext ctx;
        std::vector<std::vector<Complex>> upsi, updx;  // [i][t], a = 1/2 - t
        Complex pref;                                  // C / D^2
        std::map<std::string, std::vector<PsiPair>> cache;  // point -> psi pairs per t
        std::mutex mu;

        Shared(ZParams z, std::vector<Real> uu, const PrecisionContext& c)
            : zp(std::move(z)), u(std::move(uu)), k(static_cast<long>(u.size())), ctx(c) {}

        const std::vector<PsiPair>& at(const Real& x, bool deriv) {
            std::string key = x.str(40);
            {
                std::lock_guard<std::mutex> lk(mu);
                auto it = cache.find(key);
                if (it != cache.end() && (!deriv || !it->second[0].deriv.re.is_nan()))
                    return it->second;
            }
            std::vector<PsiPair> vals;
            for (long t = 0; t <= 2 * k + 1; ++t) {
                HalfInt a = HalfInt::from_twice(1 - 2 * t);
                vals.push_back(psi_pair(a, x, zp, ctx, deriv));
                if (!deriv) {
                    Real nan(ctx.prec());
                    mpfr_set_nan(nan.raw());
                    vals.back().deriv = Complex(nan, ctx.zero());
                }
            }
            std::lock_guard<std::mutex> lk(mu);
            return cache.insert_or_assign(key, std::move(vals)).first->second;
        }
    };

    auto sh = std::make_shared<Shared>(zp, std::move(u), ctx);

    for (long i = 0; i < k; ++i) {
        std::vector<Complex> pv, pd;
        for (long t = 0; t <= 2 * k + 1; ++t) {
            HalfInt a = HalfInt::from_twice(1 - 2 * t);
            PsiPair p = psi_pair(a, sh->u[i], zp, ctx, /*want_deriv=*/true);
            pv.push_back(p.value);
            pd.push_back(p.deriv);
        }
        sh->upsi.push_back(std::move(pv));
        sh->updx.push_back(std::move(pd));
    }

    Complex ddet(ctx.one());
    if (k > 0) {
        std::vector<std::vector<Complex>> m;
        for (long i = 0; i < k; ++i) {
            std::vector<Complex> row;
            for (long c = 0; c < 2 * k; ++c) row.push_back(sh->upsi[i][static_cast<size_t>(c + 1)]);
            m.push_back(std::move(row));
        }
        for (long i = 0; i < k; ++i) {
            std::vector<Complex> row;
            for (long c = 0; c < 2 * k; ++c) row.push_back(sh->updx[i][static_cast<size_t>(c + 1)]);
            m.push_back(std::move(row));
        }
        Real hb = hadamard_bound(m, ctx);
        ddet = linalg::det_pp(std::move(m), ctx.prec());
        guard_small_det(abs(ddet), hb, ctx, "zmeas_deformed_kernel");
    }

    // Constant sqrt(xi)^{2k+1}/(1-xi)^{2k+1} sqrt((z)_{2k+1} (z')_{2k+1}):
    // symmetric in z <-> z' and positive for the principal series, and the
    // form validated against the deformed Meixner kernel in the degenerate
    // series (the asymmetric Gamma-ratio constant fails that cross-check).
    Real ratio = sqrt(zp.xi) / (ctx.one() - zp.xi);
    Complex pprod = pochhammer(zp.z, static_cast<unsigned long>(2 * k + 1)) *
                    pochhammer(zp.zp, static_cast<unsigned long>(2 * k + 1));
    Complex cconst = Complex(pow_si(ratio, 2 * k + 1)) *
                     Complex(sqrt_positive(pprod, ctx, "zmeas_deformed_kernel constant"));
    sh->pref = cconst / (ddet * ddet);

    PrecisionContext cctx = ctx;
    auto eval = [sh, k, cctx](const Real& x, const Real& y) -> Real {
        mpfr_prec_t prec = cctx.prec();
        Real prod = cctx.one();
        for (const Real& ui : sh->u) {
            if (abs(x - ui) < Real(kSingularityGuard, prec) ||
                abs(y - ui) < Real(kSingularityGuard, prec))
                throw GuardError("zmeas_deformed_kernel: evaluation at a deformation point");
            prod *= abs((x - ui) * (y - ui));
        }

        bool diag = abs(x - y) < Real(kDiagonalBranch, prec);
        const std::vector<PsiPair>& px = sh->at(x, diag);

        // bordered determinant, last row psi (or psi') at the point
        auto bdet = [&](const std::vector<PsiPair>& pt, long p, bool deriv_row) -> Complex {
            std::vector<std::vector<Complex>> m;
            for (long i = 0; i < k; ++i) {
                std::vector<Complex> row;
                for (long c = 0; c <= 2 * k; ++c)
                    row.push_back(sh->upsi[i][static_cast<size_t>(c + 1 - p)]);
                m.push_back(std::move(row));
            }
            for (long i = 0; i < k; ++i) {
                std::vector<Complex> row;
                for (long c = 0; c <= 2 * k; ++c)
                    row.push_back(sh->updx[i][static_cast<size_t>(c + 1 - p)]);
                m.push_back(std::move(row));
            }
            std::vector<Complex> last;
            for (long c = 0; c <= 2 * k; ++c) {
                const PsiPair& pp = pt[static_cast<size_t>(c + 1 - p)];
                last.push_back(deriv_row ? pp.deriv : pp.value);
            }
            m.push_back(std::move(last));
            return linalg::det_pp(std::move(m), prec);
        };

        Complex val(prec);
        if (diag) {
            Complex b0 = bdet(px, 0, false), b1 = bdet(px, 1, false);
            Complex d0 = bdet(px, 0, true), d1 = bdet(px, 1, true);
            val = sh->pref * (d0 * b1 - b0 * d1) / prod;
        } else {
            const std::vector<PsiPair>& py = sh->at(y, false);
            Complex b0x = bdet(px, 0, false), b1x = bdet(px, 1, false);
            Complex b0y = bdet(py, 0, false), b1y = bdet(py, 1, false);
            val = sh->pref * (b0x * b1y - b0y * b1x) / ((x - y) * prod);
        }
        return require_real(val, cctx, "zmeas_deformed_kernel");
    };

    return {eval, "z-measure kernel, k=" + std::to_string(k)};
}

// ---- xi -> 1 asymptotics ----

AsymptoticReport psi_asymptotic_check(HalfInt a, const Real& u, const ZParams& zp,
                                      const std::vector<Real>& xi_list,
                                      const PrecisionContext& ctx) {
    Real one = ctx.one();
    AsymptoticReport rep;
    for (const Real& xi : xi_list) {
        ZParams zx = ZParams::make(zp.z, zp.zp, xi, ctx);
        ZParams sw = zx.swapped();
        Complex h1 = h_fn_impl(u, a, zx, ctx), h2 = h_fn_impl(u, a, sw, ctx);
        Complex d1 = h_dx_impl(u, a, zx, ctx), d2 = h_dx_impl(u, a, sw, ctx);
        Complex e1 = cpow(one - xi, (zx.zp - zx.z) * half(ctx));
        Complex e2 = cpow(one - xi, (zx.z - zx.zp) * half(ctx));

        PsiPair p = psi_pair(a, u, zx, ctx, /*want_deriv=*/true);
        Real scale = one / sqrt(one - xi);
        Complex val_psi = p.value * scale;
        Complex val_phi = (p.deriv - p.value * Complex(log(xi) * half(ctx))) * scale;

        // the (1-xi)^{(z'-z)/2} power carries the swapped-order coefficient
        rep.points.push_back({xi, abs(val_psi - (h2 * e1 + h1 * e2)),
                              abs(val_phi - (d2 * e1 + d1 * e2))});
    }
    return rep;
}

// ---- Gamma-limit kernels ----

namespace {

// Shared machinery for the k = 1 limit kernel. The cofactor limits of the
// bordered determinants reduce to the same-point pair combination E(a,b); the
// column pairs are those left after striking one column.
struct GammaShared {
    ZParams zp;
    Real u;
    PrecisionContext ctx;
    std::vector<Complex> cof0, cof1;  // cofactor limits for the two borders
    Complex pref;                     // constant / (limit of D)^2
    bool printed;                     // literal transcription of the stated formula

    Complex pair_xy(long i, long j, const Real& x, const Real& y) const {
        HalfInt a = HalfInt::from_twice(printed ? -1 + 2 * i : -1 - 2 * i);
        HalfInt b = HalfInt::from_twice(printed ? 1 + 2 * j : 1 - 2 * j);
        return pair_limit_impl(a, b, x, y, zp, ctx);
    }
    Complex pair_diag(long i, long j, const Real& x) const {
        HalfInt a = HalfInt::from_twice(printed ? -1 + 2 * i : -1 - 2 * i);
        HalfInt b = HalfInt::from_twice(printed ? 1 + 2 * j : 1 - 2 * j);
        return point_limit_impl(a, b, x, zp, ctx);
    }
};

Complex point_limit_halves(long ta, long tb, const Real& u, const ZParams& zp,
                           const PrecisionContext& ctx) {
    return point_limit_impl(HalfInt::from_twice(ta), HalfInt::from_twice(tb), u, zp, ctx);
}

KernelHandle gamma_kernel_k1(const GammaDeformParams& gp, const PrecisionContext& ctx,
                             bool printed) {
    auto sh = std::make_shared<GammaShared>(
        GammaShared{gp.zparams, gp.u, ctx, {}, {}, Complex(ctx.prec()), printed});
    const ZParams& zp = sh->zp;

    Complex dlim;  // limit of the normalizing determinant: pair (-1/2, -3/2)
    dlim = point_limit_halves(-1, -3, sh->u, zp, ctx);

    if (!printed) {
        // cofactors of the two borders: strike column i from the a-lists
        // (-1/2,-3/2,-5/2) and (1/2,-1/2,-3/2), sign (-1)^i
        const long tw0[3] = {-1, -3, -5};
        const long tw1[3] = {1, -1, -3};
        for (long i = 0; i < 3; ++i) {
            long p0[2], p1[2];
            for (long c = 0, j = 0; c < 3; ++c)
                if (c != i) {
                    p0[j] = tw0[c];
                    p1[j] = tw1[c];
                    ++j;
                }
            Complex c0 = point_limit_halves(p0[0], p0[1], sh->u, zp, ctx);
            Complex c1 = point_limit_halves(p1[0], p1[1], sh->u, zp, ctx);
            if (i % 2 == 1) {
                c0 = -c0;
                c1 = -c1;
            }
            sh->cof0.push_back(c0);
            sh->cof1.push_back(c1);
        }
        // constant from the (1-xi) power bookkeeping: sqrt((z)_3 (z')_3),
        // inherited from the corrected finite-xi kernel constant
        Complex cc(sqrt_positive(pochhammer(zp.z, 3) * pochhammer(zp.zp, 3), ctx,
                                 "gamma kernel constant"));
        sh->pref = cc / (dlim * dlim);
    } else {
        // literal index maps a(i), b(i) and the Phi display as stated
        const long amap[3] = {-1, 0, 0};
        const long bmap[3] = {-2, -2, -1};
        ZParams sw = zp.swapped();
        auto phi_disp = [&](long A, long B) -> Complex {
            HalfInt aa = HalfInt::from_twice(-1 + 2 * A);
            HalfInt bm = HalfInt::from_twice(-1 + 2 * B);
            HalfInt bp = HalfInt::from_twice(1 + 2 * B);
            return h_fn_impl(sh->u, aa, zp, ctx) * h_dx_impl(sh->u, bm, sw, ctx) +
                   h_fn_impl(sh->u, aa, sw, ctx) * h_dx_impl(sh->u, bp, zp, ctx) -
                   h_fn_impl(sh->u, bm, zp, ctx) * h_dx_impl(sh->u, aa, sw, ctx) -
                   h_fn_impl(sh->u, bp, sw, ctx) * h_dx_impl(sh->u, aa, zp, ctx);
        };
        for (long i = 0; i < 3; ++i) {
            sh->cof0.push_back(phi_disp(amap[i], bmap[i]));
            sh->cof1.push_back(phi_disp(amap[i] + 1, bmap[i] + 1));
        }
        Complex z3 = (zp.z + ctx.make(3L)) * (zp.z + ctx.make(2L)) * (zp.z + ctx.one());
        Complex s3 = (zp.zp + ctx.make(2L)) * (zp.zp + ctx.one()) * zp.zp;
        Complex d0 = phi_disp(0, -1);
        sh->pref = z3 * s3 / (d0 * d0);
    }

    PrecisionContext cctx = ctx;
    auto eval = [sh, cctx](const Real& x, const Real& y) -> Real {
        mpfr_prec_t prec = cctx.prec();
        if (abs(x - sh->u) < Real(kSingularityGuard, prec) ||
            abs(y - sh->u) < Real(kSingularityGuard, prec))
            throw GuardError("gamma_deformed_kernel: evaluation at the deformation point");

        Complex num(prec);
        bool diag = abs(x - y) < Real(kDiagonalBranch, prec);
        for (long i = 0; i < 3; ++i)
            for (long j = 0; j < 3; ++j) {
                Complex p = diag ? -sh->pair_diag(i, j, x) : sh->pair_xy(i, j, x, y);
                num += sh->cof0[static_cast<size_t>(i)] * sh->cof1[static_cast<size_t>(j)] * p;
            }
        Real den = diag ? (x - sh->u) * (x - sh->u) : abs((x - sh->u) * (y - sh->u)) * (x - y);
        return require_real(sh->pref * num / den, cctx, "gamma_deformed_kernel");
    };

    return {eval, printed ? "Gamma-limit kernel k=1 (stated form)"
                          : "Gamma-limit kernel k=1 (cofactor limits)"};
}

}  // namespace

KernelHandle gamma_deformed_kernel(const GammaDeformParams& gp, const PrecisionContext& ctx) {
    return gamma_kernel_k1(gp, ctx, /*printed=*/false);
}

KernelHandle gamma_deformed_kernel_printed(const GammaDeformParams& gp,
                                           const PrecisionContext& ctx) {
    return gamma_kernel_k1(gp, ctx, /*printed=*/true);
}

KernelHandle gamma_kernel_undeformed(const ZParams& zp, const PrecisionContext& ctx) {
    if (zp.series == ZSeries::Degenerate)
        throw ConfigError("gamma_kernel_undeformed: degenerate series has no Gamma limit here");
    ZParams z = zp;
    PrecisionContext cctx = ctx;
    Complex cc(sqrt_positive(zp.z * zp.zp, ctx, "gamma kernel constant"));
    auto eval = [z, cctx, cc](const Real& x, const Real& y) -> Real {
        HalfInt am = HalfInt::from_twice(-1), ap = HalfInt::from_twice(1);
        Complex val(cctx.prec());
        if (abs(x - y) < Real(kDiagonalBranch, cctx.prec()))
            val = cc * (-point_limit_impl(am, ap, x, z, cctx));
        else
            val = cc * pair_limit_impl(am, ap, x, y, z, cctx) / (x - y);
        return require_real(val, cctx, "gamma_kernel_undeformed");
    };
    return {eval, "Gamma-limit kernel k=0"};
}

}  // namespace cdop::kernels
