#include "cdop/specfun.hpp"

#include <gmpxx.h>

#include <cmath>
#include <mutex>
#include <vector>

#include "cdop/quad.hpp"

namespace cdop::specfun {

namespace {

constexpr long kNodeCap = 1L << 16;

Real sinh_r(const Real& a) { return unop(a, mpfr_sinh); }
Real cosh_r(const Real& a) { return unop(a, mpfr_cosh); }

bool is_nonpositive_integer(const Real& w) {
    return w.is_integer() && w.sign() <= 0;
}
bool is_nonpositive_integer(const Complex& w) {
    return w.im.is_zero() && is_nonpositive_integer(w.re);
}

// --- Bernoulli numbers, exact rationals, grown on demand ---

std::vector<mpq_class> g_bern;
std::mutex g_bern_mutex;

void grow_bernoulli(size_t m) {
    if (g_bern.empty()) {
        g_bern.emplace_back(1);
        g_bern.emplace_back(-1, 2);
    }
    while (g_bern.size() <= m) {
        size_t n = g_bern.size();
        if (n % 2 == 1) {
            g_bern.emplace_back(0);
            continue;
        }
        // B_n = -1/(n+1) * sum_{k<n} C(n+1,k) B_k
        mpq_class s(0);
        mpz_class binom(1);
        for (size_t k = 0; k < n; ++k) {
            s += mpq_class(binom) * g_bern[k];
            binom = binom * static_cast<long>(n + 1 - k) / static_cast<long>(k + 1);
        }
        s /= static_cast<long>(n + 1);
        g_bern.push_back(-s);
    }
}

// Shift threshold for the Stirling series at a given working precision.
long stirling_shift(mpfr_prec_t prec) {
    long m = static_cast<long>(0.18 * static_cast<double>(prec)) + 8;
    return m < 24 ? 24 : m;
}

Complex csin_pi(const Complex& w) {
    mpfr_prec_t prec = w.prec();
    Real pi = Real::pi(prec);
    return {sin_pi(w.re) * cosh_r(pi * w.im), cos_pi(w.re) * sinh_r(pi * w.im)};
}

// log Gamma(w) by the Stirling series; requires Re(w) >= stirling_shift(prec).
Complex lgamma_stirling(const Complex& w) {
    mpfr_prec_t prec = w.prec();
    Real two_pi = Real::pi(prec) * 2L;
    Complex lw = log(w);
    Complex s = (w - Real(0.5, prec)) * lw - w + Complex(log(two_pi) * Real(0.5, prec));

    Complex inv_w2 = Complex(Real(1.0, prec)) / (w * w);
    Complex pw = Complex(Real(1.0, prec)) / w; // w^{1-2n} running power
    Real eps = Real::pow2(-(static_cast<long>(prec) + 8), prec);
    Real prev_mag(prec);
    for (unsigned n = 1; n < 2000; ++n) {
        Real b = bernoulli_2n(n, prec);
        Complex term = pw * (b / Real(static_cast<long>(2 * n) * static_cast<long>(2 * n - 1), prec));
        Real mag = abs(term);
        if (n > 1 && mag > prev_mag) break; // asymptotic tail starts growing
        s += term;
        if (mag < eps) return s;
        prev_mag = mag;
        pw = pw * inv_w2;
    }
    return s;
}

Complex digamma_stirling(const Complex& w) {
    mpfr_prec_t prec = w.prec();
    Complex s = log(w) - Complex(Real(0.5, prec)) / w;
    Complex inv_w2 = Complex(Real(1.0, prec)) / (w * w);
    Complex pw = inv_w2; // w^{-2n} running power
    Real eps = Real::pow2(-(static_cast<long>(prec) + 8), prec);
    Real prev_mag(prec);
    for (unsigned n = 1; n < 2000; ++n) {
        Real b = bernoulli_2n(n, prec);
        Complex term = pw * (b / Real(static_cast<long>(2 * n), prec));
        Real mag = abs(term);
        if (n > 1 && mag > prev_mag) break;
        s -= term;
        if (mag < eps) return s;
        prev_mag = mag;
        pw = pw * inv_w2;
    }
    return s;
}

} // namespace

Real bernoulli_2n(unsigned n, mpfr_prec_t prec) {
    std::lock_guard<std::mutex> lock(g_bern_mutex);
    grow_bernoulli(2 * n);
    Real r(prec);
    mpfr_set_q(r.raw(), g_bern[2 * n].get_mpq_t(), MPFR_RNDN);
    return r;
}

Real pochhammer(const Real& a, unsigned long n) {
    Real p(1.0, a.prec());
    for (unsigned long j = 0; j < n; ++j) p *= a + static_cast<long>(j);
    return p;
}

Complex pochhammer(const Complex& a, unsigned long n) {
    Complex p(Real(1.0, a.prec()));
    for (unsigned long j = 0; j < n; ++j) p *= a + Real(static_cast<long>(j), a.prec());
    return p;
}

Complex gen_pochhammer(const Complex& a, const Partition& lam) {
    mpfr_prec_t prec = a.prec();
    Complex p(Real(1.0, prec));
    for (size_t i = 0; i < lam.length(); ++i)
        for (unsigned j = 1; j <= lam.parts[i]; ++j)
            p *= a + Real(static_cast<long>(j) - static_cast<long>(i) - 1, prec);
    return p;
}

Complex gen_pochhammer_rows(const Complex& a, const Partition& lam) {
    mpfr_prec_t prec = a.prec();
    Complex p(Real(1.0, prec));
    for (size_t i = 0; i < lam.length(); ++i)
        p *= pochhammer(a - Real(static_cast<long>(i), prec), lam.parts[i]);
    return p;
}

Real sin_pi(const Real& x) {
    if (x.is_integer()) return Real(x.prec());
    Real n = round(x);
    Real f = x - n; // |f| <= 1/2, exactly representable difference
    Real s = sin(Real::pi(x.prec()) * f);
    long par = n.to_long() & 1L;
    return par ? -s : s;
}

Real cos_pi(const Real& x) {
    Real n = round(x);
    Real f = x - n;
    Real c = cos(Real::pi(x.prec()) * f);
    long par = n.to_long() & 1L;
    return par ? -c : c;
}

Real gamma_fn(const Real& w) {
    if (is_nonpositive_integer(w))
        throw PoleError("gamma_fn: pole at nonpositive integer " + w.str(8));
    return unop(w, mpfr_gamma);
}

Complex gamma_fn(const Complex& w) {
    if (w.im.is_zero()) return Complex(gamma_fn(w.re));
    mpfr_prec_t prec = w.prec();
    Real half(0.5, prec);
    if (w.re < half) {
        // reflection: Gamma(w) = pi / (sin(pi w) Gamma(1 - w))
        Complex one_minus(Real(1.0, prec) - w.re, -w.im);
        return Complex(Real::pi(prec)) / (csin_pi(w) * gamma_fn(one_minus));
    }
    long m = stirling_shift(prec);
    Complex prod(Real(1.0, prec));
    Complex z = w;
    while (z.re < Real(m, prec)) {
        prod *= z;
        z = z + Real(1.0, prec);
    }
    return exp(lgamma_stirling(z)) / prod;
}

Real log_gamma(const Real& w) {
    if (!(w > Real(0L, w.prec())))
        throw PoleError("log_gamma: requires w > 0");
    return unop(w, mpfr_lngamma);
}

Real digamma(const Real& w) {
    if (is_nonpositive_integer(w))
        throw PoleError("digamma: pole at nonpositive integer " + w.str(8));
    return unop(w, mpfr_digamma);
}

Complex digamma(const Complex& w) {
    if (w.im.is_zero()) return Complex(digamma(w.re));
    mpfr_prec_t prec = w.prec();
    long m = stirling_shift(prec);
    Complex s(prec);
    Complex z = w;
    while (z.re < Real(m, prec)) {
        s += Complex(Real(1.0, prec)) / z;
        z = z + Real(1.0, prec);
    }
    return digamma_stirling(z) - s;
}

Complex hyp_pFq(const std::vector<Complex>& as, const std::vector<Complex>& bs,
                const Complex& w, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    for (const Complex& b : bs)
        if (is_nonpositive_integer(b))
            throw PoleError("hyp_pFq: lower parameter at nonpositive integer");

    long nterm = -1; // terminating index, -1 if nonterminating
    for (const Complex& a : as)
        if (is_nonpositive_integer(a)) {
            long t = -a.re.to_long();
            if (nterm < 0 || t < nterm) nterm = t;
        }

    if (nterm < 0) {
        if (as.size() > bs.size() + 1)
            throw DivergenceError("hyp_pFq: divergent series (p > q+1, nonterminating)");
        if (as.size() == bs.size() + 1 && !(abs(w) < Real(1.0, prec)))
            throw DivergenceError("hyp_pFq: |w| >= 1 at the radius of convergence");
    }

    Real tol = ctx.tol_rel();
    Complex sum(Real(1.0, prec));
    Complex term(Real(1.0, prec));
    int stagnant = 0;
    const long iter_cap = 5000000;
    for (long n = 0; n < iter_cap; ++n) {
        if (nterm >= 0 && n >= nterm) return sum;
        Complex num(Real(1.0, prec));
        for (const Complex& a : as) num *= a + Real(n, prec);
        Complex den(Real(n + 1, prec));
        for (const Complex& b : bs) den *= b + Real(n, prec);
        term = term * num * w / den;
        sum += term;
        if (nterm < 0) {
            if (abs(term) <= tol * abs(sum)) {
                if (++stagnant >= 3) return sum;
            } else {
                stagnant = 0;
            }
        }
    }
    throw DivergenceError("hyp_pFq: no stagnation after iteration cap");
}

Complex hyp2F1_neg(const Complex& a, const Complex& b, const Complex& c,
                   const Real& w, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    if (w > Real(0L, prec))
        throw ConfigError("hyp2F1_neg: requires w <= 0");
    if (is_nonpositive_integer(c))
        throw PoleError("hyp2F1_neg: lower parameter at nonpositive integer");
    if (w.is_zero()) return Complex(Real(1.0, prec));

    // Pfaff: 2F1(a,b;c;w) = (1-w)^{-a} 2F1(a, c-b; c; w/(w-1))
    Real wt = w / (w - 1L); // in (0,1)
    Complex pref = exp(-a * Complex(log(Real(1L, prec) - w)));
    return pref * hyp_pFq({a, c - b}, {c}, Complex(wt), ctx);
}

namespace {

// Upper integration bound for the substituted s-integral: the integrand decays
// like exp(-sqrt(alpha) e^t + |x| t); pick T so the tail is below 2^-(bits+64).
Real s_integral_upper(const Real& x, const Real& sqa, const Real& t0, long bits) {
    mpfr_prec_t prec = x.prec();
    Real target = Real(bits + 64, prec) * log(Real(2.0, prec));
    Real ax = abs(x);
    const Real one(1.0, prec);
    Real T = max(t0 + one, one);
    while (sqa * exp(T) - ax * T - sqa < target) T = T + one;
    return T;
}

// Peak magnitude of the s-integrand exp(sqa(e^{-t} - e^t) - x t) on [t0, T].
// For x < 0 the maximum sits at the interior critical point cosh t = -x/(2
// sqa) and can be exponentially large; the quadrature tolerance must be
// anchored to it, not to the contour bound alone.
Real s_integrand_peak(const Real& x, const Real& sqa, const Real& t0, const Real& T) {
    mpfr_prec_t prec = x.prec();
    auto g = [&](const Real& t) { return sqa * (exp(-t) - exp(t)) - x * t; };
    Real best = max(g(t0), g(T));
    if (x < Real(0L, prec)) {
        Real c = -x / (2L * sqa);
        if (c > Real(1L, prec)) {
            Real ts = log(c + sqrt(c * c - 1L)); // acosh
            if (t0 < ts && ts < T) best = max(best, g(ts));
        }
    }
    return exp(best);
}

} // namespace

Real bessel_J(const Real& x, const BesselParams& p, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real sqa = sqrt(p.alpha);
    Real r = p.r;
    Real logr = log(r);
    Real inv_r = 1L / r;

    // magnitude bound of the theta-integrand, sets the absolute target
    Real scale = exp(sqa * (r + inv_r) + abs(x * logr));
    Real tol_abs = ctx.tol_rel() * scale;

    auto theta_integrand = [&](const Real& th) {
        // exp( sqa (e^{-i th}/r - r e^{i th}) + x log r + i x th )
        Real c = cos(th), s = sin(th);
        Complex e(sqa * (inv_r - r) * c + x * logr, -sqa * (inv_r + r) * s + x * th);
        return exp(e);
    };
    Real i1;
    if (x.is_integer()) {
        // periodic integrand: the trapezoid rule converges spectrally
        Complex v = quad::trapezoid_periodic_mean(theta_integrand, ctx.quad_nodes,
                                                  kNodeCap, tol_abs, prec);
        return v.re;
    }
    // non-integer order breaks periodicity; the real part is even in theta,
    // so integrate it over [0, pi] with Gauss-Legendre instead
    Real t0 = -logr;
    Real T = s_integral_upper(x, sqa, t0, ctx.mantissa_bits);
    tol_abs = ctx.tol_rel() * max(scale, s_integrand_peak(x, sqa, t0, T));

    auto theta_re = [&](const Real& th) { return theta_integrand(th).re; };
    i1 = quad::gauss_legendre(theta_re, Real(0L, prec), Real::pi(prec),
                              ctx.quad_nodes, kNodeCap, tol_abs) / Real::pi(prec);
    auto s_integrand = [&](const Real& t) {
        return exp(sqa * (exp(-t) - exp(t)) - x * t);
    };
    Real i2 = quad::gauss_legendre(s_integrand, t0, T, ctx.quad_nodes, kNodeCap, tol_abs);
    return i1 - sin_pi(x) / Real::pi(prec) * i2;
}

Real bessel_L(const Real& x, const BesselParams& p, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real sqa = sqrt(p.alpha);
    Real r = p.r;
    Real logr = log(r);
    Real inv_r = 1L / r;
    Real pi = Real::pi(prec);

    Real t0 = -logr;
    Real T = s_integral_upper(x, sqa, t0, ctx.mantissa_bits);
    Real scale = max(exp(sqa * (r + inv_r) + abs(x * logr)), s_integrand_peak(x, sqa, t0, T)) *
                 (abs(logr) + pi + T);
    Real tol_abs = ctx.tol_rel() * scale;

    // the log t = log r + i theta factor is discontinuous at theta = +-pi, so
    // this integrand is never periodic; its real part is even in theta
    auto theta_re = [&](const Real& th) {
        Real c = cos(th), s = sin(th);
        Complex e(sqa * (inv_r - r) * c + x * logr, -sqa * (inv_r + r) * s + x * th);
        Complex v = Complex(logr, th) * exp(e);
        return v.re;
    };
    Real i1 = quad::gauss_legendre(theta_re, Real(0L, prec), pi,
                                   ctx.quad_nodes, kNodeCap, tol_abs) / pi;

    auto s_base = [&](const Real& t) {
        return exp(sqa * (exp(-t) - exp(t)) - x * t);
    };
    auto s_log = [&](const Real& t) { return -t * s_base(t); };

    Real i3 = quad::gauss_legendre(s_base, t0, T, ctx.quad_nodes, kNodeCap, tol_abs);
    Real result = i1 - cos_pi(x) * i3;
    if (!x.is_integer()) {
        Real i2 = quad::gauss_legendre(s_log, t0, T, ctx.quad_nodes, kNodeCap, tol_abs);
        result -= sin_pi(x) / pi * i2;
    }
    return result;
}

std::vector<Real> bessel_J_int_batch(long xmin, long xmax, const Real& alpha,
                                     const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real sqa = sqrt(alpha);
    size_t m = static_cast<size_t>(xmax - xmin + 1);

    auto f = [&](const Real& th) {
        std::vector<Complex> out;
        out.reserve(m);
        Real c = cos(th), s = sin(th);
        Complex u(c, s);                                    // e^{i th}
        Complex base = exp(Complex(Real(prec), -2L * sqa * s)); // e^{-2i sqa sin th}
        Complex cur = base * exp(Complex(Real(prec), Real(xmin, prec) * th));
        for (size_t j = 0; j < m; ++j) {
            out.push_back(cur);
            cur *= u;
        }
        return out;
    };
    std::vector<Complex> vals = quad::trapezoid_periodic_mean_batch(
        f, m, ctx.quad_nodes, kNodeCap, ctx.tol_rel(), prec);
    std::vector<Real> out;
    out.reserve(m);
    for (const Complex& v : vals) out.push_back(v.re);
    return out;
}

} // namespace cdop::specfun
