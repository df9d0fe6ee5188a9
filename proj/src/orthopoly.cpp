#include "cdop/orthopoly.hpp"

#include <map>
#include <mutex>
#include <string>
#include <tuple>

#include "cdop/errors.hpp"
#include "cdop/specfun.hpp"

namespace cdop::orthopoly {

WeightFamily WeightFamily::charlier(Real a) {
    if (!(a > Real(0L, a.prec())))
        throw ConfigError("WeightFamily: Charlier rate must be positive");
    mpfr_prec_t p = a.prec();
    return WeightFamily{FamilyKind::Charlier, std::move(a), Real(p), Real(p)};
}

WeightFamily WeightFamily::meixner(Real beta, Real xi) {
    mpfr_prec_t p = beta.prec() > xi.prec() ? beta.prec() : xi.prec();
    if (!(beta > Real(0L, p)))
        throw ConfigError("WeightFamily: Meixner beta must be positive");
    if (!(xi > Real(0L, p)) || !(xi < Real(1L, p)))
        throw ConfigError("WeightFamily: Meixner xi must lie in (0,1)");
    return WeightFamily{FamilyKind::Meixner, Real(p), std::move(beta), std::move(xi)};
}

Real weight_at(const WeightFamily& w, long x, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    if (x < 0) throw ConfigError("weight_at: support is the nonnegative integers");
    unsigned long ux = static_cast<unsigned long>(x);
    if (w.kind == FamilyKind::Charlier) {
        return exp(-Real(w.a, prec)) * pow_si(Real(w.a, prec), x) /
               Real::factorial(ux, prec);
    }
    return specfun::pochhammer(Real(w.beta, prec), ux) * pow_si(Real(w.xi, prec), x) /
           Real::factorial(ux, prec);
}

namespace {

// Terminating-series evaluation of sum_j q_j (-x)_j together with its
// x-derivative, where q_{j+1}/q_j = (j-n) w / ((beta+j)(j+1)) and the Meixner
// denominator factor is skipped for Charlier (2F0). The derivative of the
// Pochhammer chain (-x)_j is carried by the product rule:
//   v_{j+1} = v_j (j - x),   d_{j+1} = d_j (j - x) - v_j.
ValDer series_val_der(long n, const Real& x, const Real& w, const Real* beta,
                      mpfr_prec_t prec) {
    Real q(1.0, prec);
    Real v(1.0, prec), d(0L, prec);
    Real sum(1.0, prec), dsum(0L, prec);
    for (long j = 0; j < n; ++j) {
        Real num = Real(j - n, prec) * w;
        Real den = Real(j + 1, prec);
        if (beta) den = den * (*beta + Real(j, prec));
        q = q * num / den;
        Real jmx = Real(j, prec) - x;
        d = d * jmx - v;
        v = v * jmx;
        sum = sum + q * v;
        dsum = dsum + q * d;
    }
    return ValDer{sum, dsum};
}

// Monic three-term recurrence coefficients: p_{n+1} = (x - A_n) p_n - B_n p_{n-1}.
void monic_coeffs(const WeightFamily& w, long n, mpfr_prec_t prec, Real& A, Real& B) {
    if (w.kind == FamilyKind::Charlier) {
        Real a(w.a, prec);
        A = Real(n, prec) + a;
        B = Real(n, prec) * a;
        return;
    }
    Real beta(w.beta, prec), xi(w.xi, prec);
    Real omx = Real(1L, prec) - xi;
    A = ((Real(1L, prec) + xi) * Real(n, prec) + beta * xi) / omx;
    B = xi * Real(n, prec) * (Real(n, prec) + beta - Real(1L, prec)) / (omx * omx);
}

// Monic value/derivative pairs p_m, p_m' for m = 0..n_hi via the recurrence
// differentiated in x: p'_{n+1} = p_n + (x - A_n) p'_n - B_n p'_{n-1}.
std::vector<ValDer> monic_sweep(const WeightFamily& w, long n_hi, const Real& x,
                                mpfr_prec_t prec) {
    std::vector<ValDer> out;
    out.reserve(static_cast<size_t>(n_hi) + 1);
    Real pm1(0L, prec), dpm1(0L, prec);
    Real p(1.0, prec), dp(0L, prec);
    out.push_back(ValDer{p, dp});
    for (long m = 0; m < n_hi; ++m) {
        Real A(prec), B(prec);
        monic_coeffs(w, m, prec, A, B);
        Real xa = x - A;
        Real pnew = xa * p - B * pm1;
        Real dpnew = p + xa * dp - B * dpm1;
        pm1 = p;
        dpm1 = dp;
        p = pnew;
        dp = dpnew;
        out.push_back(ValDer{p, dp});
    }
    return out;
}

constexpr long kSeriesMaxDegree = 30;

ValDer charlier_val_der(long n, const Real& x, const Real& a, mpfr_prec_t prec) {
    Real pref = sqrt(pow_si(Real(a, prec), n) / Real::factorial(static_cast<unsigned long>(n), prec));
    Real w = Real(-1L, prec) / Real(a, prec);
    ValDer s = series_val_der(n, x, w, nullptr, prec);
    return ValDer{pref * s.value, pref * s.deriv};
}

ValDer meixner_val_der(long n, const Real& x, const Real& beta, const Real& xi,
                       mpfr_prec_t prec) {
    Real bp(beta, prec);
    Real w = Real(1L, prec) - Real(1L, prec) / Real(xi, prec);
    return series_val_der(n, x, w, &bp, prec);
}

}  // namespace

Real charlier_eval(long n, const Real& x, const Real& a, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    if (n <= kSeriesMaxDegree) return charlier_val_der(n, x, a, prec).value;
    WeightFamily w = WeightFamily::charlier(Real(a, prec));
    return leading_coeff(w, n, ctx) * monic_sweep(w, n, x, prec).back().value;
}

Real charlier_eval_dx(long n, const Real& x, const Real& a, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    if (n <= kSeriesMaxDegree) return charlier_val_der(n, x, a, prec).deriv;
    WeightFamily w = WeightFamily::charlier(Real(a, prec));
    return leading_coeff(w, n, ctx) * monic_sweep(w, n, x, prec).back().deriv;
}

Real meixner_eval(long n, const Real& x, const Real& beta, const Real& xi,
                  const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    if (n <= kSeriesMaxDegree) return meixner_val_der(n, x, beta, xi, prec).value;
    WeightFamily w = WeightFamily::meixner(Real(beta, prec), Real(xi, prec));
    return leading_coeff(w, n, ctx) * monic_sweep(w, n, x, prec).back().value;
}

Real meixner_eval_dx(long n, const Real& x, const Real& beta, const Real& xi,
                     const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    if (n <= kSeriesMaxDegree) return meixner_val_der(n, x, beta, xi, prec).deriv;
    WeightFamily w = WeightFamily::meixner(Real(beta, prec), Real(xi, prec));
    return leading_coeff(w, n, ctx) * monic_sweep(w, n, x, prec).back().deriv;
}

std::vector<ValDer> joint_eval(const WeightFamily& w, long n_lo, long n_hi,
                               const Real& x, const PrecisionContext& ctx) {
    if (n_lo < 0 || n_hi < n_lo) throw ConfigError("joint_eval: bad index range");
    mpfr_prec_t prec = ctx.prec();
    std::vector<ValDer> monic = monic_sweep(w, n_hi, x, prec);
    std::vector<ValDer> out;
    out.reserve(static_cast<size_t>(n_hi - n_lo) + 1);
    for (long m = n_lo; m <= n_hi; ++m) {
        Real c = leading_coeff(w, m, ctx);
        out.push_back(ValDer{c * monic[static_cast<size_t>(m)].value,
                             c * monic[static_cast<size_t>(m)].deriv});
    }
    return out;
}

Real leading_coeff(const WeightFamily& w, long n, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    unsigned long un = static_cast<unsigned long>(n);
    if (w.kind == FamilyKind::Charlier) {
        // (-1)^n a^{-n/2} / sqrt(n!)
        Real c = sqrt(pow_si(Real(w.a, prec), -n) / Real::factorial(un, prec));
        return (n % 2 == 0) ? c : -c;
    }
    Real wv = Real(1L, prec) - Real(1L, prec) / Real(w.xi, prec);
    return pow_si(wv, n) / specfun::pochhammer(Real(w.beta, prec), un);
}

namespace {

std::map<std::tuple<std::string, long, long>, Real> g_charlier_norm_cache;
std::mutex g_charlier_norm_mutex;

Real measured_charlier_norm(const WeightFamily& w, long n, const PrecisionContext& ctx) {
    std::tuple<std::string, long, long> key{w.a.str(40), n, ctx.mantissa_bits};
    {
        std::lock_guard<std::mutex> lk(g_charlier_norm_mutex);
        auto it = g_charlier_norm_cache.find(key);
        if (it != g_charlier_norm_cache.end()) return it->second;
    }
    mpfr_prec_t prec = ctx.prec();
    long X = truncation_index(w, 2 * n, ctx);
    Real sum(0L, prec);
    for (long x = 0; x <= X; ++x) {
        Real cx = charlier_eval(n, Real(x, prec), w.a, ctx);
        sum = sum + weight_at(w, x, ctx) * cx * cx;
    }
    std::lock_guard<std::mutex> lk(g_charlier_norm_mutex);
    g_charlier_norm_cache.emplace(key, sum);
    return sum;
}

}  // namespace

Real squared_norm(const WeightFamily& w, long n, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    if (w.kind == FamilyKind::Charlier) return measured_charlier_norm(w, n, ctx);
    Real xi(w.xi, prec), beta(w.beta, prec);
    unsigned long un = static_cast<unsigned long>(n);
    return Real::factorial(un, prec) /
           (pow_si(xi, n) * pow(Real(1L, prec) - xi, beta) *
            specfun::pochhammer(beta, un));
}

long truncation_index(const WeightFamily& w, long poly_degree, const PrecisionContext& ctx) {
    mpfr_prec_t prec = ctx.prec();
    Real target = Real::pow2(-ctx.mantissa_bits, prec);
    // ratio cap: Charlier ratios tend to 0, Meixner to xi
    Real rho0 = (w.kind == FamilyKind::Charlier)
                    ? Real(0.5, prec)
                    : (Real(1L, prec) + Real(w.xi, prec)) / Real(2L, prec);
    Real one(1.0, prec);
    Real t = weight_at(w, 1, ctx);  // term x * x^d at x = 1
    for (long x = 1; x < (1L << 22); ++x) {
        // ratio of successive terms w(x+1)(x+1)^d / (w(x) x^d)
        Real r = (w.kind == FamilyKind::Charlier)
                     ? Real(w.a, prec) / Real(x + 1, prec)
                     : (Real(w.beta, prec) + Real(x, prec)) * Real(w.xi, prec) /
                           Real(x + 1, prec);
        Real xg = Real(x + 1, prec) / Real(x, prec);
        r = r * pow_si(xg, poly_degree);
        Real tnext = t * r;
        if (r <= rho0 && tnext / (one - rho0) < target) return x;
        t = tnext;
    }
    throw GuardError("truncation_index: no geometric tail bound reached");
}

}  // namespace cdop::orthopoly
