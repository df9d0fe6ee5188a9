#ifndef CDOP_PREC_HPP
#define CDOP_PREC_HPP

// Extended-precision scalar substrate. Real wraps an mpfr_t with the
// precision carried per value; binary operations round at the larger of the
// two operand precisions. Complex is a plain re/im pair on top of Real with
// principal-branch log/pow/sqrt.

#include <mpfr.h>

#include <string>
#include <utility>

#include "cdop/errors.hpp"

namespace cdop {

class Real {
public:
    explicit Real(mpfr_prec_t prec = 128) {
        mpfr_init2(v_, prec);
        mpfr_set_zero(v_, 1);
    }
    Real(double d, mpfr_prec_t prec) {
        mpfr_init2(v_, prec);
        mpfr_set_d(v_, d, MPFR_RNDN);
    }
    Real(long n, mpfr_prec_t prec) {
        mpfr_init2(v_, prec);
        mpfr_set_si(v_, n, MPFR_RNDN);
    }
    Real(const std::string& s, mpfr_prec_t prec) {
        mpfr_init2(v_, prec);
        if (mpfr_set_str(v_, s.c_str(), 10, MPFR_RNDN) != 0)
            throw ConfigError("Real: cannot parse '" + s + "'");
    }
    Real(const Real& o, mpfr_prec_t prec) {
        mpfr_init2(v_, prec);
        mpfr_set(v_, o.raw(), MPFR_RNDN);
    }
    Real(const Real& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    Real(Real&& o) noexcept {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_swap(v_, o.v_);
    }
    Real& operator=(const Real& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    Real& operator=(Real&& o) noexcept {
        if (this != &o) mpfr_swap(v_, o.v_);
        return *this;
    }
    ~Real() { mpfr_clear(v_); }

    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

    double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
    long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }
    bool is_integer() const { return mpfr_integer_p(v_) != 0; }
    bool is_nan() const { return mpfr_nan_p(v_) != 0; }
    bool is_zero() const { return mpfr_zero_p(v_) != 0; }
    int sign() const { return mpfr_sgn(v_); }

    std::string str(size_t digits = 0) const;

    Real& operator+=(const Real& o) { mpfr_add(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator-=(const Real& o) { mpfr_sub(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator*=(const Real& o) { mpfr_mul(v_, v_, o.v_, MPFR_RNDN); return *this; }
    Real& operator/=(const Real& o) { mpfr_div(v_, v_, o.v_, MPFR_RNDN); return *this; }

    friend Real operator+(const Real& a, const Real& b) { return binop(a, b, mpfr_add); }
    friend Real operator-(const Real& a, const Real& b) { return binop(a, b, mpfr_sub); }
    friend Real operator*(const Real& a, const Real& b) { return binop(a, b, mpfr_mul); }
    friend Real operator/(const Real& a, const Real& b) { return binop(a, b, mpfr_div); }
    friend Real operator-(const Real& a) {
        Real r(a.prec());
        mpfr_neg(r.v_, a.v_, MPFR_RNDN);
        return r;
    }

    friend Real operator+(const Real& a, long b) { return a + Real(b, a.prec()); }
    friend Real operator+(long a, const Real& b) { return Real(a, b.prec()) + b; }
    friend Real operator-(const Real& a, long b) { return a - Real(b, a.prec()); }
    friend Real operator-(long a, const Real& b) { return Real(a, b.prec()) - b; }
    friend Real operator*(const Real& a, long b) { return a * Real(b, a.prec()); }
    friend Real operator*(long a, const Real& b) { return Real(a, b.prec()) * b; }
    friend Real operator/(const Real& a, long b) { return a / Real(b, a.prec()); }
    friend Real operator/(long a, const Real& b) { return Real(a, b.prec()) / b; }

    friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
    friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
    friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
    friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
    friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
    friend bool operator!=(const Real& a, const Real& b) { return !(a == b); }

    static Real pi(mpfr_prec_t prec) {
        Real r(prec);
        mpfr_const_pi(r.v_, MPFR_RNDN);
        return r;
    }
    static Real euler(mpfr_prec_t prec) {
        Real r(prec);
        mpfr_const_euler(r.v_, MPFR_RNDN);
        return r;
    }
    // 2^e
    static Real pow2(long e, mpfr_prec_t prec) {
        Real r(1.0, prec);
        mpfr_mul_2si(r.v_, r.v_, e, MPFR_RNDN);
        return r;
    }
    static Real factorial(unsigned long n, mpfr_prec_t prec) {
        Real r(prec);
        mpfr_fac_ui(r.v_, n, MPFR_RNDN);
        return r;
    }

private:
    using mpfr_fn2 = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
    static Real binop(const Real& a, const Real& b, mpfr_fn2 fn) {
        Real r(a.prec() > b.prec() ? a.prec() : b.prec());
        fn(r.v_, a.v_, b.v_, MPFR_RNDN);
        return r;
    }
    mpfr_t v_;
};

inline Real unop(const Real& a, int (*fn)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t)) {
    Real r(a.prec());
    fn(r.raw(), a.raw(), MPFR_RNDN);
    return r;
}

inline Real abs(const Real& a) { return unop(a, mpfr_abs); }
inline Real sqrt(const Real& a) { return unop(a, mpfr_sqrt); }
inline Real exp(const Real& a) { return unop(a, mpfr_exp); }
inline Real log(const Real& a) { return unop(a, mpfr_log); }
inline Real sin(const Real& a) { return unop(a, mpfr_sin); }
inline Real cos(const Real& a) { return unop(a, mpfr_cos); }
inline Real floor(const Real& a) {
    Real r(a.prec());
    mpfr_floor(r.raw(), a.raw());
    return r;
}
inline Real round(const Real& a) {
    Real r(a.prec());
    mpfr_round(r.raw(), a.raw());
    return r;
}

inline Real atan2(const Real& y, const Real& x) {
    Real r(y.prec() > x.prec() ? y.prec() : x.prec());
    mpfr_atan2(r.raw(), y.raw(), x.raw(), MPFR_RNDN);
    return r;
}
inline Real pow(const Real& a, const Real& b) {
    Real r(a.prec() > b.prec() ? a.prec() : b.prec());
    mpfr_pow(r.raw(), a.raw(), b.raw(), MPFR_RNDN);
    return r;
}
inline Real pow_si(const Real& a, long n) {
    Real r(a.prec());
    mpfr_pow_si(r.raw(), a.raw(), n, MPFR_RNDN);
    return r;
}
inline Real max(const Real& a, const Real& b) { return a > b ? a : b; }
inline Real min(const Real& a, const Real& b) { return a < b ? a : b; }

struct Complex {
    Real re, im;

    explicit Complex(mpfr_prec_t prec = 128) : re(prec), im(prec) {}
    Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}
    explicit Complex(Real r) : re(std::move(r)), im(Real(re.prec())) {}
    Complex(double r, double i, mpfr_prec_t prec) : re(r, prec), im(i, prec) {}

    mpfr_prec_t prec() const { return re.prec(); }
    bool is_real() const { return im.is_zero(); }

    friend Complex operator+(const Complex& a, const Complex& b) { return {a.re + b.re, a.im + b.im}; }
    friend Complex operator-(const Complex& a, const Complex& b) { return {a.re - b.re, a.im - b.im}; }
    friend Complex operator-(const Complex& a) { return {-a.re, -a.im}; }
    friend Complex operator*(const Complex& a, const Complex& b) {
        return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
    }
    friend Complex operator/(const Complex& a, const Complex& b) {
        Real d = b.re * b.re + b.im * b.im;
        return {(a.re * b.re + a.im * b.im) / d, (a.im * b.re - a.re * b.im) / d};
    }
    friend Complex operator*(const Complex& a, const Real& b) { return {a.re * b, a.im * b}; }
    friend Complex operator*(const Real& a, const Complex& b) { return b * a; }
    friend Complex operator/(const Complex& a, const Real& b) { return {a.re / b, a.im / b}; }
    friend Complex operator+(const Complex& a, const Real& b) { return {a.re + b, a.im}; }
    friend Complex operator+(const Real& a, const Complex& b) { return b + a; }
    friend Complex operator-(const Complex& a, const Real& b) { return {a.re - b, a.im}; }
    friend Complex operator-(const Real& a, const Complex& b) { return {a - b.re, -b.im}; }

    Complex& operator+=(const Complex& o) { re += o.re; im += o.im; return *this; }
    Complex& operator-=(const Complex& o) { re -= o.re; im -= o.im; return *this; }
    Complex& operator*=(const Complex& o) { *this = *this * o; return *this; }
};

inline Complex conj(const Complex& a) { return {a.re, -a.im}; }
inline Real abs(const Complex& a) { return sqrt(a.re * a.re + a.im * a.im); }
inline Real arg(const Complex& a) { return atan2(a.im, a.re); }

inline Complex exp(const Complex& a) {
    Real m = exp(a.re);
    return {m * cos(a.im), m * sin(a.im)};
}
// principal branch
inline Complex log(const Complex& a) { return {log(abs(a)), arg(a)}; }
inline Complex sqrt(const Complex& a) {
    if (a.im.is_zero() && a.re.sign() >= 0) return Complex(sqrt(a.re));
    Real m = sqrt(abs(a));
    Real half(0.5, a.prec());
    Real t = arg(a) * half;
    return {m * cos(t), m * sin(t)};
}
// a^b, principal branch of log(a)
inline Complex pow(const Complex& a, const Complex& b) {
    if (a.re.is_zero() && a.im.is_zero()) return Complex(a.prec());
    return exp(b * log(a));
}
inline Complex pow(const Complex& a, const Real& b) { return pow(a, Complex(b)); }

// Precision/quadrature context shared by all numeric operations. tol_rel is
// the relative agreement target used by stagnation stopping and quadrature
// node doubling; it keeps a generous guard below the mantissa width.
struct PrecisionContext {
    long mantissa_bits = 256;
    long quad_nodes = 64;

    PrecisionContext() = default;
    explicit PrecisionContext(long bits, long nodes = 64)
        : mantissa_bits(bits), quad_nodes(nodes) {
        if (bits < 64) throw ConfigError("PrecisionContext: mantissa_bits must be >= 64");
        if (nodes < 4) throw ConfigError("PrecisionContext: quad_nodes must be >= 4");
    }

    mpfr_prec_t prec() const { return static_cast<mpfr_prec_t>(mantissa_bits); }
    Real tol_rel() const { return Real::pow2(-(mantissa_bits - 24), prec()); }

    Real make(double d) const { return Real(d, prec()); }
    Real make(long n) const { return Real(n, prec()); }
    Real make(const std::string& s) const { return Real(s, prec()); }
    Complex makec(double r, double i = 0.0) const { return Complex(r, i, prec()); }
    Real zero() const { return Real(prec()); }
    Real one() const { return Real(1L, prec()); }
};

} // namespace cdop

#endif
