#include "cdop/quad.hpp"

#include <map>
#include <mutex>
#include <utility>

namespace cdop::quad {

Complex trapezoid_periodic_mean(const std::function<Complex(const Real&)>& f,
                                long n0, long node_cap, const Real& tol_abs,
                                mpfr_prec_t prec) {
    auto wrap = [&](const Real& th) { return std::vector<Complex>{f(th)}; };
    return trapezoid_periodic_mean_batch(wrap, 1, n0, node_cap, tol_abs, prec)[0];
}

std::vector<Complex> trapezoid_periodic_mean_batch(
    const std::function<std::vector<Complex>(const Real&)>& f, size_t m,
    long n0, long node_cap, const Real& tol_abs, mpfr_prec_t prec) {
    Real pi = Real::pi(prec);
    Real two_pi = pi * 2L;

    long n = n0;
    std::vector<Complex> acc(m, Complex(prec)); // running sum of f over all nodes so far
    // level 0: nodes theta_j = -pi + j * 2pi/n
    for (long j = 0; j < n; ++j) {
        Real th = -pi + two_pi * Real(j, prec) / n;
        std::vector<Complex> v = f(th);
        for (size_t c = 0; c < m; ++c) acc[c] += v[c];
    }
    std::vector<Complex> prev(m, Complex(prec));
    for (size_t c = 0; c < m; ++c) prev[c] = acc[c] / Real(n, prec);

    while (n < node_cap) {
        // midpoints of the current grid
        Real h = two_pi / Real(n, prec);
        for (long j = 0; j < n; ++j) {
            Real th = -pi + h * (Real(j, prec) + Real(0.5, prec));
            std::vector<Complex> v = f(th);
            for (size_t c = 0; c < m; ++c) acc[c] += v[c];
        }
        n *= 2;
        bool ok = true;
        std::vector<Complex> cur(m, Complex(prec));
        for (size_t c = 0; c < m; ++c) {
            cur[c] = acc[c] / Real(n, prec);
            if (abs(cur[c] - prev[c]) > tol_abs) ok = false;
        }
        prev = std::move(cur);
        if (ok) return prev;
    }
    throw QuadratureError("trapezoid_periodic_mean: no convergence at " +
                          std::to_string(node_cap) + " nodes");
}

namespace {

GaussLegendreRule build_rule(long n, mpfr_prec_t prec) {
    // Newton on P_n from Chebyshev-like initial guesses; symmetric pairs.
    GaussLegendreRule rule;
    rule.nodes.assign(n, Real(prec));
    rule.weights.assign(n, Real(prec));
    Real pi = Real::pi(prec);
    Real eps = Real::pow2(-(static_cast<long>(prec) - 4), prec);

    for (long i = 0; i < (n + 1) / 2; ++i) {
        Real x = cos(pi * (Real(i, prec) + Real(0.75, prec)) / (Real(n, prec) + Real(0.5, prec)));
        Real dp(prec);
        for (int it = 0; it < 200; ++it) {
            // P_n(x) and P_n'(x) by the three-term recurrence
            Real p0(1.0, prec), p1 = x;
            for (long k = 2; k <= n; ++k) {
                Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = Real(n, prec) * (x * p1 - p0) / (x * x - 1L);
            Real dx = p1 / dp;
            x -= dx;
            if (abs(dx) < eps) break;
        }
        Real w = Real(2L, prec) / ((1L - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = Real(prec); // exact middle
    return rule;
}

std::map<std::pair<long, long>, GaussLegendreRule> g_rules;
std::mutex g_rules_mutex;

} // namespace

const GaussLegendreRule& gauss_legendre_rule(long n, mpfr_prec_t prec) {
    std::lock_guard<std::mutex> lock(g_rules_mutex);
    auto key = std::make_pair(n, static_cast<long>(prec));
    auto it = g_rules.find(key);
    if (it == g_rules.end()) it = g_rules.emplace(key, build_rule(n, prec)).first;
    return it->second;
}

Real gauss_legendre(const std::function<Real(const Real&)>& f, const Real& a,
                    const Real& b, long n0, long node_cap, const Real& tol_abs) {
    mpfr_prec_t prec = a.prec() > b.prec() ? a.prec() : b.prec();
    Real mid = (a + b) / 2L;
    Real hal = (b - a) / 2L;

    Real prev(prec);
    bool have_prev = false;
    for (long n = n0; n <= node_cap; n *= 2) {
        const GaussLegendreRule& rule = gauss_legendre_rule(n, prec);
        Real s(prec);
        for (long j = 0; j < n; ++j) s += rule.weights[j] * f(mid + hal * rule.nodes[j]);
        s *= hal;
        if (have_prev && abs(s - prev) <= tol_abs) return s;
        prev = s;
        have_prev = true;
    }
    throw QuadratureError("gauss_legendre: no convergence at " +
                          std::to_string(node_cap) + " nodes");
}

} // namespace cdop::quad
