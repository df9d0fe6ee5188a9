#include "cdop/verify.hpp"

#include <cmath>
#include <cstdlib>
#include <utility>

#include "cdop/christoffel.hpp"
#include "cdop/errors.hpp"
#include "cdop/kernels.hpp"
#include "cdop/oracle.hpp"
#include "cdop/orthopoly.hpp"
#include "cdop/specfun.hpp"

namespace cdop::verify {

namespace {

namespace sf = cdop::specfun;
namespace op = cdop::orthopoly;
namespace ch = cdop::christoffel;
namespace kr = cdop::kernels;
namespace oa = cdop::oracle;

struct Runner {
    const PrecisionContext& ctx;
    unsigned fuzz_bits;
    std::vector<CheckResult> out;

    // Relative input perturbation used as a negative control.
    Real fz(const Real& x) const {
        if (fuzz_bits == 0) return x;
        return x * (ctx.one() + Real::pow2(-static_cast<long>(fuzz_bits), ctx.prec()));
    }

    void record(const std::string& suite, const std::string& name, const Real& residual,
                double tolerance) {
        double r = abs(residual).to_double();
        out.push_back({suite, name, r, tolerance, r <= tolerance});
    }

    void specfun_suite() {
        const std::string s = "specfun";
        Real x = fz(ctx.make(0.3));
        Real refl = sf::gamma_fn(x) * sf::gamma_fn(ctx.one() - ctx.make(0.3)) * sf::sin_pi(x) /
                        Real::pi(ctx.prec()) -
                    ctx.one();
        record(s, "gamma reflection at 0.3", refl, 1e-70);

        Real y = fz(ctx.make(1.7));
        record(s, "digamma recurrence at 1.7",
               sf::digamma(y + ctx.one()) - sf::digamma(ctx.make(1.7)) - ctx.one() / ctx.make(1.7),
               1e-70);

        Real a = fz(ctx.make(0.7));
        Real poch = sf::pochhammer(a, 6) -
                    sf::gamma_fn(ctx.make(0.7) + ctx.make(6L)) / sf::gamma_fn(ctx.make(0.7));
        record(s, "pochhammer vs gamma ratio", poch / sf::gamma_fn(ctx.make(6.7)), 1e-70);

        // Terminating 2F1 against the explicit finite sum.
        Complex b = ctx.makec(0.5), c = ctx.makec(1.2);
        Real t = ctx.make(-0.4);
        Complex series = sf::hyp2F1_neg(ctx.makec(-3.0), b, c, fz(t), ctx);
        Complex direct = ctx.makec(1.0);
        Complex term = ctx.makec(1.0);
        for (long n = 0; n < 3; ++n) {
            Complex num = (ctx.makec(-3.0) + ctx.makec(double(n))) * (b + ctx.makec(double(n)));
            term = term * num * Complex(t) / ((c + ctx.makec(double(n))) * ctx.makec(double(n + 1)));
            direct = direct + term;
        }
        record(s, "terminating 2F1 vs finite sum",
               abs((series - direct).re) + abs((series - direct).im), 1e-70);

        // The batch integer-argument evaluation against the single-point path.
        sf::BesselParams bp(fz(ctx.make(1.0)), ctx.one());
        std::vector<Real> batch = sf::bessel_J_int_batch(-2, 2, ctx.make(1.0), ctx);
        Real worst = ctx.zero();
        for (long m = -2; m <= 2; ++m)
            worst = max(worst,
                        abs(batch[static_cast<size_t>(m + 2)] - sf::bessel_J(ctx.make(m), bp, ctx)));
        record(s, "bessel batch vs single-point", worst, 1e-60);
    }

    void orthopoly_suite() {
        const std::string s = "orthopoly";
        Real a = fz(ctx.make(1.5));
        op::WeightFamily cw = op::WeightFamily::charlier(a);
        long X = op::truncation_index(cw, 8, ctx);
        Real off = ctx.zero(), diag = ctx.zero();
        for (long n = 0; n <= 4; ++n)
            for (long m = 0; m <= 4; ++m) {
                Real g = ctx.zero();
                for (long x = 0; x <= X; ++x)
                    g = g + op::charlier_eval(n, ctx.make(x), a, ctx) *
                                op::charlier_eval(m, ctx.make(x), a, ctx) * op::weight_at(cw, x, ctx);
                if (n == m)
                    diag = max(diag, abs(g - op::squared_norm(cw, n, ctx)));
                else
                    off = max(off, abs(g));
            }
        record(s, "charlier gram off-diagonal", off, 1e-60);
        record(s, "charlier gram diagonal vs norm formula", diag, 1e-60);

        Real beta = ctx.make(1.5), xi = fz(ctx.make(0.3));
        op::WeightFamily mw = op::WeightFamily::meixner(beta, ctx.make(0.3));
        long Xm = op::truncation_index(mw, 7, ctx);
        Real g33 = ctx.zero();
        for (long x = 0; x <= Xm; ++x) {
            Real v = op::meixner_eval(3, ctx.make(x), beta, xi, ctx);
            g33 = g33 + v * v * op::weight_at(mw, x, ctx);
        }
        record(s, "meixner norm vs direct sum", g33 / op::squared_norm(mw, 3, ctx) - ctx.one(),
               1e-55);
    }

    void christoffel_suite() {
        const std::string s = "christoffel";
        op::WeightFamily w = op::WeightFamily::charlier(ctx.make(1.0));
        ch::DeformationSpec d = ch::DeformationSpec::make({fz(ctx.make(0.3))});
        long X = ch::support_truncation(w, d, 10, ctx);

        // Orthogonality of the deformed monic polynomials under w^k.
        Real dot = ctx.zero(), q4 = ctx.zero();
        for (long x = 0; x <= X; ++x) {
            Real wx = ch::deformed_weight(w, d, x, ctx);
            Real p2 = ch::deformed_monic(w, d, 2, ctx.make(x), ctx);
            Real p4 = ch::deformed_monic(w, d, 4, ctx.make(x), ctx);
            dot = dot + p2 * p4 * wx;
            q4 = q4 + p4 * p4 * wx;
        }
        record(s, "deformed monic orthogonality (2,4)", dot / q4, 1e-55);
        record(s, "deformed norm vs direct sum", q4 / ch::deformed_norm(w, d, 4, ctx) - ctx.one(),
               1e-55);

        // Rank-N projection identities of the deformed correlation kernel.
        ch::EnsembleSpec spec{w, 2, d};
        KernelHandle K = ch::deformed_kernel(spec, ctx);
        long Xk = ch::support_truncation(w, d, 2 * (spec.N - 1), ctx);
        Real trace = ctx.zero(), proj = ctx.zero();
        Real x0 = ctx.make(1L), y0 = ctx.make(3L);
        for (long t = 0; t <= Xk; ++t) {
            trace = trace + K(ctx.make(t), ctx.make(t));
            proj = proj + K(x0, ctx.make(t)) * K(ctx.make(t), y0);
        }
        record(s, "deformed kernel trace equals N", trace - ctx.make(2L), 1e-50);
        record(s, "deformed kernel projection identity", proj - K(x0, y0), 1e-50);
    }

    void kernels_suite() {
        const std::string s = "kernels";
        kr::ZParams zp = kr::ZParams::make(ctx.makec(0.2), ctx.makec(0.6), ctx.make(0.3), ctx);
        kr::HalfInt a{1};
        Real x = fz(ctx.make(2.5));
        Complex ps = kr::psi(a, x, zp, ctx);
        Complex pc = kr::psi_integral(a, ctx.make(2.5), zp, ctx);
        record(s, "psi series vs contour integral", abs((ps - pc).re) + abs((ps - pc).im), 1e-25);

        Complex psw = kr::psi(a, x, zp.swapped(), ctx);
        record(s, "psi parameter-swap symmetry", abs((ps - psw).re) + abs((ps - psw).im), 1e-40);

        KernelHandle Kz = kr::zmeas_deformed_kernel(zp, {fz(ctx.make(0.2))}, ctx);
        Real u = ctx.make(0.5), v = ctx.make(-1.5);
        record(s, "deformed z-measure kernel symmetry", Kz(u, fz(v)) - Kz(v, u), 1e-40);

        kr::GammaDeformParams gp = kr::GammaDeformParams::make(zp, ctx.make(0.2), ctx);
        KernelHandle Kg = kr::gamma_deformed_kernel(gp, ctx);
        Real gx = ctx.make(0.4), gy = ctx.make(1.1);
        record(s, "deformed gamma kernel symmetry", Kg(fz(gx), gy) - Kg(gy, gx), 1e-35);

        KernelHandle Kb = kr::discrete_bessel_kernel(fz(ctx.make(0.5)), ctx);
        record(s, "discrete bessel kernel symmetry",
               Kb(ctx.make(1L), ctx.make(-2L)) - Kb(ctx.make(-2L), ctx.make(1L)), 1e-60);
    }

    void oracle_suite() {
        const std::string s = "oracle";
        bool masses_ok = true;
        for (unsigned n = 0; n <= 8; ++n)
            if (oa::plancherel_level_mass(n) != mpq_class(1)) masses_ok = false;
        record(s, "plancherel level masses", masses_ok ? ctx.zero() : ctx.one(), 0.0);

        Real alpha = fz(ctx.make(0.5));
        KernelHandle K = kr::discrete_bessel_kernel(ctx.make(0.5), ctx);
        oa::BruteResult r = oa::brute_plancherel_corr(alpha, {0L}, 12, ctx);
        record(s, "brute plancherel vs bessel one-point", r.value - K(ctx.zero(), ctx.zero()),
               r.tail.to_double() + 1e-8);

        ch::EnsembleSpec spec{op::WeightFamily::charlier(ctx.make(1.0)), 2,
                              ch::DeformationSpec::make({})};
        std::vector<long> s1 = oa::sample_ope(spec, 12345u + fuzz_bits, 30, ctx);
        std::vector<long> s2 = oa::sample_ope(spec, 12345u + fuzz_bits, 30, ctx);
        Real det = ctx.zero();
        for (size_t i = 0; i < s1.size(); ++i) det = det + ctx.make(std::labs(s1[i] - s2[i]));
        record(s, "sampler seeded determinism", det, 0.0);
    }
};

}  // namespace

std::vector<CheckResult> run_suite(const std::string& suite, const PrecisionContext& ctx,
                                   unsigned fuzz_bits) {
    Runner r{ctx, fuzz_bits, {}};
    bool all = suite == "all";
    bool known = all;
    if (all || suite == "specfun") r.specfun_suite(), known = true;
    if (all || suite == "orthopoly") r.orthopoly_suite(), known = true;
    if (all || suite == "christoffel") r.christoffel_suite(), known = true;
    if (all || suite == "kernels") r.kernels_suite(), known = true;
    if (all || suite == "oracle") r.oracle_suite(), known = true;
    if (!known) throw ConfigError("run_suite: unknown suite '" + suite + "'");
    return std::move(r.out);
}

}  // namespace cdop::verify
