#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <vector>

#include "cdop/christoffel.hpp"
#include "cdop/kernels.hpp"
#include "cdop/oracle.hpp"
#include "cdop/orthopoly.hpp"

using namespace cdop;
using namespace cdop::oracle;

namespace {

const PrecisionContext ctx256{};

Real rl(double d) { return ctx256.make(d); }

bool close_abs(const Real& a, const Real& b, double tol) {
    return abs(a - b) < Real(tol, ctx256.prec());
}

}  // namespace

TEST_CASE("partition enumeration: counts, order, guard") {
    CHECK(enumerate_partitions(0).size() == 1);   // the empty partition
    CHECK(enumerate_partitions(4).size() == 12);  // 1+1+2+3+5
    CHECK(enumerate_partitions(10).size() == 139);
    CHECK_THROWS_AS(enumerate_partitions(31), GuardError);

    // cross-check against the pentagonal-number recurrence
    std::vector<Partition> all = enumerate_partitions(12);
    std::map<unsigned, unsigned> by_size;
    for (const Partition& lam : all) ++by_size[lam.size()];
    mpz_class total = 0;
    for (unsigned n = 0; n <= 12; ++n) {
        CHECK(mpz_class(by_size[n]) == partition_count(n));
        total += partition_count(n);
    }
    CHECK(mpz_class(static_cast<unsigned long>(all.size())) == total);
    CHECK(partition_count(30) == mpz_class(5604));
}

TEST_CASE("dimension: hook lengths against tableau enumeration") {
    CHECK(partition_dim(Partition{}) == 1);
    CHECK(partition_dim(Partition{2, 1}) == 2);
    CHECK(partition_dim(Partition{3, 2}) == 5);

    mpz_class sq = 0;
    for (const Partition& lam : enumerate_partitions(5)) {
        if (lam.size() != 5) continue;
        mpz_class d = partition_dim(lam);
        sq += d * d;
    }
    CHECK(sq == mpz_class(120));  // 5!

    for (const Partition& lam : enumerate_partitions(8))
        CHECK(partition_dim(lam) == partition_dim_syt(lam));
    CHECK_THROWS_AS(partition_dim_syt(Partition{9}), GuardError);
}

TEST_CASE("Plancherel level masses are exactly one") {
    for (unsigned n = 0; n <= 10; ++n) CHECK(plancherel_level_mass(n) == mpq_class(1));
}

TEST_CASE("shift conventions of a partition configuration") {
    Real lo = rl(-5.0), hi = rl(5.0);

    std::vector<Real> empty_z =
        config_of_partition(Partition{}, ShiftConvention::ZShift, 0, lo, hi, ctx256);
    REQUIRE(empty_z.size() == 5);
    for (long i = 0; i < 5; ++i) CHECK(empty_z[static_cast<size_t>(i)] == rl(-1.0 - i));

    std::vector<Real> nshift =
        config_of_partition(Partition{3, 1}, ShiftConvention::NShift, 2, rl(-100.0), rl(100.0), ctx256);
    REQUIRE(nshift.size() == 2);
    CHECK(nshift[0] == rl(4.0));
    CHECK(nshift[1] == rl(1.0));
    CHECK_THROWS_AS(
        config_of_partition(Partition{3, 1}, ShiftConvention::NShift, 1, lo, hi, ctx256),
        ConfigError);

    std::vector<Real> half =
        config_of_partition(Partition{3, 1}, ShiftConvention::HalfIntShift, 0, rl(-3.5), rl(3.5), ctx256);
    REQUIRE(half.size() == 4);  // the frozen point -3.5 sits on the window edge
    CHECK(half[0] == rl(2.5));
    CHECK(half[1] == rl(-0.5));
    CHECK(half[2] == rl(-2.5));
    CHECK(half[3] == rl(-3.5));
}

TEST_CASE("brute Plancherel sums: normalization and small-alpha concentration") {
    Real alpha = rl(0.5);
    BruteResult norm = brute_plancherel_corr(alpha, {}, 14, ctx256);
    // with no points imposed the truncated sum is the truncated Poisson mass
    CHECK(close_abs(norm.value + norm.tail, rl(1.0), 1e-60));
    CHECK(norm.tail < rl(1e-12));
    CHECK(norm.tail > rl(0.0));

    // alpha -> 0: the configuration freezes at { -1, -2, ... }
    BruteResult frozen = brute_plancherel_corr(rl(1e-6), {-1L, -2L}, 6, ctx256);
    CHECK(abs(frozen.value - rl(1.0)) < rl(1e-5));
    BruteResult excited = brute_plancherel_corr(rl(1e-6), {0L}, 6, ctx256);
    CHECK(excited.value < rl(2e-6));
}

TEST_CASE("brute Plancherel correlations match discrete Bessel minors") {
    Real alpha = rl(0.5);
    KernelHandle K = kernels::discrete_bessel_kernel(alpha, ctx256);
    std::vector<long> pts = {1L, -2L};
    BruteResult r = brute_plancherel_corr(alpha, pts, 14, ctx256);

    Real k11 = K(rl(1.0), rl(1.0)), k12 = K(rl(1.0), rl(-2.0)), k22 = K(rl(-2.0), rl(-2.0));
    Real det = k11 * k22 - k12 * k12;
    CHECK(abs(r.value - det) < r.tail + rl(1e-8));

    // one-point density as well
    for (long p : {0L, -1L, 2L}) {
        BruteResult r1 = brute_plancherel_corr(alpha, {p}, 14, ctx256);
        CHECK(abs(r1.value - K(rl(double(p)), rl(double(p)))) < r1.tail + rl(1e-8));
    }
}

TEST_CASE("brute z-measure sums match the hypergeometric kernel minors") {
    kernels::ZParams zp = kernels::ZParams::make(ctx256.makec(0.2), ctx256.makec(0.6),
                                                 rl(0.2), ctx256);
    KernelHandle K = kernels::zmeas_deformed_kernel(zp, {}, ctx256);

    BruteResult norm = brute_zmeasure_corr(zp, {}, 18, nullptr, ctx256);
    CHECK(close_abs(norm.value, rl(1.0), 1e-40));  // empty condition: exactly norm/norm

    for (double p : {0.5, -0.5, 1.5}) {
        BruteResult r = brute_zmeasure_corr(zp, {rl(p)}, 18, nullptr, ctx256);
        CHECK(abs(r.value - K(rl(p), rl(p))) < r.tail + rl(1e-8));
    }
    {
        BruteResult r = brute_zmeasure_corr(zp, {rl(0.5), rl(-1.5)}, 18, nullptr, ctx256);
        Real k11 = K(rl(0.5), rl(0.5)), k12 = K(rl(0.5), rl(-1.5)), k22 = K(rl(-1.5), rl(-1.5));
        CHECK(abs(r.value - (k11 * k22 - k12 * k12)) < r.tail + rl(1e-8));
    }
    CHECK_THROWS_AS(brute_zmeasure_corr(zp, {rl(0.7)}, 10, nullptr, ctx256), ConfigError);
}

TEST_CASE("brute deformed z-measure matches the deformed kernel minors") {
    // principal-series one-point deformation
    kernels::ZParams zp = kernels::ZParams::make(ctx256.makec(0.3, 0.4), ctx256.makec(0.3, -0.4),
                                                 rl(0.2), ctx256);
    ZDeform d{{rl(0.2)}};
    KernelHandle K = kernels::zmeas_deformed_kernel(zp, d.u, ctx256);

    for (double p : {0.5, -1.5, 2.5}) {
        BruteResult r = brute_zmeasure_corr(zp, {rl(p)}, 18, &d, ctx256);
        CHECK(abs(r.value - K(rl(p), rl(p))) < rl(50.0) * r.tail + rl(1e-8));
    }
    {
        BruteResult r = brute_zmeasure_corr(zp, {rl(0.5), rl(1.5)}, 18, &d, ctx256);
        Real k11 = K(rl(0.5), rl(0.5)), k12 = K(rl(0.5), rl(1.5)), k22 = K(rl(1.5), rl(1.5));
        CHECK(abs(r.value - (k11 * k22 - k12 * k12)) < rl(50.0) * r.tail + rl(1e-8));
    }
}

TEST_CASE("brute degenerate z-measure equals Meixner ensemble correlations") {
    long N = 3;
    Real beta = rl(1.5), xi = rl(0.2);
    kernels::ZParams zp = kernels::ZParams::make(ctx256.makec(3.0), ctx256.makec(3.5),
                                                 xi, ctx256);
    christoffel::EnsembleSpec spec{orthopoly::WeightFamily::meixner(beta, xi), N,
                                   christoffel::DeformationSpec::make({})};
    KernelHandle Km = christoffel::ope_kernel(spec, ctx256);

    // configuration maps via x_tilde = p + N - 1/2
    for (double p : {0.5, -0.5, 1.5}) {
        BruteResult r = brute_zmeasure_corr(zp, {rl(p)}, 16, nullptr, ctx256);
        Real xt = rl(p + N - 0.5);
        CHECK(abs(r.value - Km(xt, xt)) < rl(10.0) * r.tail + rl(1e-8));
    }
    // below the frozen edge the particle is deterministic
    BruteResult deep = brute_zmeasure_corr(zp, {rl(0.5 - N - 1)}, 16, nullptr, ctx256);
    CHECK(close_abs(deep.value, rl(1.0), 1e-8));
}

TEST_CASE("sampler: exact one-point law and determinism") {
    christoffel::EnsembleSpec spec{orthopoly::WeightFamily::charlier(rl(1.0)), 1,
                                   christoffel::DeformationSpec::make({})};
    OpeSampler sampler(spec, 40, ctx256);
    CHECK(std::abs(sampler.trace() - 1.0) < 1e-6);

    // N = 1: the law is K(x,x) itself; compare empirical frequencies
    const unsigned kDraws = 20000;
    std::map<long, unsigned> hist;
    for (unsigned i = 0; i < kDraws; ++i) {
        std::vector<long> s = sampler.sample(1000 + i);
        REQUIRE(s.size() == 1);
        ++hist[s[0]];
    }
    KernelHandle K = christoffel::ope_kernel(spec, ctx256);
    for (long x = 0; x <= 5; ++x) {
        double expect = K(rl(double(x)), rl(double(x))).to_double();
        double got = double(hist[x]) / kDraws;
        double sigma = std::sqrt(expect * (1.0 - expect) / kDraws);
        CHECK(std::abs(got - expect) < 4.5 * sigma + 1e-9);
    }

    // byte-identical reruns from the same seed
    std::vector<long> a = sampler.sample(42), b = sampler.sample(42);
    CHECK(a == b);
    CHECK(sample_ope(spec, 42, 40, ctx256) == a);
}

TEST_CASE("sampler: N = 3 ensembles, plain and deformed") {
    christoffel::EnsembleSpec plain{orthopoly::WeightFamily::charlier(rl(2.0)), 3,
                                    christoffel::DeformationSpec::make({})};
    christoffel::EnsembleSpec deformed{orthopoly::WeightFamily::charlier(rl(2.0)), 3,
                                       christoffel::DeformationSpec::make({rl(0.3)})};
    for (const auto& spec : {plain, deformed}) {
        OpeSampler sampler(spec, 50, ctx256);
        std::map<long, unsigned> hist;
        const unsigned kDraws = 2000;
        for (unsigned i = 0; i < kDraws; ++i) {
            std::vector<long> s = sampler.sample(7000 + i);
            REQUIRE(s.size() == 3);
            CHECK(s[0] < s[1]);
            CHECK(s[1] < s[2]);
            for (long p : s) ++hist[p];
        }
        // marginal intensity at each site is the kernel diagonal
        KernelHandle Kd = christoffel::deformed_kernel(spec, ctx256);
        for (long x = 0; x <= 6; ++x) {
            double expect = Kd(rl(double(x)), rl(double(x))).to_double();
            double got = double(hist[x]) / kDraws;
            double sigma = std::sqrt(expect * (1.0 - expect) / kDraws);
            CHECK(std::abs(got - expect) < 4.5 * sigma + 1e-9);
        }
    }
    CHECK_THROWS_AS(OpeSampler(plain, 2, ctx256), ConfigError);
    CHECK_THROWS_AS(OpeSampler(plain, 4, ctx256), TruncationError);
}
