#include "cdop/oracle.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "cdop/errors.hpp"
#include "cdop/specfun.hpp"

namespace cdop::oracle {

namespace {

constexpr unsigned kPartitionCap = 30;

// Real from an exact integer.
Real real_of(const mpz_class& n, const PrecisionContext& ctx) {
    return ctx.make(n.get_str());
}

Real real_of(const mpq_class& q, const PrecisionContext& ctx) {
    return real_of(q.get_num(), ctx) / real_of(q.get_den(), ctx);
}

mpz_class factorial(unsigned n) {
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), n);
    return f;
}

void emit_partitions(unsigned remaining, unsigned max_part, std::vector<unsigned>& acc,
                     std::vector<Partition>& out) {
    if (remaining == 0) {
        out.emplace_back(acc);
        return;
    }
    for (unsigned p = std::min(remaining, max_part); p >= 1; --p) {
        acc.push_back(p);
        emit_partitions(remaining - p, p, acc, out);
        acc.pop_back();
    }
}

// Conjugate partition column lengths, needed for hook lengths.
std::vector<unsigned> conjugate(const Partition& lam) {
    std::vector<unsigned> c(lam.parts.empty() ? 0 : lam.parts[0], 0);
    for (unsigned part : lam.parts)
        for (unsigned j = 0; j < part; ++j) ++c[j];
    return c;
}

}  // namespace

std::vector<Partition> enumerate_partitions(unsigned max_size) {
    if (max_size > kPartitionCap)
        throw GuardError("enumerate_partitions: max_size exceeds the cap of 30");
    std::vector<Partition> out;
    std::vector<unsigned> acc;
    for (unsigned n = 0; n <= max_size; ++n) emit_partitions(n, n, acc, out);
    return out;
}

mpz_class partition_count(unsigned n) {
    // Euler's pentagonal-number recurrence.
    static std::vector<mpz_class> cache{1};
    for (unsigned m = cache.size(); m <= n; ++m) {
        mpz_class total = 0;
        for (long j = 1;; ++j) {
            long g1 = j * (3 * j - 1) / 2;
            long g2 = j * (3 * j + 1) / 2;
            if (g1 > static_cast<long>(m)) break;
            long sign = (j % 2 == 1) ? 1 : -1;
            total += sign * cache[m - g1];
            if (g2 <= static_cast<long>(m)) total += sign * cache[m - g2];
        }
        cache.push_back(total);
    }
    return cache[n];
}

mpz_class partition_dim(const Partition& lam) {
    mpz_class dim = factorial(lam.size());
    std::vector<unsigned> conj = conjugate(lam);
    for (size_t i = 0; i < lam.parts.size(); ++i) {
        for (unsigned j = 0; j < lam.parts[i]; ++j) {
            unsigned hook = lam.parts[i] - j + conj[j] - static_cast<unsigned>(i) - 1;
            mpz_divexact_ui(dim.get_mpz_t(), dim.get_mpz_t(), hook);
        }
    }
    return dim;
}

mpz_class partition_dim_syt(const Partition& lam) {
    if (lam.size() > 8)
        throw GuardError("partition_dim_syt: enumeration route capped at |lambda| <= 8");
    // dim(lambda) = sum over removable corners of dim(lambda minus corner).
    std::map<std::vector<unsigned>, mpz_class> memo;
    auto rec = [&](auto&& self, const std::vector<unsigned>& parts) -> mpz_class {
        if (parts.empty()) return 1;
        auto it = memo.find(parts);
        if (it != memo.end()) return it->second;
        mpz_class total = 0;
        for (size_t i = 0; i < parts.size(); ++i) {
            bool corner = (i + 1 == parts.size()) || (parts[i] > parts[i + 1]);
            if (!corner) continue;
            std::vector<unsigned> sub = parts;
            if (sub[i] == 1)
                sub.erase(sub.begin() + static_cast<long>(i));
            else
                --sub[i];
            total += self(self, sub);
        }
        memo.emplace(parts, total);
        return total;
    };
    return rec(rec, lam.parts);
}

mpq_class plancherel_level_mass(unsigned n) {
    std::vector<Partition> all = enumerate_partitions(n);
    mpz_class sq = 0;
    for (const Partition& lam : all) {
        if (lam.size() != n) continue;
        mpz_class d = partition_dim(lam);
        sq += d * d;
    }
    mpq_class mass(sq, factorial(n));
    mass.canonicalize();
    return mass;
}

std::vector<Real> config_of_partition(const Partition& lam, ShiftConvention conv, long N,
                                      const Real& lo, const Real& hi,
                                      const PrecisionContext& ctx) {
    if (!(lo <= hi)) throw ConfigError("config_of_partition: empty window");
    std::vector<Real> out;
    auto push = [&](const Real& p) {
        if (lo <= p && p <= hi) out.push_back(p);
    };
    switch (conv) {
        case ShiftConvention::NShift: {
            if (static_cast<long>(lam.length()) > N)
                throw ConfigError("config_of_partition: partition longer than N");
            for (long i = 1; i <= N; ++i)
                push(ctx.make(static_cast<long>(lam.part(static_cast<size_t>(i - 1))) - i + N));
            break;
        }
        case ShiftConvention::ZShift:
        case ShiftConvention::HalfIntShift: {
            Real half = conv == ShiftConvention::HalfIntShift ? ctx.make(0.5) : ctx.zero();
            // Rows below the length contribute the frozen tail -i (+1/2); stop
            // once the points fall below the window.
            for (long i = 1;; ++i) {
                Real p = ctx.make(static_cast<long>(lam.part(static_cast<size_t>(i - 1))) - i) + half;
                if (static_cast<size_t>(i) > lam.length() && p < lo) break;
                push(p);
            }
            break;
        }
    }
    return out;
}

namespace {

// p in { lambda_i - i : i >= 1 } (the infinite descending configuration).
bool member_zshift(const Partition& lam, long p) {
    for (size_t i = 0; i < lam.length(); ++i)
        if (static_cast<long>(lam.parts[i]) - static_cast<long>(i) - 1 == p) return true;
    return p < 0 && static_cast<size_t>(-p) > lam.length();
}

}  // namespace

BruteResult brute_plancherel_corr(const Real& alpha, const std::vector<long>& points,
                                  unsigned cutoff, const PrecisionContext& ctx) {
    if (!(alpha > ctx.zero())) throw ConfigError("brute_plancherel_corr: alpha must be > 0");
    std::vector<Partition> all = enumerate_partitions(cutoff);
    Real value = ctx.zero();
    Real mass = ctx.zero();  // truncated Poisson mass, for the tail certificate
    Real expma = exp(-alpha);
    for (const Partition& lam : all) {
        unsigned n = lam.size();
        Real dim_over_fact = real_of(partition_dim(lam), ctx) / real_of(factorial(n), ctx);
        Real w = expma * pow_si(alpha, n) * dim_over_fact * dim_over_fact;
        mass = mass + w;
        bool member = true;
        for (long p : points)
            if (!member_zshift(lam, p)) {
                member = false;
                break;
            }
        if (member) value = value + w;
    }
    return BruteResult{value, ctx.one() - mass};
}

BruteResult brute_zmeasure_corr(const kernels::ZParams& zp, const std::vector<Real>& points,
                                unsigned cutoff, const ZDeform* deform,
                                const PrecisionContext& ctx) {
    if (deform)
        for (const Real& u : deform->u) {
            Real t = u + u;
            if (abs(t - round(t)) < ctx.make(1e-9) && round(t).to_long() % 2 != 0)
                throw ConfigError("brute_zmeasure_corr: deformation point on the half-integer lattice");
        }
    for (const Real& p : points) {
        Real t = p + p;  // points must lie on Z + 1/2, i.e. 2p odd
        if (abs(t - round(t)) > ctx.tol_rel() || round(t).to_long() % 2 == 0)
            throw ConfigError("brute_zmeasure_corr: points must be proper half-integers");
    }
    std::vector<Partition> all = enumerate_partitions(cutoff);
    Real imag_tol = pow(ctx.make(2.0), ctx.make(-static_cast<double>(ctx.mantissa_bits) / 2));
    Real value = ctx.zero();
    Real norm = ctx.zero();
    for (const Partition& lam : all) {
        unsigned n = lam.size();
        // Unnormalized weight: xi^|lambda| (z)_lambda (z')_lambda (dim/|lambda|!)^2
        // times the deformation factor; (1-xi)^{zz'} cancels against the
        // truncated normalization.
        Complex poch = specfun::gen_pochhammer(zp.z, lam) * specfun::gen_pochhammer(zp.zp, lam);
        if (abs(poch.im) > imag_tol * (ctx.one() + abs(poch.re)))
            throw BranchError("brute_zmeasure_corr: non-real Pochhammer product");
        Real dim_over_fact = real_of(partition_dim(lam), ctx) / real_of(factorial(n), ctx);
        Real w = pow_si(zp.xi, n) * poch.re * dim_over_fact * dim_over_fact;
        if (deform) {
            // Vacuum-regularized squared characteristic polynomial of the
            // configuration: rows beyond l(lambda) contribute exactly 1.
            Real factor = ctx.one();
            for (size_t j = 0; j < lam.length(); ++j) {
                Real xj = ctx.make(static_cast<long>(lam.parts[j]) - static_cast<long>(j) - 1) +
                          ctx.make(0.5);
                Real vac = ctx.make(0.5) - ctx.make(static_cast<long>(j) + 1);
                for (const Real& u : deform->u) {
                    Real ratio = (xj - u) / (vac - u);
                    factor = factor * ratio * ratio;
                }
            }
            if (!(factor > ctx.zero()))
                throw NonPositiveWeightError(
                    "brute_zmeasure_corr: deformation factor non-positive at a partition");
            w = w * factor;
        }
        norm = norm + w;
        bool member = true;
        for (const Real& p : points) {
            bool found = false;
            for (size_t i = 0; i < lam.length(); ++i)
                if (abs(ctx.make(static_cast<long>(lam.parts[i]) - static_cast<long>(i) - 1) +
                        ctx.make(0.5) - p) < ctx.make(0.25)) {
                    found = true;
                    break;
                }
            if (!found) {
                // Frozen tail: p = 1/2 - i for some i > l(lambda).
                long i = (ctx.make(0.5) - p).to_long();
                found = p < ctx.zero() && static_cast<size_t>(i) > lam.length();
            }
            if (!found) {
                member = false;
                break;
            }
        }
        if (member) value = value + w;
    }
    if (!(abs(norm) > ctx.zero()))
        throw DivergenceError("brute_zmeasure_corr: vanishing truncated normalization");
    // Exact remainder mass of the undeformed measure: the level masses sum to
    // (zz')_n / n!, zz' is real for every admissible parameter choice, and the
    // total mass is (1-xi)^{-zz'}, so the neglected mass beyond the cutoff is
    // 1 - (1-xi)^{zz'} sum_{n<=cutoff} (zz')_n xi^n / n!. This certifies the
    // raw truncation, not a sharp bound for the normalized (or deformed) ratio.
    Real rezz = (zp.z * zp.zp).re;
    Real trunc_mass = ctx.zero();
    Real term = ctx.one();
    for (unsigned n = 0; n <= cutoff; ++n) {
        trunc_mass = trunc_mass + term;
        term = term * (rezz + ctx.make(static_cast<long>(n))) * zp.xi /
               ctx.make(static_cast<long>(n) + 1L);
    }
    Real tail = ctx.one() - pow(ctx.one() - zp.xi, rezz) * trunc_mass;
    return BruteResult{value / norm, abs(tail)};
}

OpeSampler::OpeSampler(const christoffel::EnsembleSpec& spec, long truncation,
                       const PrecisionContext& ctx)
    : n_points_(spec.N) {
    if (truncation < spec.N)
        throw ConfigError("OpeSampler: truncation below the number of points");
    KernelHandle kern = christoffel::deformed_kernel(spec, ctx);
    size_t m = static_cast<size_t>(truncation) + 1;
    kmat_.assign(m, std::vector<double>(m, 0.0));
    for (size_t x = 0; x < m; ++x) {
        Real rx = ctx.make(static_cast<long>(x));
        for (size_t y = x; y < m; ++y) {
            double v = kern(rx, ctx.make(static_cast<long>(y))).to_double();
            kmat_[x][y] = v;
            kmat_[y][x] = v;
        }
    }
    trace_ = 0.0;
    for (size_t x = 0; x < m; ++x) trace_ += kmat_[x][x];
    if (std::abs(trace_ - static_cast<double>(n_points_)) > 1e-6)
        throw TruncationError("OpeSampler: kernel trace differs from N; enlarge the truncation");
}

std::vector<long> OpeSampler::sample(unsigned long long seed) const {
    std::mt19937_64 rng(seed);
    // Explicit 53-bit uniform; the distribution classes are not portable
    // across standard library implementations.
    auto uniform = [&rng]() {
        return static_cast<double>(rng() >> 11) * 0x1.0p-53;
    };
    std::vector<std::vector<double>> k = kmat_;
    size_t m = k.size();
    std::vector<long> picked;
    for (long step = 0; step < n_points_; ++step) {
        double remaining = static_cast<double>(n_points_ - step);
        double u = uniform() * remaining;
        size_t chosen = m;  // cumulative inversion of the marginal density
        double acc = 0.0;
        for (size_t x = 0; x < m; ++x) {
            acc += std::max(k[x][x], 0.0);
            if (u < acc) {
                chosen = x;
                break;
            }
        }
        if (chosen == m)
            throw TruncationError("OpeSampler: marginal mass exhausted before a draw");
        double pivot = k[chosen][chosen];
        if (pivot <= 0.0) throw TruncationError("OpeSampler: non-positive pivot");
        // Project out the chosen point (Schur complement update).
        std::vector<double> col(m);
        for (size_t x = 0; x < m; ++x) col[x] = k[x][chosen];
        for (size_t x = 0; x < m; ++x)
            for (size_t y = 0; y < m; ++y) k[x][y] -= col[x] * col[y] / pivot;
        double tr = 0.0;
        for (size_t x = 0; x < m; ++x) tr += k[x][x];
        if (std::abs(tr - (remaining - 1.0)) > 1e-9)
            throw TruncationError("OpeSampler: renormalization drift during sampling");
        picked.push_back(static_cast<long>(chosen));
    }
    std::sort(picked.begin(), picked.end());
    for (size_t i = 1; i < picked.size(); ++i)
        if (picked[i] == picked[i - 1])
            throw TruncationError("OpeSampler: repeated point in a projection sample");
    return picked;
}

std::vector<long> sample_ope(const christoffel::EnsembleSpec& spec, unsigned long long seed,
                             long truncation, const PrecisionContext& ctx) {
    return OpeSampler(spec, truncation, ctx).sample(seed);
}

}  // namespace cdop::oracle
