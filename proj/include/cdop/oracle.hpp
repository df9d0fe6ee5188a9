#pragma once

#include <gmpxx.h>

#include <vector>

#include "cdop/christoffel.hpp"
#include "cdop/kernels.hpp"
#include "cdop/partition.hpp"
#include "cdop/prec.hpp"

namespace cdop::oracle {

// All partitions with |lambda| <= max_size in a fixed deterministic order
// (by size, then lexicographically decreasing parts). Guarded at 30.
std::vector<Partition> enumerate_partitions(unsigned max_size);

// Number of partitions of n (exact).
mpz_class partition_count(unsigned n);

// dim(lambda) = number of standard Young tableaux, hook-length formula.
mpz_class partition_dim(const Partition& lam);
// Independent route: corner-removal recursion, guarded at |lambda| <= 8.
mpz_class partition_dim_syt(const Partition& lam);
// sum over |lambda| = n of dim^2 / n!, exact rational (equals 1).
mpq_class plancherel_level_mass(unsigned n);

// The three embeddings of a partition into a point configuration.
enum class ShiftConvention {
    ZShift,       // { lambda_i - i : i >= 1 } on Z, window-truncated
    NShift,       // { lambda_i - i + N : i = 1..N }
    HalfIntShift  // { lambda_i - i + 1/2 : i >= 1 } on Z', window-truncated
};
std::vector<Real> config_of_partition(const Partition& lam, ShiftConvention conv, long N,
                                      const Real& lo, const Real& hi,
                                      const PrecisionContext& ctx);

struct BruteResult {
    Real value;
    Real tail;  // conservative bound on the neglected truncation remainder
};

// Correlation of the poissonized Plancherel measure by direct summation over
// |lambda| <= cutoff; points live on Z. The tail is the exact neglected
// Poisson mass.
BruteResult brute_plancherel_corr(const Real& alpha, const std::vector<long>& points,
                                  unsigned cutoff, const PrecisionContext& ctx);

// Christoffel-type deformation of the z-measure at points u_i off the
// half-integer lattice (the paired second list v_i = u_i + z' - z - 1/2 is
// implied; with that pairing the per-row weight factor collapses to
// (x_j - u_i)^2 in half-integer coordinates). The factor is normalized
// against the vacuum configuration, which is the form consistent with the
// degenerate-series pushforward identity.
struct ZDeform {
    std::vector<Real> u;
};

// Correlation of the (optionally deformed) z-measure by direct summation;
// points live on Z + 1/2. The normalization constant is computed from the
// same truncated sum; per-partition positivity of the deformation factor is
// enforced. The tail is the raw remainder certificate
// |prefactor| sum_{n>cutoff} p(n) xi^n (not a sharp bound).
BruteResult brute_zmeasure_corr(const kernels::ZParams& zp, const std::vector<Real>& points,
                                unsigned cutoff, const ZDeform* deform,
                                const PrecisionContext& ctx);

// Exact sequential sampler for the N-point orthogonal polynomial ensemble
// (rank-N projection kernel restricted to {0..truncation}). The kernel matrix
// is precomputed at extended precision once; sampling runs in doubles.
class OpeSampler {
public:
    OpeSampler(const christoffel::EnsembleSpec& spec, long truncation,
               const PrecisionContext& ctx);

    // Draws exactly N distinct points; deterministic in the seed.
    std::vector<long> sample(unsigned long long seed) const;

    double trace() const { return trace_; }
    const std::vector<std::vector<double>>& matrix() const { return kmat_; }

private:
    long n_points_;
    double trace_;
    std::vector<std::vector<double>> kmat_;
};

std::vector<long> sample_ope(const christoffel::EnsembleSpec& spec, unsigned long long seed,
                             long truncation, const PrecisionContext& ctx);

}  // namespace cdop::oracle
