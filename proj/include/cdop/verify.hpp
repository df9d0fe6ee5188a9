#pragma once

#include <string>
#include <vector>

#include "cdop/prec.hpp"

namespace cdop::verify {

// One executed invariant check: the measured residual against its tolerance.
struct CheckResult {
    std::string suite;
    std::string name;
    double residual;
    double tolerance;
    bool pass;
};

// Runs the invariant checks of a suite. Valid names: "specfun", "orthopoly",
// "christoffel", "kernels", "oracle", "all". If fuzz_bits > 0, every check
// input is perturbed by a relative 2^-fuzz_bits, which for small fuzz_bits
// must trip at least one check (negative control for the harness itself).
// Throws ConfigError on an unknown suite name.
std::vector<CheckResult> run_suite(const std::string& suite, const PrecisionContext& ctx,
                                   unsigned fuzz_bits = 0);

inline bool all_pass(const std::vector<CheckResult>& rs) {
    for (const CheckResult& r : rs)
        if (!r.pass) return false;
    return true;
}

}  // namespace cdop::verify
