#pragma once

#include <functional>
#include <string>

#include "cdop/prec.hpp"

namespace cdop {

// A correlation kernel over a declared discrete carrier. The evaluator is
// pure; the provenance string records the construction parameters.
struct KernelHandle {
    std::function<Real(const Real&, const Real&)> eval;
    std::string provenance;

    Real operator()(const Real& x, const Real& y) const { return eval(x, y); }
};

}  // namespace cdop
