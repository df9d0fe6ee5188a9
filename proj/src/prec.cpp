#include "cdop/prec.hpp"

#include <cstdlib>
#include <cstring>
#include <vector>

namespace cdop {

std::string Real::str(size_t digits) const {
    if (mpfr_nan_p(v_)) return "nan";
    if (mpfr_inf_p(v_)) return mpfr_sgn(v_) > 0 ? "inf" : "-inf";
    if (digits == 0) {
        // full decimal width for this mantissa
        digits = static_cast<size_t>(mpfr_get_prec(v_) * 0.30103) + 2;
    }
    mpfr_exp_t e;
    char* s = mpfr_get_str(nullptr, &e, 10, digits, v_, MPFR_RNDN);
    std::string m(s);
    mpfr_free_str(s);

    std::string sign;
    if (!m.empty() && m[0] == '-') {
        sign = "-";
        m.erase(0, 1);
    }
    if (m.empty()) m = "0";
    std::string out = sign + "0." + m + "e" + std::to_string(static_cast<long>(e));
    return out;
}

} // namespace cdop
