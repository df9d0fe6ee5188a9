#ifndef CDOP_ERRORS_HPP
#define CDOP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cdop {

struct PoleError : std::runtime_error {
    explicit PoleError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DivergenceError : std::runtime_error {
    explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

struct QuadratureError : std::runtime_error {
    explicit QuadratureError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateDeformationError : std::runtime_error {
    explicit DegenerateDeformationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct BranchError : std::runtime_error {
    explicit BranchError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GuardError : std::runtime_error {
    explicit GuardError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonPositiveWeightError : std::runtime_error {
    explicit NonPositiveWeightError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TruncationError : std::runtime_error {
    explicit TruncationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace cdop

#endif
