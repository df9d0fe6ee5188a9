#ifndef CDOP_PARTITION_HPP
#define CDOP_PARTITION_HPP

#include <cstddef>
#include <numeric>
#include <vector>

#include "cdop/errors.hpp"

namespace cdop {

// Integer partition: weakly decreasing positive parts. The empty partition is
// valid and denotes the empty Young diagram.
struct Partition {
    std::vector<unsigned> parts;

    Partition() = default;
    explicit Partition(std::vector<unsigned> p) : parts(std::move(p)) {
        for (size_t i = 0; i < parts.size(); ++i) {
            if (parts[i] == 0) throw ConfigError("Partition: zero part");
            if (i > 0 && parts[i] > parts[i - 1])
                throw ConfigError("Partition: parts must be weakly decreasing");
        }
    }
    Partition(std::initializer_list<unsigned> p) : Partition(std::vector<unsigned>(p)) {}

    unsigned size() const {
        return std::accumulate(parts.begin(), parts.end(), 0u);
    }
    size_t length() const { return parts.size(); }
    unsigned part(size_t i) const { return i < parts.size() ? parts[i] : 0; }

    bool operator==(const Partition& o) const { return parts == o.parts; }
};

} // namespace cdop

#endif
