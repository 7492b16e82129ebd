#pragma once

#include <cstddef>
#include <vector>

namespace smo::test {

/// Rng stand-in returning a fixed value, for pinning formula endpoints.
struct ConstRng {
    double value = 0.0;
    double uniform() { return value; }
    double uniform(double lo, double hi) { return lo + value * (hi - lo); }
    std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(value * double(n)); }
};

/// Rng stand-in replaying a scripted sequence of uniform() draws.
struct SequenceRng {
    std::vector<double> values;
    std::size_t next = 0;
    double uniform() { return values[next++ % values.size()]; }
    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }
    std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(uniform() * double(n)); }
};

}  // namespace smo::test
