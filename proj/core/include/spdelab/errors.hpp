#pragma once

#include <stdexcept>
#include <string>

namespace spdelab {

// Bad user input: malformed config, out-of-range parameter, mismatched sizes.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A numerical routine failed to reach its target (quadrature tolerance,
// eigensolve failure, singular system, non-finite values). Exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A size or degree cap was exceeded. Exact arithmetic is arbitrary-precision,
// so this is the only capacity limit that can actually trigger.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace spdelab
