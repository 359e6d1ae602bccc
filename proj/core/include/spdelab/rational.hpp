#pragma once

#include <boost/multiprecision/cpp_int.hpp>

namespace spdelab {

// Exact coefficient type for the zero-tolerance identity suites.
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& r) { return r.convert_to<double>(); }
inline double to_double(double x) { return x; }

// Small trait layer so polynomial code can be generic over {Rational, double}.
template <class Coeff>
struct CoeffTraits;

template <>
struct CoeffTraits<Rational> {
    static constexpr bool exact = true;
    static bool is_zero(const Rational& c) { return c == 0; }
    static Rational from_int(long long n) { return Rational(n); }
};

template <>
struct CoeffTraits<double> {
    static constexpr bool exact = false;
    static bool is_zero(double c) { return c == 0.0; }
    static double from_int(long long n) { return static_cast<double>(n); }
};

} // namespace spdelab
