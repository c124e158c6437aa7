#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace multisym {

/// Exact rational scalar. All kernel arithmetic is over this type; no
/// floating point enters the symbolic layer.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational rat(long long n) { return Rational(n); }

inline Rational rat(long long n, long long d) { return Rational(n) / Rational(d); }

inline bool is_zero(const Rational& r) { return r.is_zero(); }

inline std::string to_string(const Rational& r) { return r.str(); }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

}  // namespace multisym
