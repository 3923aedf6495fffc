#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace ratobs {

using BigInt = boost::multiprecision::cpp_int;

// Exact rational scalar. Kept canonical by the backend: gcd(num, den) = 1,
// den >= 1.
using BigRational = boost::multiprecision::cpp_rational;

inline BigInt numerator(const BigRational &r) { return boost::multiprecision::numerator(r); }
inline BigInt denominator(const BigRational &r) { return boost::multiprecision::denominator(r); }

inline double to_double(const BigRational &r) { return r.template convert_to<double>(); }

inline std::string to_string(const BigRational &r) { return r.str(); }

// Accepts "p", "-p", "p/q" and plain decimal literals ("0.25" -> 1/4).
BigRational parse_rational(const std::string &text);

} // namespace ratobs
