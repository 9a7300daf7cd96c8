#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace pdeform {

// Exact rational scalar for the whole engine. cpp_rational keeps gcd-reduced
// numerator / positive denominator internally, which matches the canonical
// "p/q" form used by the serialization grammar.
using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

// Serializes as "p/q", or "p" when the denominator is 1.
std::string rational_to_string(const Rational& r);

// Parses "p", "-p", "p/q". Throws Error(SyntaxError) on malformed input.
Rational rational_from_string(const std::string& s);

} // namespace pdeform
