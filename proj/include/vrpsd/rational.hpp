#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <string>

namespace vrpsd {

// All recourse and cut arithmetic is exact; doubles appear only at the LP
// boundary and in generated-instance sampling.
using Rational = boost::multiprecision::mpq_rational;
using BigInt = boost::multiprecision::mpz_int;

BigInt rat_floor(const Rational& q);
BigInt rat_ceil(const Rational& q);

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

// Exact conversion of an IEEE double (binary fraction, no decimal reinterpretation).
Rational rational_from_double(double value);

// Accepts "p/q", integer literals and plain decimal literals ("1.25", "-0.4",
// "2e3"). Decimal text maps to the exact decimal fraction it denotes.
Rational parse_rational(const std::string& text);

// Integers print bare, everything else as "p/q"; round-trips through
// parse_rational byte-exactly.
std::string format_rational(const Rational& q);

}  // namespace vrpsd
