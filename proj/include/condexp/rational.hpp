#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace condexp {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p/q", an integer, or a decimal string ("0.25", "-1.5e-3") into an
/// exact rational. Throws ValidationError on malformed text or zero denominator.
Rational parse_rational(std::string_view text);

/// Exact value of a finite double.
Rational rational_from_double(double value);

/// Always "p/q", also for integers ("1/1", "-3/1").
std::string to_fraction_string(const Rational& value);

/// Shortest readable form: "3", "-1/2".
std::string to_display_string(const Rational& value);

/// Scales a vector by a positive factor so that all entries are coprime integers.
/// The zero vector is returned unchanged.
void normalize_to_primitive_integers(std::vector<Rational>& values);

} // namespace condexp
