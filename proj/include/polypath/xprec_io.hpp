#pragma once
// Decimal text form of the extended-precision scalars.  Printing uses the
// full significand for the level (17 / 32 / 64 digits for d / dd / qd) so
// that values survive a text round trip to within the level roundoff.

#include <string>
#include <string_view>

#include "polypath/xprec.hpp"

namespace polypath {

std::string to_decimal(double x);
std::string to_decimal(DD x);
std::string to_decimal(QD x);

// Returns false on malformed input.  Accepts optional sign, digits with an
// optional fractional part, and an optional e/E exponent.
bool parse_decimal(std::string_view s, double& out);
bool parse_decimal(std::string_view s, DD& out);
bool parse_decimal(std::string_view s, QD& out);

// 10^k at level R, by binary powering
template <class R>
R pow10_r(long k);

}  // namespace polypath
