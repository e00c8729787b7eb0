#pragma once

#include <boost/multiprecision/mpfr.hpp>

#include <string>

namespace fdsl {

/// Arbitrary-precision real number. The decimal precision is a process-wide
/// (per-thread) setting, see set_working_precision().
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

/// Sets the requested decimal precision P for all subsequently constructed
/// Real values on this thread. The underlying mpfr precision carries a fixed
/// number of guard digits on top of P so that mild cancellation (sine-integral
/// series, near-singular potential evaluation) does not eat into the P digits
/// a caller asked for. Worker threads must call this on entry.
void set_working_precision(unsigned digits);

/// Requested precision P in decimal digits (50 unless configured).
unsigned working_precision();

/// Guard digits added on top of P for internal arithmetic.
constexpr unsigned guard_digits() { return 10; }

/// pi at the current working precision (cached per thread).
const Real& pi();

/// 10^e at the current working precision.
Real pow10(long e);

/// 10^(offset - P): the spec'd family of tolerances tied to the precision.
Real tolerance(int offset);

/// Comparison tolerance for computed reals, 10^(5 - P).
Real eps_machine();

bool approx_equal(const Real& a, const Real& b, const Real& tol);
bool approx_equal(const Real& a, const Real& b);

/// Decimal string with the given number of significant digits
/// (0 = enough digits to round-trip exactly).
std::string to_string(const Real& x, std::streamsize digits = 0);

/// Parse a decimal string at the current working precision.
Real real_from_string(const std::string& s);

}  // namespace fdsl
