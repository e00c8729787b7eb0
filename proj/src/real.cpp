#include "fdsl/real.hpp"

#include "fdsl/errors.hpp"

namespace fdsl {

namespace {

thread_local unsigned t_requested = 0;
thread_local Real t_pi;

void ensure_initialized() {
    if (t_requested == 0) set_working_precision(50);
}

// Runs before main so that user code constructing Real values ahead of any
// library call already gets the default precision. Without this, numbers
// built early would carry boost's 20-digit start-up default and drag every
// expression touching them down to it. Worker threads set their precision
// explicitly.
const bool bootstrap = [] {
    set_working_precision(50);
    return true;
}();

}  // namespace

void set_working_precision(unsigned digits) {
    if (digits < 16) throw ValidationError("working precision must be at least 16 digits");
    t_requested = digits;
    Real::default_precision(digits + guard_digits());
    t_pi = 4 * atan(Real(1));
}

unsigned working_precision() {
    ensure_initialized();
    return t_requested;
}

const Real& pi() {
    ensure_initialized();
    return t_pi;
}

Real pow10(long e) {
    ensure_initialized();
    return pow(Real(10), e);
}

Real tolerance(int offset) { return pow10(offset - static_cast<long>(working_precision())); }

Real eps_machine() { return tolerance(5); }

bool approx_equal(const Real& a, const Real& b, const Real& tol) { return abs(a - b) <= tol; }

bool approx_equal(const Real& a, const Real& b) { return approx_equal(a, b, eps_machine()); }

std::string to_string(const Real& x, std::streamsize digits) {
    return x.str(digits, std::ios_base::fmtflags(0));
}

Real real_from_string(const std::string& s) {
    ensure_initialized();
    try {
        return Real(s);
    } catch (const std::exception&) {
        throw ParseError("not a valid number: '" + s + "'");
    }
}

}  // namespace fdsl
