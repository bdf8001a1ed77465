#pragma once

// Shared scalar types, error taxonomy and small numeric helpers used by
// every riglab module.

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace riglab {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;
using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using cplx = std::complex<double>;

// Error taxonomy; labcli maps these onto process exit codes.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RangeInvalid : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PrecisionExhausted : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline double rat_to_double(const Rat& r) { return r.convert_to<double>(); }

inline std::string rat_to_string(const Rat& r) {
    return numerator(r).str() + "/" + denominator(r).str();
}

// Floats render with 17 significant digits everywhere (CSV contract).
inline std::string fmt17(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return std::string(buf);
}

inline BigInt pow_big(const BigInt& base, unsigned exp) {
    return boost::multiprecision::pow(base, exp);
}

inline BigInt floor_sqrt(const BigInt& n) { return boost::multiprecision::sqrt(n); }

// Largest m with m^k <= n (n >= 0, k >= 1).
inline BigInt floor_root(const BigInt& n, unsigned k) {
    if (n < 0) throw RangeInvalid("floor_root: negative argument");
    if (k == 0) throw RangeInvalid("floor_root: zero index");
    if (k == 1 || n <= 1) return n;
    if (k == 2) return floor_sqrt(n);
    unsigned bits = static_cast<unsigned>(msb(n)) + 1;
    BigInt hi = BigInt(1) << (bits / k + 1), lo = 0;
    while (lo < hi) {  // smallest m with m^k > n, then step back
        BigInt mid = (lo + hi) / 2;
        if (pow_big(mid, k) > n)
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo - 1;
}

// Floor division for possibly negative numerators.
inline BigInt floor_div(const BigInt& a, const BigInt& b) {
    BigInt q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}

// Neumaier compensated accumulator; accumulation order is the caller's
// contract (ascending index everywhere in riglab).
struct KahanSum {
    double s = 0.0, c = 0.0;
    void add(double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

struct KahanCplx {
    KahanSum re, im;
    void add(cplx z) {
        re.add(z.real());
        im.add(z.imag());
    }
    cplx value() const { return {re.value(), im.value()}; }
};

inline cplx unit_phase(double t01) {
    double ang = 6.283185307179586476925286766559 * t01;
    return {std::cos(ang), std::sin(ang)};
}

}  // namespace riglab
