#pragma once

// Exact carriers for irrational inputs: quadratic surds (a + b*sqrt(d))/c
// with all comparisons done in integer arithmetic, high-precision decimals
// carried as exact rationals with an explicit uncertainty radius, and
// certified rational intervals for every numeric value we report.

#include "riglab/common.hpp"

#include <optional>
#include <variant>

namespace riglab {

// Closed rational interval [lo, hi] guaranteed to contain the exact value.
struct CertReal {
    Rat lo, hi;

    CertReal() = default;
    CertReal(Rat l, Rat h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo > hi) throw RangeInvalid("CertReal: inverted interval");
    }
    static CertReal exact(const Rat& v) { return CertReal(v, v); }

    Rat width() const { return hi - lo; }
    Rat mid() const { return (lo + hi) / 2; }
    double to_double() const { return rat_to_double(mid()); }

    CertReal operator+(const CertReal& o) const { return {lo + o.lo, hi + o.hi}; }
    CertReal operator-(const CertReal& o) const { return {lo - o.hi, hi - o.lo}; }
    CertReal scaled(const Rat& r) const {
        return r >= 0 ? CertReal(lo * r, hi * r) : CertReal(hi * r, lo * r);
    }
    CertReal abs() const {
        if (lo >= 0) return *this;
        if (hi <= 0) return {Rat(-hi), Rat(-lo)};
        Rat neg_lo = -lo;
        return {Rat(0), std::max(neg_lo, hi)};
    }
    // Certified strict comparisons; straddling intervals refuse to decide.
    bool certainly_less(const Rat& r) const {
        if (hi < r) return true;
        if (lo >= r) return false;
        throw PrecisionExhausted("CertReal: comparison straddles decision boundary");
    }
};

// sqrt(d) as a certified interval with denominator 2^bits.
CertReal sqrt_interval(const BigInt& d, unsigned bits);

// (a + b*sqrt(d))/c, normalized: c > 0, d squarefree and not 1, b != 0
// unless the value is rational (then d = 0, b = 0).
struct QuadraticSurd {
    BigInt a = 0;
    BigInt b = 0;
    BigInt c = 1;
    u64 d = 0;

    bool is_rational() const { return b == 0; }
    Rat rational_value() const;

    static QuadraticSurd from_rational(const Rat& r);
    static QuadraticSurd make(BigInt a, BigInt b, BigInt c, u64 d);

    QuadraticSurd operator+(const QuadraticSurd& o) const;
    QuadraticSurd operator-(const QuadraticSurd& o) const;
    QuadraticSurd operator*(const QuadraticSurd& o) const;
    QuadraticSurd inverse() const;
    QuadraticSurd negate() const;
    QuadraticSurd scale_int(const BigInt& m) const;          // m * value
    QuadraticSurd sub_rational(const Rat& r) const;          // value - r

    int sign() const;                 // exact
    int compare(const Rat& r) const;  // sign(value - r), exact
    BigInt floor() const;             // exact
    CertReal interval(unsigned frac_bits) const;
    // Interval whose width is guaranteed <= 2^-goal regardless of the
    // coefficient sizes.
    CertReal tight_interval(unsigned goal_bits) const;

    std::string str() const;
};

// Exact decimal input: value = digits / 10^frac_digits, true number within
// +-radius (one unit in the last written digit).
struct Decimal {
    Rat value;
    long frac_digits = 0;
    Rat radius() const {
        Rat r(1);
        for (long i = 0; i < frac_digits; ++i) r /= 10;
        return r;
    }
};

struct Alpha {
    std::variant<QuadraticSurd, Decimal> v;

    bool is_surd() const { return std::holds_alternative<QuadraticSurd>(v); }
    const QuadraticSurd& surd() const { return std::get<QuadraticSurd>(v); }
    const Decimal& decimal() const { return std::get<Decimal>(v); }

    bool is_certified_irrational() const {
        return is_surd() && !surd().is_rational();
    }
    // Certified enclosure of the value.
    CertReal interval(unsigned frac_bits) const;
    std::string str() const;
};

// Parses "(a+b*sqrt(d))/c"-style expressions (full +,-,*,/ arithmetic in
// Q(sqrt(d))) or "dec:0.4142..." decimals.  Plain rationals come back as
// rational surds.
Alpha parse_alpha(const std::string& text);

Rat parse_rational(const std::string& text);  // "u/v", integer, or decimal

}  // namespace riglab
