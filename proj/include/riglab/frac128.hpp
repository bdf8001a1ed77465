#pragma once

// Points on the additive circle T = [0,1) as 128-bit fixed-point fractions.
// Addition wraps mod 2^128 exactly, so rotations and interval exchanges are
// bit-exact; one rounding of the step at construction is the only error.

#include "riglab/common.hpp"
#include "riglab/surd.hpp"

namespace riglab {

struct Fr128 {
    u128 v = 0;

    static Fr128 from_double(double x01) {
        double f = x01 - std::floor(x01);
        if (f >= 1.0) f = 0.0;  // float rounding at the wrap
        double hi = f * 18446744073709551616.0;  // 2^64
        u64 top = static_cast<u64>(hi);
        double rem = (hi - static_cast<double>(top)) * 18446744073709551616.0;
        u64 low = static_cast<u64>(rem);
        return {(u128(top) << 64) | low};
    }

    // Nearest 128-bit fraction to the fractional part of r.
    static Fr128 from_rational(const Rat& r) {
        BigInt num = numerator(r), den = denominator(r);
        BigInt m = num % den;
        if (m < 0) m += den;
        BigInt scaled = ((m << 129) + den) / (den << 1);  // round nearest
        if (scaled >> 128 != 0) scaled = 0;               // wrapped to 1
        u64 top = static_cast<u64>((scaled >> 64).convert_to<u64>());
        u64 low = static_cast<u64>((scaled & BigInt("0xffffffffffffffff")).convert_to<u64>());
        return {(u128(top) << 64) | low};
    }

    // Nearest 128-bit fraction to alpha; rounding error < 2^-129.
    static Fr128 from_alpha(const Alpha& a) {
        if (a.is_surd()) {
            const QuadraticSurd& s = a.surd();
            if (s.is_rational()) return from_rational(s.rational_value());
            CertReal iv = s.tight_interval(160);
            return from_rational(iv.mid());
        }
        return from_rational(a.decimal().value);
    }

    double to_double() const {
        return static_cast<double>(static_cast<u64>(v >> 64)) * (1.0 / 18446744073709551616.0) +
               static_cast<double>(static_cast<u64>(v)) *
                   (1.0 / 18446744073709551616.0 / 18446744073709551616.0);
    }

    Rat to_rational() const {
        BigInt n = (BigInt(static_cast<u64>(v >> 64)) << 64) | BigInt(static_cast<u64>(v));
        return Rat(n, BigInt(1) << 128);
    }

    Fr128 operator+(Fr128 o) const { return {v + o.v}; }
    Fr128 operator-(Fr128 o) const { return {v - o.v}; }
    Fr128 mul_u64(u64 m) const { return {v * m}; }  // exact mod 2^128
    bool operator==(const Fr128&) const = default;
    bool operator<(const Fr128& o) const { return v < o.v; }

    // Circle distance to 0 as a fraction of 2^128.
    u128 dist_zero_raw() const { return std::min(v, u128(0) - v); }
    double dist_to(Fr128 o) const { return Fr128{v - o.v}.dist_zero(); }
    double dist_zero() const {
        u128 d = dist_zero_raw();
        return static_cast<double>(static_cast<u64>(d >> 64)) * (1.0 / 18446744073709551616.0) +
               static_cast<double>(static_cast<u64>(d)) *
                   (1.0 / 18446744073709551616.0 / 18446744073709551616.0);
    }
    Rat dist_zero_rational() const {
        u128 d = dist_zero_raw();
        BigInt n = (BigInt(static_cast<u64>(d >> 64)) << 64) | BigInt(static_cast<u64>(d));
        return Rat(n, BigInt(1) << 128);
    }
};

// i-th point of the uniform grid with g points (exact floor(i*2^128/g)).
inline Fr128 grid_point(u64 i, u64 g) {
    BigInt scaled = (BigInt(i % g) << 128) / g;
    u64 top = (scaled >> 64).convert_to<u64>();
    u64 low = (scaled & BigInt("0xffffffffffffffff")).convert_to<u64>();
    return {(u128(top) << 64) | low};
}

}  // namespace riglab
