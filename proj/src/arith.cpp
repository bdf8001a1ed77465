#include "riglab/arith.hpp"

#include "riglab/factor.hpp"
#include "riglab/threads.hpp"

#include <algorithm>
#include <cmath>

namespace riglab::arith {

namespace {

u64 isqrt_u64(u64 n) {
    u64 r = static_cast<u64>(std::sqrt(static_cast<double>(n)));
    while (r > 0 && r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// One segment [lo, hi): divide out every base prime, track parity and
// squarefreeness, then flip once more for a leftover prime factor > sqrt.
void sieve_segment(u64 lo, u64 hi, Kind kind, const std::vector<u64>& base_primes,
                   signed char* out) {
    const std::size_t len = static_cast<std::size_t>(hi - lo);
    std::vector<u64> rest(len);
    for (std::size_t i = 0; i < len; ++i) {
        rest[i] = lo + i;
        out[i] = 1;
    }
    const bool mobius = kind == Kind::mobius;
    for (u64 p : base_primes) {
        u64 first = ((lo + p - 1) / p) * p;
        for (u64 n = first; n < hi; n += p) {
            std::size_t i = static_cast<std::size_t>(n - lo);
            if (out[i] == 0) continue;
            int e = 0;
            while (rest[i] % p == 0) {
                rest[i] /= p;
                ++e;
            }
            if (mobius && e >= 2)
                out[i] = 0;
            else if (e & 1)
                out[i] = static_cast<signed char>(-out[i]);
        }
    }
    for (std::size_t i = 0; i < len; ++i) {
        if (rest[i] > 1 && out[i] != 0) out[i] = static_cast<signed char>(-out[i]);
        if (lo + i == 1) out[i] = 1;  // mu(1) = lambda(1) = 1
    }
}

}  // namespace

SignSequence sieve_signs(u64 lo, u64 hi, Kind kind, const SieveConfig& cfg) {
    if (lo < 1 || lo >= hi) throw RangeInvalid("sieve_signs: range-invalid (need 1 <= lo < hi)");
    if (hi - lo > cfg.max_range)
        throw RangeInvalid("sieve_signs: segment-too-large (range exceeds memory cap)");
    SignSequence seq;
    seq.lo = lo;
    seq.hi = hi;
    seq.kind = kind;
    seq.values.assign(static_cast<std::size_t>(hi - lo), 0);
    const auto base = primes_up_to(isqrt_u64(hi - 1));
    const u64 seg = std::max<u64>(cfg.segment, 1);
    const u64 n = hi - lo;
    parallel_chunks(static_cast<std::size_t>(n), static_cast<std::size_t>(seg),
                    [&](std::size_t, std::size_t b, std::size_t e) {
                        sieve_segment(lo + b, lo + e, kind, base, seq.values.data() + b);
                    });
    return seq;
}

void for_each_sign(u64 lo, u64 hi, Kind kind, const std::function<void(u64, int)>& fn,
                   const SieveConfig& cfg) {
    if (lo < 1 || lo >= hi) throw RangeInvalid("for_each_sign: range-invalid");
    const auto base = primes_up_to(isqrt_u64(hi - 1));
    const u64 seg = std::max<u64>(cfg.segment, 1);
    std::vector<signed char> buf;
    for (u64 s = lo; s < hi; s += seg) {
        u64 e = std::min(hi, s + seg);
        buf.assign(static_cast<std::size_t>(e - s), 0);
        sieve_segment(s, e, kind, base, buf.data());
        for (u64 n = s; n < e; ++n) fn(n, buf[static_cast<std::size_t>(n - s)]);
    }
}

PrimeVolume prime_volume(u64 q) {
    if (q < 1) throw RangeInvalid("prime_volume: q must be positive");
    PrimeVolume pv;
    pv.q = q;
    pv.primes = distinct_prime_factors(q);
    Rat v = 0;
    for (u64 p : pv.primes) v += Rat(1, p);
    pv.volume = v;
    pv.volume_f = rat_to_double(v);
    return pv;
}

bool in_dj(u64 q, u64 j) {
    if (j < 1) throw RangeInvalid("in_dj: j must be positive");
    return prime_volume(q).volume < Rat(j);
}

Rat mertens_prime_sum(u64 H) {
    if (H < 2) throw RangeInvalid("mertens_prime_sum: H >= 2 required");
    Rat s = 0;
    for (u64 p : primes_up_to(H)) s += Rat(1, p);
    return s;
}

bool satisfies_volume_condition(u64 q, u64 H, const Rat& epsilon) {
    if (!(epsilon > 0 && epsilon < Rat(1, 100)))
        throw RangeInvalid("satisfies_volume_condition: epsilon-out-of-range (need 0 < eps < 1/100)");
    return prime_volume(q).volume <= (Rat(1) - epsilon) * mertens_prime_sum(H);
}

VolumeTable volume_table(u64 X) {
    if (X < 1) throw RangeInvalid("volume_table: X >= 1 required");
    VolumeTable t;
    t.X = X;
    t.num.assign(static_cast<std::size_t>(X) + 1, 0);
    t.den.assign(static_cast<std::size_t>(X) + 1, 1);
    // Adding 1/p keeps den = product of distinct primes (<= q <= X: fits u64;
    // num <= den * volume and volumes stay below ~3 at desk scale).
    std::vector<char> composite(static_cast<std::size_t>(X) + 1, 0);
    for (u64 p = 2; p <= X; ++p) {
        if (composite[p]) continue;
        for (u64 m = p; m <= X; m += p) {
            if (m > p) composite[m] = 1;
            t.num[m] = t.num[m] * p + t.den[m];
            t.den[m] *= p;
        }
    }
    return t;
}

DensityPoint density_dj(u64 j, const VolumeTable& t) {
    if (j < 1) throw RangeInvalid("density_dj: j must be positive");
    DensityPoint d;
    d.X = t.X;
    d.j = j;
    for (u64 q = 1; q <= t.X; ++q)
        if (t.less_than(q, j)) ++d.count;
    d.density = Rat(d.count, t.X);
    return d;
}

DensityPoint density_dj(u64 j, u64 X) { return density_dj(j, volume_table(X)); }

MaxVolume max_prime_volume(const VolumeTable& t) {
    if (t.X < 2) throw RangeInvalid("max_prime_volume: X >= 2 required");
    MaxVolume m;
    m.X = t.X;
    u64 bq = 1;  // q = 1 has volume 0
    for (u64 q = 2; q <= t.X; ++q) {
        // num[q]/den[q] > num[bq]/den[bq], exact cross comparison
        if (u128(t.num[q]) * t.den[bq] > u128(t.num[bq]) * t.den[q]) bq = q;
    }
    m.qstar = bq;
    m.volume = Rat(t.num[bq], t.den[bq]);
    return m;
}

MaxVolume max_prime_volume(u64 X) { return max_prime_volume(volume_table(X)); }

}  // namespace riglab::arith
