#pragma once

// Segmented sieving of the Mobius and Liouville functions, and prime-volume
// analytics: exact Sum_{p|q} 1/p, the sets D_j = {q : volume < j}, finite
// densities and maximizers.

#include "riglab/common.hpp"

#include <functional>
#include <optional>

namespace riglab::arith {

enum class Kind { mobius, liouville };

inline const char* kind_name(Kind k) { return k == Kind::mobius ? "mobius" : "liouville"; }

struct SieveConfig {
    u64 segment = u64(1) << 20;    // indices per segment
    u64 max_range = u64(1) << 28;  // memory cap for materialized sequences
};

// Sieved block of mu or lambda over [lo, hi); values[i] belongs to lo + i.
struct SignSequence {
    u64 lo = 1;
    u64 hi = 1;
    Kind kind = Kind::mobius;
    std::vector<signed char> values;

    u64 size() const { return hi - lo; }
    int at(u64 n) const {
        if (n < lo || n >= hi) throw RangeInvalid("SignSequence: index outside block");
        return values[static_cast<std::size_t>(n - lo)];
    }
};

// q with its distinct prime divisors and exact volume Sum 1/p.
struct PrimeVolume {
    u64 q = 1;
    std::vector<u64> primes;
    Rat volume;
    double volume_f = 0.0;
};

SignSequence sieve_signs(u64 lo, u64 hi, Kind kind, const SieveConfig& cfg = {});

// Streams sieved signs over [lo, hi) in ascending order without
// materializing the range; fn(n, w).
void for_each_sign(u64 lo, u64 hi, Kind kind,
                   const std::function<void(u64, int)>& fn,
                   const SieveConfig& cfg = {});

PrimeVolume prime_volume(u64 q);

bool in_dj(u64 q, u64 j);

// Exact Sum_{p <= H} 1/p.
Rat mertens_prime_sum(u64 H);

// Volume(q) <= (1 - epsilon) * Sum_{p <= H} 1/p, compared exactly.
bool satisfies_volume_condition(u64 q, u64 H, const Rat& epsilon);

// Per-index exact volumes for 1 <= q <= X, as num[q]/den[q] (den = radical).
// Backs the density and maximizer scans; one factor-sieve pass.
struct VolumeTable {
    u64 X = 0;
    std::vector<u64> num;  // index 0 unused
    std::vector<u64> den;
    bool less_than(u64 q, u64 j) const { return u128(num[q]) < u128(j) * den[q]; }
};

VolumeTable volume_table(u64 X);

struct DensityPoint {
    u64 X = 0;
    u64 j = 0;
    u64 count = 0;
    Rat density;
};

DensityPoint density_dj(u64 j, u64 X);
DensityPoint density_dj(u64 j, const VolumeTable& table);

struct MaxVolume {
    u64 X = 0;
    u64 qstar = 0;
    Rat volume;
};

MaxVolume max_prime_volume(u64 X);
MaxVolume max_prime_volume(const VolumeTable& table);

}  // namespace riglab::arith
