#pragma once

// Continued fractions of quadratic surds (exact periodic algorithm) and of
// high-precision decimals (interval floor-and-invert), convergent
// denominators q_n, best-approximation distances beta_n = |q_n a - p_n|,
// and the growth-dichotomy bookkeeping used to pick rigidity subsequences.

#include "riglab/common.hpp"
#include "riglab/surd.hpp"

#include <optional>

namespace riglab::dio {

enum class GrowthCase { CaseA, CaseB };

inline const char* case_name(GrowthCase c) { return c == GrowthCase::CaseA ? "CaseA" : "CaseB"; }

struct ContinuedFraction {
    Alpha alpha;                    // original input
    std::vector<BigInt> quotients;  // a_1 .. a_N of the fractional part
    std::vector<BigInt> p;          // p_1 .. p_N
    std::vector<BigInt> q;          // q_1 .. q_N
    std::vector<CertReal> beta;     // beta_1 .. beta_N
    // Detected period of the quotient sequence (surd path only):
    // quotients[period_start + i] repeats with period period_len.
    std::optional<std::pair<std::size_t, std::size_t>> period;

    std::size_t terms() const { return quotients.size(); }
    // 1-based accessors matching the classical indexing.
    const BigInt& a_n(std::size_t n) const { return at(quotients, n); }
    const BigInt& p_n(std::size_t n) const { return at(p, n); }
    const BigInt& q_n(std::size_t n) const { return at(q, n); }
    const CertReal& beta_n(std::size_t n) const { return at(beta, n); }

  private:
    template <class V>
    static const typename V::value_type& at(const V& v, std::size_t n) {
        if (n < 1 || n > v.size()) throw RangeInvalid("continued fraction: index-out-of-range");
        return v[n - 1];
    }
};

// Expansion with exact partial quotients.  Surds use the periodic
// (P + sqrt(D))/Q algorithm; decimals certify every quotient against the
// input's uncertainty interval and raise precision-exhausted rather than
// guess.  beta values are certified to at least beta_bits fractional bits
// on the surd path.
ContinuedFraction cf_expand(const Alpha& alpha, std::size_t n_terms, unsigned beta_bits = 192);

// Test/analysis constructor: builds p, q from a given quotient list (beta
// left empty, alpha unset); classification helpers only need q.
ContinuedFraction cf_from_quotients(const std::vector<BigInt>& quotients);

// beta_n for n = 1..N, validated: width <= 2^-128 and beta_n < 1/q_{n+1}.
std::vector<CertReal> best_approx_distances(const ContinuedFraction& cf);

// ||m * alpha|| (distance to the nearest integer), certified below 2^-96.
CertReal dist_nearest_integer(const BigInt& m, const Alpha& alpha);

// CaseA iff q_{n+1} > q_n^{1 + eps/4}, decided as the exact integer
// comparison q_{n+1}^{4v} > q_n^{4v+u} for eps = u/v.
GrowthCase classify_index(const ContinuedFraction& cf, std::size_t n, const Rat& epsilon);

// Denominators along which the cocycle bounds contract: the CaseA
// subsequence when CaseA indices persist through the expansion, otherwise
// every q_n past the last CaseA pair.
std::vector<BigInt> select_rigidity_subsequence(const ContinuedFraction& cf, const Rat& epsilon,
                                                std::size_t count);

// Smallest k with q_n^(1/4) <= q_k <= q_n^(1/2), via exact integer power
// comparisons.  Throws RangeInvalid("no-such-k") when the expansion has no
// denominator in the window.
std::size_t choose_intermediate_k(const ContinuedFraction& cf, std::size_t n);

}  // namespace riglab::dio
