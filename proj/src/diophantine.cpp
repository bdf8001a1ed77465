#include "riglab/diophantine.hpp"

#include <map>

namespace riglab::dio {

namespace {

void push_convergent(ContinuedFraction& cf, const BigInt& a) {
    // (p_{-1}, p_0, q_{-1}, q_0) = (1, 0, 0, 1)
    std::size_t n = cf.quotients.size();
    BigInt pm2 = n >= 2 ? cf.p[n - 2] : (n == 1 ? BigInt(0) : BigInt(1));
    BigInt pm1 = n >= 1 ? cf.p[n - 1] : BigInt(0);
    BigInt qm2 = n >= 2 ? cf.q[n - 2] : (n == 1 ? BigInt(1) : BigInt(0));
    BigInt qm1 = n >= 1 ? cf.q[n - 1] : BigInt(1);
    cf.quotients.push_back(a);
    cf.p.push_back(a * pm1 + pm2);
    cf.q.push_back(a * qm1 + qm2);
}

// beta_n for the surd path: |q_n x - p_n| evaluated as an exact surd,
// certified to >= bits fractional bits.
CertReal surd_beta(const QuadraticSurd& x, const BigInt& qn, const BigInt& pn, unsigned bits) {
    QuadraticSurd e = x.scale_int(qn).sub_rational(Rat(pn));
    if (e.sign() < 0) e = e.negate();
    return e.tight_interval(bits);
}

void expand_surd(ContinuedFraction& cf, const QuadraticSurd& alpha, std::size_t n_terms,
                 unsigned beta_bits) {
    if (alpha.is_rational()) throw RangeInvalid("cf_expand: rational-input");
    QuadraticSurd x = alpha.sub_rational(Rat(alpha.floor()));  // fractional part, in (0,1)
    // Complete quotient of 1/x as (P + sqrt(D)) / Q with Q | D - P^2.
    // 1/x = c (a' - b sqrt d)^{-1}... derive from x = (a + b sqrt d)/c with
    // b normalized positive by multiplying numerator and denominator by c.
    BigInt a = x.a, b = x.b, c = x.c;
    if (b < 0) {  // represent as (a' + b' sqrt d)/c' with b' > 0
        a = -a;
        b = -b;
        c = -c;
    }
    BigInt P = a * c;
    BigInt D = b * b * BigInt(x.d) * c * c;
    BigInt Q = c * c;
    if (c < 0) {
        P = -P;  // (a + b sqrt d)/c = (ac + bc sqrt d)/c^2 requires bc > 0
        Q = -Q;
    }
    // State now represents x itself; the loop peels quotients of the
    // reciprocal complete quotients.
    BigInt s = floor_sqrt(D);
    std::map<std::pair<BigInt, BigInt>, std::size_t> seen;
    // First step: x in (0,1), so invert once before extracting quotients.
    // 1/((P + sqrt D)/Q) = Q (sqrt D - P) / (D - P^2)
    auto invert = [&]() {
        BigInt newQ = (D - P * P) / Q;
        P = -P;
        Q = newQ;
    };
    invert();
    for (std::size_t n = 1; n <= n_terms; ++n) {
        // a_n = floor((P + sqrt D)/Q)
        BigInt fl = Q > 0 ? floor_div(P + s, Q) : floor_div(P + s + 1, Q);
        if (fl < 1) throw RangeInvalid("cf_expand: internal quotient < 1");
        auto key = std::make_pair(P, Q);
        auto it = seen.find(key);
        if (it != seen.end() && !cf.period) {
            cf.period = std::make_pair(it->second - 1, (n - 1) - (it->second - 1));
        } else {
            seen.emplace(key, n);
        }
        push_convergent(cf, fl);
        cf.beta.push_back(surd_beta(x, cf.q.back(), cf.p.back(), beta_bits));
        // next complete quotient: 1 / (cur - a_n)
        P = fl * Q - P;
        Q = (D - P * P) / Q;
    }
}

void expand_decimal(ContinuedFraction& cf, const Decimal& dec, std::size_t n_terms,
                    unsigned beta_bits) {
    Rat r = dec.radius();
    Rat lo = dec.value - r, hi = dec.value + r;
    // strip integer part
    BigInt fl0 = floor_div(numerator(lo), denominator(lo));
    if (Rat(fl0) != floor_div(numerator(hi), denominator(hi)))
        throw PrecisionExhausted("cf_expand: integer part uncertain");
    lo -= Rat(fl0);
    hi -= Rat(fl0);
    const Rat lo0 = lo, hi0 = hi;  // enclosure of the fractional part, for beta
    for (std::size_t n = 1; n <= n_terms; ++n) {
        if (lo <= 0) throw PrecisionExhausted("cf_expand: precision-exhausted at term " +
                                              std::to_string(n));
        // invert: [lo, hi] -> [1/hi, 1/lo]
        Rat ilo = Rat(1) / hi, ihi = Rat(1) / lo;
        BigInt a = floor_div(numerator(ilo), denominator(ilo));
        BigInt a2 = floor_div(numerator(ihi), denominator(ihi));
        if (a != a2)
            throw PrecisionExhausted("cf_expand: precision-exhausted at term " + std::to_string(n));
        if (a < 1) throw PrecisionExhausted("cf_expand: nonpositive quotient (rational input?)");
        push_convergent(cf, a);
        CertReal e = (CertReal(lo0, hi0).scaled(Rat(cf.q.back())) - CertReal::exact(Rat(cf.p.back())))
                         .abs();
        cf.beta.push_back(e);
        lo = ilo - Rat(a);
        hi = ihi - Rat(a);
        (void)beta_bits;
    }
}

}  // namespace

ContinuedFraction cf_expand(const Alpha& alpha, std::size_t n_terms, unsigned beta_bits) {
    if (n_terms < 1) throw RangeInvalid("cf_expand: n_terms >= 1 required");
    ContinuedFraction cf;
    cf.alpha = alpha;
    if (alpha.is_surd())
        expand_surd(cf, alpha.surd(), n_terms, beta_bits);
    else
        expand_decimal(cf, alpha.decimal(), n_terms, beta_bits);
    return cf;
}

ContinuedFraction cf_from_quotients(const std::vector<BigInt>& quotients) {
    ContinuedFraction cf;
    for (const BigInt& a : quotients) {
        if (a < 1) throw RangeInvalid("cf_from_quotients: quotients must be positive");
        push_convergent(cf, a);
    }
    return cf;
}

std::vector<CertReal> best_approx_distances(const ContinuedFraction& cf) {
    std::vector<CertReal> out;
    const Rat max_width = Rat(1, BigInt(1) << 128);
    for (std::size_t n = 1; n <= cf.terms(); ++n) {
        const CertReal& b = cf.beta_n(n);
        if (b.width() > max_width)
            throw PrecisionExhausted("best_approx_distances: beta_" + std::to_string(n) +
                                     " certified below 128 bits");
        if (n < cf.terms() && !(b.hi < Rat(1, cf.q_n(n + 1))))
            throw PrecisionExhausted("best_approx_distances: cannot certify beta_n < 1/q_{n+1}");
        out.push_back(b);
    }
    return out;
}

CertReal dist_nearest_integer(const BigInt& m, const Alpha& alpha) {
    if (m < 1) throw RangeInvalid("dist_nearest_integer: m >= 1 required");
    if (alpha.is_surd()) {
        const QuadraticSurd& a = alpha.surd();
        QuadraticSurd ma = a.scale_int(m);
        // nearest integer = floor(ma + 1/2)
        QuadraticSurd shifted = ma.sub_rational(Rat(-1, 2));
        BigInt n0 = shifted.floor();
        QuadraticSurd e = ma.sub_rational(Rat(n0));
        if (e.sign() < 0) e = e.negate();
        return e.tight_interval(200);
    }
    const Decimal& dec = alpha.decimal();
    Rat r = dec.radius();
    CertReal ma(Rat(m) * (dec.value - r), Rat(m) * (dec.value + r));
    Rat shifted = ma.mid() + Rat(1, 2);
    BigInt n0 = floor_div(numerator(shifted), denominator(shifted));
    CertReal e = (ma - CertReal::exact(Rat(n0))).abs();
    // fold |ma - n0| into the distance range [0, 1/2]
    const Rat half(1, 2);
    if (e.lo >= half) {
        e = CertReal(Rat(Rat(1) - e.hi), Rat(Rat(1) - e.lo));
    } else if (e.hi > half) {
        Rat reflected = Rat(1) - e.hi;
        e = CertReal(std::min(e.lo, reflected), half);
    }
    if (e.width() > Rat(1, BigInt(1) << 96))
        throw PrecisionExhausted("dist_nearest_integer: certified error exceeds 2^-96");
    return e;
}

GrowthCase classify_index(const ContinuedFraction& cf, std::size_t n, const Rat& epsilon) {
    if (!(epsilon > 0 && epsilon < 1)) throw RangeInvalid("classify_index: epsilon in (0,1)");
    if (n < 1 || n + 1 > cf.terms()) throw RangeInvalid("classify_index: index-out-of-range");
    BigInt u = numerator(epsilon), v = denominator(epsilon);
    if (v > 1000000) throw RangeInvalid("classify_index: epsilon denominator too large");
    unsigned uu = u.convert_to<unsigned>(), vv = v.convert_to<unsigned>();
    // q_{n+1} > q_n^{1 + u/(4v)}  <=>  q_{n+1}^{4v} > q_n^{4v + u}
    return pow_big(cf.q_n(n + 1), 4 * vv) > pow_big(cf.q_n(n), 4 * vv + uu) ? GrowthCase::CaseA
                                                                            : GrowthCase::CaseB;
}

std::vector<BigInt> select_rigidity_subsequence(const ContinuedFraction& cf, const Rat& epsilon,
                                                std::size_t count) {
    std::size_t n_class = cf.terms() >= 2 ? cf.terms() - 1 : 0;
    if (n_class == 0) throw RangeInvalid("select_rigidity_subsequence: insufficient-expansion");
    std::vector<std::size_t> case_a;
    for (std::size_t n = 1; n <= n_class; ++n)
        if (classify_index(cf, n, epsilon) == GrowthCase::CaseA) case_a.push_back(n);
    std::vector<BigInt> sel;
    // "Infinitely many CaseA" on a finite prefix: CaseA indices reach into
    // the upper half of the classified range.
    bool persistent = !case_a.empty() && case_a.back() * 2 > n_class;
    if (persistent) {
        for (std::size_t n : case_a) sel.push_back(cf.q_n(n));
    } else {
        std::size_t start = case_a.empty() ? 1 : case_a.back() + 2;
        for (std::size_t n = start; n <= cf.terms(); ++n) sel.push_back(cf.q_n(n));
    }
    if (sel.empty()) throw RangeInvalid("select_rigidity_subsequence: insufficient-expansion");
    if (sel.size() > count) sel.resize(count);
    return sel;
}

std::size_t choose_intermediate_k(const ContinuedFraction& cf, std::size_t n) {
    if (n < 1 || n > cf.terms()) throw RangeInvalid("choose_intermediate_k: index-out-of-range");
    const BigInt& qn = cf.q_n(n);
    for (std::size_t k = 1; k <= cf.terms(); ++k) {
        const BigInt& qk = cf.q_n(k);
        if (pow_big(qk, 4) >= qn && qk * qk <= qn) return k;
        if (qk * qk > qn) break;  // denominators increase; no later k fits
    }
    throw RangeInvalid("choose_intermediate_k: no-such-k (no denominator in [q_n^{1/4}, q_n^{1/2}])");
}

}  // namespace riglab::dio
