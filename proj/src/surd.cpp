#include "riglab/surd.hpp"

#include "riglab/factor.hpp"

#include <cctype>

namespace riglab {

CertReal sqrt_interval(const BigInt& d, unsigned bits) {
    if (d < 0) throw RangeInvalid("sqrt_interval: negative radicand");
    BigInt s = floor_sqrt(d << (2 * bits));
    BigInt scale = BigInt(1) << bits;
    return {Rat(s, scale), Rat(s + 1, scale)};
}

Rat QuadraticSurd::rational_value() const {
    if (!is_rational()) throw RangeInvalid("surd is irrational");
    return Rat(a, c);
}

QuadraticSurd QuadraticSurd::from_rational(const Rat& r) {
    QuadraticSurd s;
    s.a = numerator(r);
    s.c = denominator(r);
    return s;
}

QuadraticSurd QuadraticSurd::make(BigInt a, BigInt b, BigInt c, u64 d) {
    if (c == 0) throw RangeInvalid("surd: zero denominator");
    QuadraticSurd s;
    // Pull square factors out of d so that mixed spellings of the same
    // field normalize identically.
    if (b != 0 && d > 1) {
        u64 square_free = 1, root = 1;
        for (u64 p : distinct_prime_factors(d)) {
            int e = 0;
            while (d % p == 0) d /= p, ++e;
            for (int i = 0; i < e / 2; ++i) root *= p;
            if (e & 1) square_free *= p;
        }
        d = square_free;
        b *= root;
    }
    if (b == 0 || d == 0 || d == 1) {
        s.a = (d == 1) ? a + b : a;  // sqrt(1) folds in, sqrt(0) vanishes
        s.b = 0;
        s.c = c;
        s.d = 0;
    } else {
        s.a = a;
        s.b = b;
        s.c = c;
        s.d = d;
    }
    if (s.c < 0) {
        s.a = -s.a;
        s.b = -s.b;
        s.c = -s.c;
    }
    BigInt g = gcd(gcd(boost::multiprecision::abs(s.a), boost::multiprecision::abs(s.b)), s.c);
    if (g > 1) {
        s.a /= g;
        s.b /= g;
        s.c /= g;
    }
    if (s.b == 0) s.d = 0;
    return s;
}

QuadraticSurd QuadraticSurd::operator+(const QuadraticSurd& o) const {
    u64 dd = d ? d : o.d;
    if (d && o.d && d != o.d) throw RangeInvalid("surd: mixed radicals");
    return make(a * o.c + o.a * c, b * o.c + o.b * c, c * o.c, dd);
}

QuadraticSurd QuadraticSurd::operator-(const QuadraticSurd& o) const { return *this + o.negate(); }

QuadraticSurd QuadraticSurd::negate() const {
    QuadraticSurd s = *this;
    s.a = -s.a;
    s.b = -s.b;
    return s;
}

QuadraticSurd QuadraticSurd::operator*(const QuadraticSurd& o) const {
    u64 dd = d ? d : o.d;
    if (d && o.d && d != o.d) throw RangeInvalid("surd: mixed radicals");
    // (a1 + b1 r)(a2 + b2 r) with r^2 = d
    BigInt na = a * o.a + b * o.b * BigInt(dd ? dd : 0);
    BigInt nb = a * o.b + b * o.a;
    return make(na, nb, c * o.c, dd);
}

QuadraticSurd QuadraticSurd::inverse() const {
    if (sign() == 0) throw RangeInvalid("surd: division by zero");
    if (is_rational()) return from_rational(Rat(c, a));
    // c / (a + b sqrt(d)) = c (a - b sqrt(d)) / (a^2 - b^2 d)
    BigInt denom = a * a - b * b * BigInt(d);
    return make(a * c, -b * c, denom, d);
}

QuadraticSurd QuadraticSurd::scale_int(const BigInt& m) const { return make(a * m, b * m, c, d); }

QuadraticSurd QuadraticSurd::sub_rational(const Rat& r) const {
    return make(a * denominator(r) - numerator(r) * c, b * denominator(r), c * denominator(r), d);
}

// sign of A + B*sqrt(d) via squaring; exact.
static int sign_surd_num(const BigInt& A, const BigInt& B, u64 d) {
    if (B == 0) return A == 0 ? 0 : (A > 0 ? 1 : -1);
    if (A == 0) return B > 0 ? 1 : -1;
    if (A > 0 && B > 0) return 1;
    if (A < 0 && B < 0) return -1;
    BigInt a2 = A * A, b2d = B * B * BigInt(d);
    if (A > 0)  // B < 0: positive iff A^2 > B^2 d
        return a2 > b2d ? 1 : (a2 == b2d ? 0 : -1);
    return b2d > a2 ? 1 : (b2d == a2 ? 0 : -1);
}

int QuadraticSurd::sign() const { return sign_surd_num(a, b, d); }

int QuadraticSurd::compare(const Rat& r) const {
    // (a + b sqrt d)/c - u/v, c > 0
    BigInt A = a * denominator(r) - numerator(r) * c;
    BigInt B = b * denominator(r);
    return sign_surd_num(A, B, d);
}

BigInt QuadraticSurd::floor() const {
    if (is_rational()) return floor_div(a, c);
    BigInt s = floor_sqrt(b * b * BigInt(d));
    // b*sqrt(d) lies strictly inside (s, s+1) for b > 0, (-s-1, -s) for b < 0
    BigInt f = b > 0 ? floor_div(a + s, c) : floor_div(a - s - 1, c);
    while (compare(Rat(f)) < 0) --f;
    while (compare(Rat(f + 1)) >= 0) ++f;
    return f;
}

CertReal QuadraticSurd::interval(unsigned frac_bits) const {
    if (is_rational()) return CertReal::exact(Rat(a, c));
    CertReal r = sqrt_interval(BigInt(d), frac_bits);
    CertReal bs = r.scaled(Rat(b));
    Rat base(a, 1);
    return CertReal((base + bs.lo) / Rat(c), (base + bs.hi) / Rat(c));
}

CertReal QuadraticSurd::tight_interval(unsigned goal_bits) const {
    if (is_rational()) return CertReal::exact(Rat(a, c));
    // width = |b| * 2^-bits / c; pad bits by |b|'s size
    unsigned extra = static_cast<unsigned>(msb(boost::multiprecision::abs(b))) + 2;
    return interval(goal_bits + extra);
}

std::string QuadraticSurd::str() const {
    if (is_rational()) return "(" + a.str() + ")/" + c.str();
    return "(" + a.str() + (b >= 0 ? "+" : "") + b.str() + "*sqrt(" + std::to_string(d) + "))/" +
           c.str();
}

CertReal Alpha::interval(unsigned frac_bits) const {
    if (is_surd()) return surd().tight_interval(frac_bits);
    const Decimal& dec = decimal();
    Rat r = dec.radius();
    return {dec.value - r, dec.value + r};
}

std::string Alpha::str() const {
    if (is_surd()) return surd().str();
    return "dec:" + rat_to_string(decimal().value);
}

// ---------------------------------------------------------------------------
// Expression parser for alpha values.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := NUMBER | 'sqrt' '(' expr ')' | '(' expr ')' | '-' factor
//
// All arithmetic stays in Q(sqrt(d)) for a single squarefree d.
// ---------------------------------------------------------------------------

namespace {

// cpp_int's string constructor treats leading zeros as octal; parse plain
// base-10 digit runs explicitly.
BigInt bigint_from_digits(const std::string& digits) {
    std::size_t i = 0;
    while (i + 1 < digits.size() && digits[i] == '0') ++i;
    return BigInt(digits.substr(i));
}

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& text) : s(text) {}

    void skip_ws() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    bool eat_word(const char* w) {
        skip_ws();
        std::size_t n = std::string(w).size();
        if (s.compare(pos, n, w) == 0) {
            pos += n;
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& msg) const {
        throw UsageError("alpha parse error at position " + std::to_string(pos) + ": " + msg);
    }

    QuadraticSurd parse_number() {
        skip_ws();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) fail("expected number");
        BigInt whole = bigint_from_digits(s.substr(start, pos - start));
        if (pos < s.size() && s[pos] == '.') {
            ++pos;
            std::size_t fstart = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (fstart == pos) fail("expected fractional digits");
            BigInt frac = bigint_from_digits(s.substr(fstart, pos - fstart));
            BigInt den = 1;
            for (std::size_t i = fstart; i < pos; ++i) den *= 10;
            return QuadraticSurd::from_rational(Rat(whole * den + frac, den));
        }
        return QuadraticSurd::from_rational(Rat(whole));
    }

    QuadraticSurd parse_factor() {
        skip_ws();
        if (eat('-')) return parse_factor().negate();
        if (eat_word("sqrt")) {
            if (!eat('(')) fail("expected ( after sqrt");
            QuadraticSurd inner = parse_expr();
            if (!eat(')')) fail("expected ) after sqrt argument");
            if (!inner.is_rational()) fail("nested radicals are not supported");
            Rat r = inner.rational_value();
            if (r < 0) fail("sqrt of negative value");
            // sqrt(p/q) = sqrt(p*q)/q
            BigInt pq = numerator(r) * denominator(r);
            if (pq > BigInt(std::numeric_limits<u64>::max())) fail("radicand too large");
            return QuadraticSurd::make(0, 1, denominator(r), pq.convert_to<u64>());
        }
        if (eat('(')) {
            QuadraticSurd inner = parse_expr();
            if (!eat(')')) fail("expected )");
            return inner;
        }
        return parse_number();
    }

    QuadraticSurd parse_term() {
        QuadraticSurd v = parse_factor();
        for (;;) {
            skip_ws();
            if (eat('*'))
                v = v * parse_factor();
            else if (eat('/'))
                v = v * parse_factor().inverse();
            else
                return v;
        }
    }

    QuadraticSurd parse_expr() {
        QuadraticSurd v = parse_term();
        for (;;) {
            skip_ws();
            if (eat('+'))
                v = v + parse_term();
            else if (eat('-'))
                v = v - parse_term();
            else
                return v;
        }
    }
};

}  // namespace

Alpha parse_alpha(const std::string& text) {
    if (text.rfind("dec:", 0) == 0) {
        std::string body = text.substr(4);
        for (std::size_t i = 0; i < body.size(); ++i) {
            char ch = body[i];
            bool ok = std::isdigit(static_cast<unsigned char>(ch)) || ch == '.' ||
                      (i == 0 && (ch == '-' || ch == '+'));
            if (!ok) throw UsageError("decimal parse error: unexpected character in " + text);
        }
        bool neg = !body.empty() && body[0] == '-';
        if (!body.empty() && (body[0] == '-' || body[0] == '+')) body = body.substr(1);
        std::size_t dot = body.find('.');
        std::string digits = body;
        long frac = 0;
        if (dot != std::string::npos) {
            digits = body.substr(0, dot) + body.substr(dot + 1);
            frac = static_cast<long>(body.size() - dot - 1);
        }
        if (digits.empty()) throw UsageError("decimal parse error: no digits in " + text);
        BigInt num = bigint_from_digits(digits);
        BigInt den = 1;
        for (long i = 0; i < frac; ++i) den *= 10;
        Decimal d;
        d.value = Rat(neg ? -num : num, den);
        d.frac_digits = frac;
        return Alpha{d};
    }
    Parser p(text);
    QuadraticSurd v = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing characters");
    return Alpha{v};
}

Rat parse_rational(const std::string& text) {
    std::size_t slash = text.find('/');
    auto parse_side = [&](const std::string& part) -> Rat {
        Alpha a = parse_alpha(part);
        if (!a.is_surd() || !a.surd().is_rational())
            throw UsageError("expected rational value, got " + part);
        return a.surd().rational_value();
    };
    if (slash == std::string::npos) return parse_side(text);
    Rat num = parse_side(text.substr(0, slash));
    Rat den = parse_side(text.substr(slash + 1));
    if (den == 0) throw UsageError("rational with zero denominator: " + text);
    return num / den;
}

}  // namespace riglab
