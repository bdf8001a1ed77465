#include "riglab/dynamics.hpp"

#include "riglab/arith.hpp"
#include "riglab/threads.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace riglab::dyn {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// sin(pi t) for t in [0,1), evaluated at full relative accuracy near both
// endpoints (sin(pi t) = sin(pi (1-t))).
double sinpi01(double t) { return std::sin(kPi * (t <= 0.5 ? t : 1.0 - t)); }

// 1 - e(t) = -2i sin(pi t) e^{i pi t}; returns the pair (sin(pi t), e^{i pi t}).
struct HalfAngle {
    double sin_part;
    cplx phase;
};

HalfAngle one_minus_e(double t01) {
    HalfAngle h;
    h.sin_part = sinpi01(t01);
    h.phase = {std::cos(kPi * t01), std::sin(kPi * t01)};
    return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// FourierCocycle
// ---------------------------------------------------------------------------

FourierCocycle FourierCocycle::make(std::vector<std::pair<int, cplx>> modes, Rat eps, double C) {
    if (!(eps > 0)) throw RangeInvalid("cocycle: decay epsilon must be positive");
    std::sort(modes.begin(), modes.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    FourierCocycle phi;
    double eps_d = rat_to_double(eps);
    double derived = 0.0;
    for (const auto& [j, a] : modes) {
        if (j < 1) throw RangeInvalid("cocycle: modes are indexed by j >= 1");
        derived = std::max(derived, std::abs(a) * std::pow(double(j), 2.0 + eps_d));
    }
    phi.decay_constant = C < 0 ? derived : C;
    phi.decay_epsilon = eps;
    if (C >= 0 && derived > C * (1 + 1e-12))
        throw RangeInvalid("cocycle: coefficients violate |a_j| <= C j^{-2-eps}");
    phi.modes = std::move(modes);
    return phi;
}

double FourierCocycle::eval(Fr128 x) const {
    double v = 0.0;
    for (const auto& [j, a] : modes) {
        cplx e = unit_phase(x.mul_u64(static_cast<u64>(j)).to_double());
        v += 2.0 * (a * e).real();
    }
    return v;
}

double FourierCocycle::deriv_bound() const {
    double b = 0.0;
    for (const auto& [j, a] : modes) b += double(j) * std::abs(a);
    return 4.0 * kPi * b;
}

double FourierCocycle::tail_bound(u64 q) const {
    if (modes.empty()) return 0.0;
    double eps_d = rat_to_double(decay_epsilon);
    double J = double(max_mode());
    // sum_{j>J} j^{-2-eps} <= J^{-1-eps}/(1+eps), both signs
    return double(q) * 2.0 * decay_constant * std::pow(J, -1.0 - eps_d) / (1.0 + eps_d);
}

double birkhoff_sum_direct(const FourierCocycle& phi, Fr128 step, u64 r, Fr128 x) {
    if (r < 1) throw RangeInvalid("birkhoff_sum_direct: r >= 1 required");
    KahanSum acc;
    Fr128 cur = x;
    for (u64 i = 0; i < r; ++i) {
        acc.add(phi.eval(cur));
        cur = cur + step;
    }
    return acc.value();
}

double birkhoff_sum_closed(const FourierCocycle& phi, Fr128 step, u64 q, Fr128 x) {
    if (q < 1) throw RangeInvalid("birkhoff_sum_closed: q >= 1 required");
    KahanSum acc;
    for (const auto& [j, a] : phi.modes) {
        u64 ju = static_cast<u64>(j);
        HalfAngle den = one_minus_e(step.mul_u64(ju).to_double());
        if (den.sin_part == 0.0)
            throw PrecisionExhausted("birkhoff_sum_closed: mode-resonance at j = " +
                                     std::to_string(j));
        HalfAngle num = one_minus_e(step.mul_u64(ju * q).to_double());
        cplx g = (num.sin_part / den.sin_part) * num.phase * std::conj(den.phase);
        cplx e = unit_phase(x.mul_u64(ju).to_double());
        acc.add(2.0 * (a * e * g).real());
    }
    return acc.value();
}

double birkhoff_sum_signed(const FourierCocycle& phi, Fr128 step, i64 m, Fr128 x) {
    if (m == 0) return 0.0;
    if (m > 0) return birkhoff_sum_closed(phi, step, static_cast<u64>(m), x);
    u64 k = static_cast<u64>(-m);
    return -birkhoff_sum_closed(phi, step, k, x - step.mul_u64(k));
}

CertifiedSup sup_cocycle_norm(const FourierCocycle& phi, Fr128 step, u64 q, u64 grid) {
    if (grid < 2) throw RangeInvalid("sup_cocycle_norm: grid >= 2 required");
    CertifiedSup out;
    if (phi.is_zero()) return out;
    // Lipschitz bound for S_q(phi): 4 pi sum j |a_j| |G_j|
    double lip = 0.0;
    for (const auto& [j, a] : phi.modes) {
        u64 ju = static_cast<u64>(j);
        HalfAngle den = one_minus_e(step.mul_u64(ju).to_double());
        if (den.sin_part == 0.0)
            throw PrecisionExhausted("sup_cocycle_norm: mode-resonance at j = " +
                                     std::to_string(j));
        HalfAngle num = one_minus_e(step.mul_u64(ju * q).to_double());
        lip += double(j) * std::abs(a) * std::abs(num.sin_part / den.sin_part);
    }
    lip *= 4.0 * kPi;

    const std::size_t chunk = 4096;
    std::size_t nchunks = (grid + chunk - 1) / chunk;
    std::vector<double> chunk_max(nchunks, 0.0);
    parallel_chunks(grid, chunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
        double m = 0.0;
        for (std::size_t i = b; i < e; ++i)
            m = std::max(m, std::abs(birkhoff_sum_closed(phi, step, q, grid_point(i, grid))));
        chunk_max[ci] = m;
    });
    out.value = *std::max_element(chunk_max.begin(), chunk_max.end());
    out.slack = lip / (2.0 * double(grid));
    return out;
}

// ---------------------------------------------------------------------------
// System construction
// ---------------------------------------------------------------------------

const char* SystemSpec::name() const {
    switch (v.index()) {
        case 0: return "rotation";
        case 1: return "anzai";
        case 2: return "iet";
        case 3: return "special-flow";
        default: return "rokhlin";
    }
}

std::optional<Fr128> SystemSpec::base_step() const {
    if (std::holds_alternative<Rotation>(v)) return std::get<Rotation>(v).step;
    if (std::holds_alternative<Anzai>(v)) return std::get<Anzai>(v).step;
    if (std::holds_alternative<SpecialFlow>(v)) return std::get<SpecialFlow>(v).step;
    if (std::holds_alternative<Rokhlin>(v)) return std::get<Rokhlin>(v).step;
    return std::nullopt;
}

SystemSpec make_rotation(const Alpha& alpha) {
    return SystemSpec{Rotation{alpha, Fr128::from_alpha(alpha)}};
}

SystemSpec make_anzai(const Alpha& alpha, FourierCocycle phi) {
    return SystemSpec{Anzai{alpha, Fr128::from_alpha(alpha), std::move(phi)}};
}

SystemSpec make_iet(const std::vector<Rat>& lengths, const std::vector<int>& perm) {
    const int d = static_cast<int>(lengths.size());
    if (d < 1) throw RangeInvalid("iet: at least one interval");
    if (static_cast<int>(perm.size()) != d) throw RangeInvalid("iet: permutation size mismatch");
    std::vector<char> hit(d, 0);
    for (int p : perm) {
        if (p < 1 || p > d || hit[p - 1]) throw RangeInvalid("iet: permutation is not a bijection");
        hit[p - 1] = 1;
    }
    Rat total = 0;
    for (const Rat& l : lengths) {
        if (!(l > 0)) throw RangeInvalid("iet: lengths must be positive");
        total += l;
    }
    Rat gap = total - 1;
    if (gap < 0) gap = -gap;
    if (gap > Rat(1, BigInt(1) << 64))
        throw RangeInvalid("iet: lengths must sum to 1 within 2^-64");

    Iet iet;
    iet.lengths = lengths;
    iet.perm = perm;
    iet.d = d;
    // cuts from cumulative sums; the final cumulative wraps to 0 exactly
    iet.cut.resize(d);
    Rat acc = 0;
    for (int i = 0; i < d; ++i) {
        iet.cut[i] = i == 0 ? Fr128{} : Fr128::from_rational(acc);
        acc += lengths[i];
    }
    for (int i = 1; i < d; ++i)
        if (!(iet.cut[i - 1].v < iet.cut[i].v))
            throw RangeInvalid("iet: cuts collapse at this resolution");
    // piece lengths in fixed point (exact differences, last one wraps)
    std::vector<Fr128> len(d);
    for (int i = 0; i < d; ++i) {
        Fr128 next = (i + 1 < d) ? iet.cut[i + 1] : Fr128{};
        len[i] = next - iet.cut[i];
    }
    // image starts per slot, slot k holds piece sigma(k) = perm^{-1}(k)
    std::vector<int> sigma(d);
    for (int i = 0; i < d; ++i) sigma[perm[i] - 1] = i;
    std::vector<Fr128> img_start_piece(d);
    Fr128 run{};
    for (int k = 0; k < d; ++k) {
        img_start_piece[sigma[k]] = run;
        run = run + len[sigma[k]];
    }
    iet.trans.resize(d);
    for (int i = 0; i < d; ++i) iet.trans[i] = img_start_piece[i] - iet.cut[i];
    iet.img_start = std::move(img_start_piece);
    iet.slot_piece = std::move(sigma);
    return SystemSpec{std::move(iet)};
}

SystemSpec make_special_flow(const Alpha& alpha, FourierCocycle dev, u64 verify_grid) {
    SpecialFlow fl{alpha, Fr128::from_alpha(alpha), std::move(dev), 1.0};
    if (!fl.dev.is_zero()) {
        double m = 2.0;
        for (u64 i = 0; i < verify_grid; ++i)
            m = std::min(m, fl.roof(grid_point(i, verify_grid)));
        m -= fl.dev.deriv_bound() / (2.0 * double(verify_grid));
        if (!(m > 0)) throw RangeInvalid("special flow: roof minimum not certified positive");
        fl.roof_min = m;
    }
    return SystemSpec{std::move(fl)};
}

SystemSpec make_rokhlin(const Alpha& alpha, FourierCocycle f, std::vector<double> velocity) {
    if (velocity.empty() || velocity.size() > 3)
        throw RangeInvalid("rokhlin: fiber dimension must be 1..3");
    return SystemSpec{Rokhlin{alpha, Fr128::from_alpha(alpha), std::move(f), std::move(velocity)}};
}

// ---------------------------------------------------------------------------
// Maps
// ---------------------------------------------------------------------------

Point flow_time(const SpecialFlow& fl, const Point& p, double t) {
    // tolerance absorbs last-ulp disagreement between the closed-form
    // crossing bookkeeping and a fresh roof evaluation
    if (p.s < -1e-9 || p.s >= fl.roof(p.x) + 1e-9)
        throw RangeInvalid("special flow: point-outside-space (s not under the roof)");
    const double target = p.s + t;
    // n = largest integer with S_n(f)(x) <= target, f = 1 + dev
    auto S = [&](i64 n) { return double(n) + birkhoff_sum_signed(fl.dev, fl.step, n, p.x); };
    i64 n = static_cast<i64>(std::floor(target));
    while (S(n) > target) --n;
    while (S(n + 1) <= target) ++n;
    Point out;
    out.x = n >= 0 ? p.x + fl.step.mul_u64(static_cast<u64>(n))
                   : p.x - fl.step.mul_u64(static_cast<u64>(-n));
    out.s = target - S(n);
    return out;
}

Point apply(const SystemSpec& sys, const Point& p) {
    Point out = p;
    if (const auto* rot = std::get_if<Rotation>(&sys.v)) {
        out.x = p.x + rot->step;
    } else if (const auto* an = std::get_if<Anzai>(&sys.v)) {
        out.x = p.x + an->step;
        out.extra[0] = p.extra[0] + Fr128::from_double(an->phi.eval(p.x));
    } else if (const auto* iet = std::get_if<Iet>(&sys.v)) {
        out.x = p.x + iet->trans[iet->piece_of(p.x)];
    } else if (const auto* fl = std::get_if<SpecialFlow>(&sys.v)) {
        out = flow_time(*fl, p, 1.0);
    } else {
        const auto& rk = std::get<Rokhlin>(sys.v);
        out.x = p.x + rk.step;
        double fval = rk.f.eval(p.x);
        for (std::size_t i = 0; i < rk.velocity.size(); ++i)
            out.extra[i] = p.extra[i] + Fr128::from_double(fval * rk.velocity[i]);
    }
    return out;
}

Point apply_inverse(const SystemSpec& sys, const Point& p) {
    Point out = p;
    if (const auto* rot = std::get_if<Rotation>(&sys.v)) {
        out.x = p.x - rot->step;
    } else if (const auto* an = std::get_if<Anzai>(&sys.v)) {
        out.x = p.x - an->step;
        out.extra[0] = p.extra[0] - Fr128::from_double(an->phi.eval(out.x));
    } else if (const auto* iet = std::get_if<Iet>(&sys.v)) {
        // locate the image slot containing p.x, then undo its translation
        int piece = iet->slot_piece[0];
        for (int k = iet->d - 1; k >= 1; --k) {
            if (p.x.v >= iet->img_start[iet->slot_piece[k]].v) {
                piece = iet->slot_piece[k];
                break;
            }
        }
        out.x = p.x - iet->trans[piece];
    } else if (const auto* fl = std::get_if<SpecialFlow>(&sys.v)) {
        out = flow_time(*fl, p, -1.0);
    } else {
        const auto& rk = std::get<Rokhlin>(sys.v);
        out.x = p.x - rk.step;
        double fval = rk.f.eval(out.x);
        for (std::size_t i = 0; i < rk.velocity.size(); ++i)
            out.extra[i] = p.extra[i] - Fr128::from_double(fval * rk.velocity[i]);
    }
    return out;
}

std::vector<Point> orbit(const SystemSpec& sys, const Point& start, u64 n) {
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(n) + 1);
    pts.push_back(start);
    Point cur = start;
    for (u64 i = 0; i < n; ++i) {
        cur = apply(sys, cur);
        pts.push_back(cur);
    }
    return pts;
}

double dist(const SystemSpec& sys, const Point& a, const Point& b) {
    double d = a.x.dist_to(b.x);
    if (std::holds_alternative<Anzai>(sys.v)) {
        d += a.extra[0].dist_to(b.extra[0]);
    } else if (std::holds_alternative<SpecialFlow>(sys.v)) {
        d += std::abs(a.s - b.s);
    } else if (const auto* rk = std::get_if<Rokhlin>(&sys.v)) {
        for (std::size_t i = 0; i < rk->velocity.size(); ++i) d += a.extra[i].dist_to(b.extra[i]);
    }
    return d;
}

// ---------------------------------------------------------------------------
// Observables
// ---------------------------------------------------------------------------

Observable Observable::parse(const std::string& text) {
    Observable o;
    if (text == "one") {
        o.kind = Kind::one;
        return o;
    }
    if (text == "dist0") {
        o.kind = Kind::dist_zero;
        return o;
    }
    auto read_mode = [&](std::size_t off) {
        int m = std::stoi(text.substr(off));
        if (m < 1) throw UsageError("observable: mode must be >= 1");
        return m;
    };
    try {
        if (text.rfind("fiber", 0) == 0) {
            o.kind = Kind::fourier_fiber;
            o.mode = read_mode(5);
            return o;
        }
        if (!text.empty() && text[0] == 'e') {
            o.kind = Kind::fourier_base;
            o.mode = read_mode(text.size() > 1 && text[1] == '_' ? 2 : 1);
            return o;
        }
    } catch (const std::invalid_argument&) {
    }
    throw UsageError("observable-unsupported: " + text + " (use e<k>, fiber<k>, dist0, one)");
}

std::string Observable::name() const {
    switch (kind) {
        case Kind::one: return "one";
        case Kind::dist_zero: return "dist0";
        case Kind::fourier_base: return "e" + std::to_string(mode);
        default: return "fiber" + std::to_string(mode);
    }
}

cplx Observable::eval(const Point& p) const {
    switch (kind) {
        case Kind::one: return {1.0, 0.0};
        case Kind::dist_zero: return {p.x.dist_zero(), 0.0};
        case Kind::fourier_base:
            return unit_phase(p.x.mul_u64(static_cast<u64>(mode)).to_double());
        default: return unit_phase(p.extra[0].mul_u64(static_cast<u64>(mode)).to_double());
    }
}

// ---------------------------------------------------------------------------
// Rigidity metrics
// ---------------------------------------------------------------------------

namespace {

// Distance of a real displacement to the nearest integer (circle metric on
// a floating increment).
double circ_dist_real(double t) {
    double f = t - std::floor(t);
    return std::min(f, 1.0 - f);
}

// Grid points within 1/grid of an exchange cut sit in a discontinuity
// shadow and are excluded from sup statistics.  Empty filter otherwise.
std::function<bool(u64)> iet_shadow_filter(const SystemSpec& sys, u64 grid) {
    const auto* iet = std::get_if<Iet>(&sys.v);
    if (!iet || iet->d < 2) return {};
    Fr128 h = grid_point(1, grid);
    std::vector<Fr128> cuts(iet->cut.begin() + 1, iet->cut.end());
    return [cuts, h, grid](u64 i) {
        Fr128 x = grid_point(i, grid);
        for (const Fr128& c : cuts)
            if ((x - c).dist_zero_raw() < h.v) return false;
        return true;
    };
}

struct SupL2 {
    double sup = 0.0;
    double sum_sq = 0.0;  // combined in chunk order
    u64 count = 0;
};

// Deterministic grid reduction: fixed chunks, per-chunk Kahan, ordered merge.
SupL2 grid_sup_l2(u64 grid, const std::function<double(u64)>& defect,
                  const std::function<bool(u64)>& include = {}) {
    const std::size_t chunk = 4096;
    std::size_t n = static_cast<std::size_t>(grid);
    std::size_t nchunks = (n + chunk - 1) / chunk;
    std::vector<SupL2> parts(nchunks);
    parallel_chunks(n, chunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
        SupL2 loc;
        KahanSum sq;
        for (std::size_t i = b; i < e; ++i) {
            if (include && !include(i)) continue;
            double d = defect(i);
            loc.sup = std::max(loc.sup, d);
            sq.add(d * d);
            ++loc.count;
        }
        loc.sum_sq = sq.value();
        parts[ci] = loc;
    });
    SupL2 out;
    KahanSum total;
    for (const SupL2& part : parts) {
        out.sup = std::max(out.sup, part.sup);
        total.add(part.sum_sq);
        out.count += part.count;
    }
    out.sum_sq = total.value();
    return out;
}

}  // namespace

RigidityReport rigidity_defect(const SystemSpec& sys, u64 q, u64 grid) {
    if (q < 1) throw RangeInvalid("rigidity_defect: q >= 1 required");
    if (grid < 2) throw RangeInvalid("rigidity_defect: grid >= 2 required");
    RigidityReport rep;
    rep.q = q;
    rep.grid = grid;

    if (const auto* rot = std::get_if<Rotation>(&sys.v)) {
        // every point is displaced by exactly ||q alpha||
        Fr128 disp = rot->step.mul_u64(q);
        rep.sup_defect = disp.dist_zero();
        rep.l2_defect = disp.dist_zero();
        rep.sup_defect_exact = disp.dist_zero_rational();
        return rep;
    }
    if (const auto* an = std::get_if<Anzai>(&sys.v)) {
        Fr128 dispx = an->step.mul_u64(q);
        if (an->phi.is_zero()) {
            rep.sup_defect = dispx.dist_zero();
            rep.l2_defect = dispx.dist_zero();
            rep.sup_defect_exact = dispx.dist_zero_rational();
            return rep;
        }
        double dx = dispx.dist_zero();
        SupL2 r = grid_sup_l2(grid, [&](u64 i) {
            double sq = birkhoff_sum_closed(an->phi, an->step, q, grid_point(i, grid));
            return dx + circ_dist_real(sq);
        });
        rep.sup_defect = r.sup;
        rep.l2_defect = std::sqrt(r.sum_sq / double(r.count));
        return rep;
    }
    if (std::holds_alternative<Iet>(sys.v)) {
        auto include = iet_shadow_filter(sys, grid);
        SupL2 r = grid_sup_l2(
            grid,
            [&](u64 i) {
                Point p{grid_point(i, grid), {}, 0.0};
                Point cur = p;
                for (u64 k = 0; k < q; ++k) cur = apply(sys, cur);
                return cur.x.dist_to(p.x);
            },
            include);
        rep.sup_defect = r.sup;
        rep.l2_defect = r.count ? std::sqrt(r.sum_sq / double(r.count)) : 0.0;
        rep.excluded_points = grid - r.count;
        return rep;
    }
    if (const auto* fl = std::get_if<SpecialFlow>(&sys.v)) {
        const u64 gs = 16;  // roof-direction resolution
        SupL2 r = grid_sup_l2(grid * gs, [&](u64 idx) {
            u64 i = idx / gs, j = idx % gs;
            Point p;
            p.x = grid_point(i, grid);
            p.s = fl->roof(p.x) * (double(j) + 0.5) / double(gs);
            Point img = flow_time(*fl, p, double(q));
            return img.x.dist_to(p.x) + std::abs(img.s - p.s);
        });
        rep.sup_defect = r.sup;
        rep.l2_defect = std::sqrt(r.sum_sq / double(r.count));
        return rep;
    }
    const auto& rk = std::get<Rokhlin>(sys.v);
    Fr128 dispx = rk.step.mul_u64(q);
    if (rk.f.is_zero()) {
        rep.sup_defect = dispx.dist_zero();
        rep.l2_defect = dispx.dist_zero();
        rep.sup_defect_exact = dispx.dist_zero_rational();
        return rep;
    }
    double dx = dispx.dist_zero();
    SupL2 r = grid_sup_l2(grid, [&](u64 i) {
        double sq = birkhoff_sum_closed(rk.f, rk.step, q, grid_point(i, grid));
        double d = dx;
        for (double v : rk.velocity) d += circ_dist_real(sq * v);
        return d;
    });
    rep.sup_defect = r.sup;
    rep.l2_defect = std::sqrt(r.sum_sq / double(r.count));
    return rep;
}

u64 pr_window(u64 q, const Rat& delta) {
    if (q < 2) throw RangeInvalid("pr_window: q >= 2 required");
    if (!(delta > 0 && delta < 1)) throw RangeInvalid("pr_window: delta in (0,1) required");
    BigInt u = numerator(delta), v = denominator(delta);
    if (u > 64) throw RangeInvalid("pr_window: delta numerator too large");
    BigInt w = floor_root(pow_big(BigInt(q), u.convert_to<unsigned>()), v.convert_to<unsigned>());
    return w.convert_to<u64>();
}

namespace {

// T^m for signed m.  Closed form everywhere except IETs, which iterate.
Point power_map(const SystemSpec& sys, const Point& p, i64 m) {
    if (m == 0) return p;
    Point out = p;
    if (const auto* rot = std::get_if<Rotation>(&sys.v)) {
        out.x = m > 0 ? p.x + rot->step.mul_u64(static_cast<u64>(m))
                      : p.x - rot->step.mul_u64(static_cast<u64>(-m));
        return out;
    }
    if (const auto* an = std::get_if<Anzai>(&sys.v)) {
        out.x = m > 0 ? p.x + an->step.mul_u64(static_cast<u64>(m))
                      : p.x - an->step.mul_u64(static_cast<u64>(-m));
        out.extra[0] =
            p.extra[0] + Fr128::from_double(birkhoff_sum_signed(an->phi, an->step, m, p.x));
        return out;
    }
    if (std::holds_alternative<Iet>(sys.v)) {
        Point cur = p;
        if (m > 0)
            for (i64 k = 0; k < m; ++k) cur = apply(sys, cur);
        else
            for (i64 k = 0; k < -m; ++k) cur = apply_inverse(sys, cur);
        return cur;
    }
    if (const auto* fl = std::get_if<SpecialFlow>(&sys.v)) return flow_time(*fl, p, double(m));
    const auto& rk = std::get<Rokhlin>(sys.v);
    out.x = m > 0 ? p.x + rk.step.mul_u64(static_cast<u64>(m))
                  : p.x - rk.step.mul_u64(static_cast<u64>(-m));
    double sf = birkhoff_sum_signed(rk.f, rk.step, m, p.x);
    for (std::size_t i = 0; i < rk.velocity.size(); ++i)
        out.extra[i] = p.extra[i] + Fr128::from_double(sf * rk.velocity[i]);
    return out;
}

Point grid_phase_point(const SystemSpec& sys, u64 i, u64 grid, u64 gs) {
    Point p;
    if (const auto* fl = std::get_if<SpecialFlow>(&sys.v)) {
        p.x = grid_point(i / gs, grid);
        p.s = fl->roof(p.x) * (double(i % gs) + 0.5) / double(gs);
    } else {
        p.x = grid_point(i, grid);
    }
    return p;
}

}  // namespace

RigidityReport pr_sum(const SystemSpec& sys, const Observable& f, u64 q, const Rat& delta,
                      u64 grid, Functional functional) {
    if (grid < 2) throw RangeInvalid("pr_sum: grid >= 2 required");
    const u64 W = pr_window(q, delta);
    RigidityReport rep;
    rep.q = q;
    rep.grid = grid;
    rep.delta = delta;
    rep.functional = functional;

    const bool flow = std::holds_alternative<SpecialFlow>(sys.v);
    const u64 gs = flow ? 16 : 1;
    const u64 npts = grid * gs;

    KahanSum total;
    for (i64 j = -static_cast<i64>(W); j <= static_cast<i64>(W); ++j) {
        if (j == 0) continue;  // zero contribution
        i64 m = j * static_cast<i64>(q);
        if (functional == Functional::l2_function_norm) {
            const std::size_t chunk = 4096;
            std::size_t nchunks = (npts + chunk - 1) / chunk;
            std::vector<double> part(nchunks, 0.0);
            parallel_chunks(npts, chunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
                KahanSum acc;
                for (std::size_t i = b; i < e; ++i) {
                    Point p = grid_phase_point(sys, i, grid, gs);
                    cplx diff = f.eval(power_map(sys, p, m)) - f.eval(p);
                    acc.add(std::norm(diff));
                }
                part[ci] = acc.value();
            });
            KahanSum mean;
            for (double v : part) mean.add(v);
            total.add(mean.value() / double(npts));
        } else {
            SupL2 r = grid_sup_l2(
                npts,
                [&](u64 i) {
                    Point p = grid_phase_point(sys, i, grid, gs);
                    return dist(sys, power_map(sys, p, m), p);
                },
                iet_shadow_filter(sys, grid));
            total.add(r.sup);
        }
    }
    rep.pr_sum = total.value();
    return rep;
}

std::vector<RigidityHit> iet_rigidity_search(const SystemSpec& sys, u64 q_max, double tol,
                                             u64 grid, u64 dj_filter) {
    if (q_max < 2) throw RangeInvalid("iet_rigidity_search: q_max >= 2 required");
    if (grid < 2) throw RangeInvalid("iet_rigidity_search: grid >= 2 required");
    std::vector<Fr128> start(grid), cur(grid);
    for (u64 i = 0; i < grid; ++i) start[i] = cur[i] = grid_point(i, grid);
    // discontinuity shadows as in rigidity_defect
    std::vector<char> inc(grid, 1);
    if (auto filter = iet_shadow_filter(sys, grid))
        for (u64 i = 0; i < grid; ++i) inc[i] = filter(i) ? 1 : 0;
    u64 n_inc = 0;
    for (char v : inc) n_inc += v;
    if (n_inc == 0) throw RangeInvalid("iet_rigidity_search: all grid points excluded");

    std::vector<RigidityHit> hits;
    const std::size_t chunk = 4096;
    std::size_t nchunks = (grid + chunk - 1) / chunk;
    std::vector<double> part(nchunks);
    for (u64 q = 1; q <= q_max; ++q) {
        parallel_chunks(grid, chunk, [&](std::size_t ci, std::size_t b, std::size_t e) {
            KahanSum acc;
            for (std::size_t i = b; i < e; ++i) {
                Point p{cur[i], {}, 0.0};
                cur[i] = apply(sys, p).x;
                if (!inc[i]) continue;
                double d = cur[i].dist_to(start[i]);
                acc.add(d * d);
            }
            part[ci] = acc.value();
        });
        KahanSum sum;
        for (double v : part) sum.add(v);
        double l2 = std::sqrt(sum.value() / double(n_inc));
        if (l2 < tol && (dj_filter == 0 || arith::in_dj(q, dj_filter))) hits.push_back({q, l2});
    }
    return hits;
}

}  // namespace riglab::dyn
