#pragma once

// Simulators for the dynamical systems under study: circle rotations, Anzai
// skew products on T^2, interval exchange transformations, time-1 maps of
// special flows over rotations, and Rokhlin extensions with linear torus
// fiber flows.  Circle coordinates live in 128-bit fixed point (see
// frac128.hpp); only flow roof coordinates are floating.

#include "riglab/cocycle.hpp"
#include "riglab/common.hpp"
#include "riglab/frac128.hpp"
#include "riglab/surd.hpp"

#include <optional>
#include <variant>

namespace riglab::dyn {

struct Point {
    Fr128 x{};                  // base circle coordinate
    std::array<Fr128, 3> extra{};  // Anzai y in extra[0]; Rokhlin fiber coords
    double s = 0.0;             // roof coordinate (special flows)
};

struct Rotation {
    Alpha alpha;
    Fr128 step;
};

struct Anzai {
    Alpha alpha;
    Fr128 step;
    FourierCocycle phi;
};

struct Iet {
    std::vector<Rat> lengths;       // as supplied
    std::vector<int> perm;          // 1-based image position of each piece
    std::vector<Fr128> cut;         // cut[i] = start of piece i (cut[0] = 0)
    std::vector<Fr128> trans;       // translation of piece i (wrapping)
    std::vector<Fr128> img_start;   // image start of piece i
    std::vector<int> slot_piece;    // piece occupying image slot k
    int d = 0;

    int piece_of(Fr128 x) const {
        int i = d - 1;
        while (i > 0 && x.v < cut[i].v) --i;
        return i;
    }
};

// Roof f = 1 + dev with a verified positive minimum; time-1 map on
// {(x, s) : 0 <= s < f(x)}.
struct SpecialFlow {
    Alpha alpha;
    Fr128 step;
    FourierCocycle dev;
    double roof_min = 1.0;  // certified grid min minus Lipschitz slack

    double roof(Fr128 x) const { return 1.0 + dev.eval(x); }
};

// (x, y) -> (x + a, y + f(x) v mod 1) on T x T^k, k = velocity.size().
struct Rokhlin {
    Alpha alpha;
    Fr128 step;
    FourierCocycle f;
    std::vector<double> velocity;  // k <= 3
};

struct SystemSpec {
    std::variant<Rotation, Anzai, Iet, SpecialFlow, Rokhlin> v;

    const char* name() const;
    // Base rotation step where one exists (all variants except Iet).
    std::optional<Fr128> base_step() const;
};

SystemSpec make_rotation(const Alpha& alpha);
SystemSpec make_anzai(const Alpha& alpha, FourierCocycle phi);
SystemSpec make_iet(const std::vector<Rat>& lengths, const std::vector<int>& perm);
SystemSpec make_special_flow(const Alpha& alpha, FourierCocycle dev, u64 verify_grid = 1 << 16);
SystemSpec make_rokhlin(const Alpha& alpha, FourierCocycle f, std::vector<double> velocity);

Point apply(const SystemSpec& sys, const Point& p);
Point apply_inverse(const SystemSpec& sys, const Point& p);
std::vector<Point> orbit(const SystemSpec& sys, const Point& start, u64 n);

// Phase-space metric: circle distance on each toral coordinate, plus
// |s - s'| for flows (D = ||x-x'|| + |s-s'| on the fundamental domain).
double dist(const SystemSpec& sys, const Point& a, const Point& b);

// Time-t map of the special flow (t may be negative; |t| arbitrary).
Point flow_time(const SpecialFlow& fl, const Point& p, double t);

enum class Functional { l2_function_norm, topological_distance };
inline const char* functional_name(Functional f) {
    return f == Functional::l2_function_norm ? "L2_function_norm" : "topological_distance";
}

struct Observable {
    enum class Kind { one, fourier_base, fourier_fiber, dist_zero };
    Kind kind = Kind::fourier_base;
    int mode = 1;

    static Observable parse(const std::string& text);
    std::string name() const;
    cplx eval(const Point& p) const;
};

struct RigidityReport {
    u64 q = 0;
    std::optional<double> sup_defect;
    std::optional<double> l2_defect;
    std::optional<double> pr_sum;
    std::optional<Rat> delta;
    u64 grid = 0;
    std::optional<Functional> functional;
    // Exact displacement (fraction of 1) when the defect is grid-constant
    // and computed in fixed point (rotations, IETs, degenerate skews).
    std::optional<Rat> sup_defect_exact;
    u64 excluded_points = 0;  // IET grid points in a discontinuity shadow
};

// sup / RMS over the grid of d(T^q x, x).  For IETs, grid points within
// 1/grid of an exchange cut are excluded from the statistics and counted.
RigidityReport rigidity_defect(const SystemSpec& sys, u64 q, u64 grid);

// Window W = floor(q^delta) by exact integer root extraction; j = -W..W.
u64 pr_window(u64 q, const Rat& delta);

// functional = L2: sum_j mean_grid |f(T^{jq} p) - f(p)|^2;
// functional = topological: sum_j max_grid d(T^{jq} p, p).
RigidityReport pr_sum(const SystemSpec& sys, const Observable& f, u64 q, const Rat& delta,
                      u64 grid, Functional functional);

struct RigidityHit {
    u64 q = 0;
    double l2_defect = 0.0;
};

// All q <= q_max with L2 defect below tol, optionally filtered to D_j.
std::vector<RigidityHit> iet_rigidity_search(const SystemSpec& iet, u64 q_max, double tol,
                                             u64 grid, u64 dj_filter = 0);

}  // namespace riglab::dyn
