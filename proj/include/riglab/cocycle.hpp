#pragma once

// Real-valued trigonometric cocycles phi(x) = sum_{1<=|j|<=J} a_j e_j(x)
// with a_{-j} = conj(a_j), a_0 = 0, and a decay certificate
// |a_j| <= C |j|^{-2-eps}.  Birkhoff sums S_q(phi) come in two independent
// evaluators: the direct q-term sum and the geometric closed form
// S_q(e_j)(x) = e_j(x) (1 - e_j(q a)) / (1 - e_j(a)).

#include "riglab/common.hpp"
#include "riglab/frac128.hpp"

namespace riglab::dyn {

struct FourierCocycle {
    // modes for j >= 1 only; the conjugate mirror is implicit
    std::vector<std::pair<int, cplx>> modes;
    Rat decay_epsilon = Rat(1, 2);
    double decay_constant = 0.0;

    static FourierCocycle zero() { return FourierCocycle{}; }
    // Validates |a_j| <= C j^{-2-eps}; C < 0 means "derive the smallest C".
    static FourierCocycle make(std::vector<std::pair<int, cplx>> modes, Rat eps,
                               double C = -1.0);

    bool is_zero() const { return modes.empty(); }
    int max_mode() const { return modes.empty() ? 0 : modes.back().first; }

    double eval(Fr128 x) const;
    // sup |phi'| over T (mode-wise bound 4 pi sum j |a_j|).
    double deriv_bound() const;
    // Tail bound q * sum_{|j|>J} C |j|^{-2-eps} for the stored certificate.
    double tail_bound(u64 q) const;
};

// |S_q| evaluated on a grid plus a Lipschitz slack certifying the true sup.
struct CertifiedSup {
    double value = 0.0;
    double slack = 0.0;
};

// Direct r-term sum phi(x) + phi(x+a) + ... + phi(x+(r-1)a), compensated.
double birkhoff_sum_direct(const FourierCocycle& phi, Fr128 step, u64 r, Fr128 x);

// Closed form over stored modes; throws on mode resonance (e_j(a) = 1).
double birkhoff_sum_closed(const FourierCocycle& phi, Fr128 step, u64 q, Fr128 x);

// Signed power: m < 0 uses S_{-m}(phi)(x - |m| a) = -S_m.
double birkhoff_sum_signed(const FourierCocycle& phi, Fr128 step, i64 m, Fr128 x);

// max |S_q(phi)| over the uniform grid, with slack = deriv bound / (2 grid).
CertifiedSup sup_cocycle_norm(const FourierCocycle& phi, Fr128 step, u64 q, u64 grid);

}  // namespace riglab::dyn
