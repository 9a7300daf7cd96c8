#pragma once

#include "pdeform/multivector.hpp"

namespace pdeform {

// Lichnerowicz differential d = [Lambda, -] on one chart.
inline Multivector lichnerowicz_d(const Multivector& lambda, const Multivector& u) {
    return schouten(lambda, u);
}

// Multiderivation evaluation of a mixed multivector Q (axes = target coordinates,
// coefficients in the source chart of f) on target functions, pulled back along f:
//   Q(a_1..a_q) = sum_A coeff_A * f^#( det(d a_k / d w^{A_l}) ).
LaurentPoly mixed_evaluate(const Multivector& Q, const std::vector<LaurentPoly>& args,
                           const ChartMap& f);

// Differential of the pullback complex f* T_Y on one chart pair:
//   pi(Q)(a_1..a_{q+1}) =
//     sum_k (-1)^{q-k} Lambda( Q(a_1..^k..a_{q+1}), f^# a_k )
//     - (-1)^{q-1} sum_{i<j} (-1)^{i+j-1} Q( Pi(a_i,a_j), a_1..^i..^j..a_{q+1} )
// with 0-based k, i, j; a's ranging over target coordinates; Lambda the source
// bivector, Pi the target bivector. Coefficients are read off by evaluating at
// coordinate tuples.
Multivector pi_f(const Multivector& Q, const Multivector& lambda_src,
                 const Multivector& pi_tgt, const ChartMap& f);

// Chain map F : T_X -> f* T_Y, F(P)(a_1..a_q) = P(f^# a_1 .. f^# a_q).
Multivector chain_map_F(const Multivector& P, const ChartMap& f);

// Chain map f* : T_Y -> f* T_Y, composing each coefficient with f.
Multivector pullback_mv(const Multivector& Q, const ChartMap& f);

} // namespace pdeform
