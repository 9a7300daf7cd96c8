#pragma once

#include "pdeform/cech.hpp"

namespace pdeform {

// One canonical representative of a PD-type class: the cochain tuple plus, for
// family versions, the coefficients of the family directions.
struct PDClassRep {
    CochainList parts;
    std::vector<Rational> thetas;
};

struct PDReport {
    std::string name; // "PD", "PD1", "PD_family"
    int dim = 0;
    int window = 0;
    bool audit_ok = true;
    int dim_enlarged = -1;
    std::vector<PDClassRep> basis;
    SubquotientResult detail;
    Space dom;      // cochain part of the domain at `window`
    int ntheta = 0; // appended scalar columns (family directions)

    std::string summary() const; // "<name> dim=<n>" + basis dump
};

// PD: tuples (v, t, lambda) in C^0(f*T_Y) + C^1(T_X) + C^0(^2 T_X) with
//   -delta v = F(t),  pi(v) = F(lambda),  delta t = 0,
//   delta lambda + [Lambda0, t] = 0,  [Lambda0, lambda] = 0,
// modulo (F(w), -delta w, [Lambda0, w]) for w in C^0(T_X).
PDReport pd_space(const PoissonMapData& f, const HyperOptions& opt);

// PD^1: tuples (xi, eta, s, r, w) in
// C^1(f*T_Y) + C^0(^2 f*T_Y) + C^2(T_X) + C^1(^2 T_X) + C^0(^3 T_X) with
//   delta xi = F(s),  delta eta + pi(xi) = F(r),  pi(eta) = F(w),
//   [Lambda0, w] = 0,  -delta w + [Lambda0, r] = 0,  -delta r + [Lambda0, s] = 0,
//   delta s = 0,
// modulo (F(u) - delta a, F(c) + pi(a), delta u, delta c + [Lambda0, u], [Lambda0, c]).
PDReport pd1_space(const PoissonMapData& f, const HyperOptions& opt);

// A tangent direction of a family: a 1-cocycle (rho, gamma) of the pullback total
// complex, slots C^1(f*T_Y) and C^0(^2 f*T_Y).
struct FamilyDirection {
    Cochain rho;   // slot (PullbackY, 1, 1)
    Cochain gamma; // slot (PullbackY, 0, 2)
};

// PD of a family: unknowns (tau, rho, lambda, theta_1..theta_k) with
//   -delta tau = F(rho) + sum_v theta_v rho_v,
//   pi(tau) = F(lambda) + sum_v theta_v gamma_v,
//   delta rho = 0,  delta lambda + [Lambda0, rho] = 0,  [Lambda0, lambda] = 0,
// modulo (F(xi), -delta xi, [Lambda0, xi], 0). Throws NotACocycle if a direction
// fails the 1-cocycle relations of the pullback total complex.
PDReport pd_family_space(const PoissonMapData& f, const std::vector<FamilyDirection>& dirs,
                         const HyperOptions& opt);

// Dimension of H^n of the mapping cone of F (internal cross-check for pd_space
// (n = 1) and pd1_space (n = 2); sign conventions differ, dimensions agree).
int cone_dim(const PoissonMapData& f, int n, const HyperOptions& opt);

// The defining operators, exposed on single cochains so that other solvers can
// assemble the same linear systems. Rows of the same output slot must be summed;
// a tuple is a cocycle / coboundary exactly when the summed rows vanish.
CochainList pd_relation_rows(const CechContext& cx, const Cochain& e);
CochainList pd_coboundary_rows(const CechContext& cx, const Cochain& w);
CochainList pd1_relation_rows(const CechContext& cx, const Cochain& e);
CochainList pd1_coboundary_rows(const CechContext& cx, const Cochain& e);

} // namespace pdeform
