#pragma once

#include "pdeform/poly.hpp"

#include <map>
#include <string>
#include <vector>

namespace pdeform {

// Polynomial multivector field on one chart: a sum over strictly increasing axis
// tuples A of coeff_A * d/dz^{A_1} ^ ... ^ d/dz^{A_p}. Coefficients live in `ctx`;
// the axes index a coordinate system of dimension `axis_dim`, which usually equals
// ctx->nvars() but may differ (pullback complexes carry target axes over source
// coefficients).
class Multivector {
public:
    Multivector() = default;
    Multivector(Ctx ctx, int axis_dim, int degree)
        : ctx_(std::move(ctx)), axis_dim_(axis_dim), degree_(degree) {}

    const Ctx& ctx() const { return ctx_; }
    int axis_dim() const { return axis_dim_; }
    int degree() const { return degree_; }
    bool is_zero() const;
    const std::map<std::vector<int>, LaurentPoly>& comps() const { return comps_; }

    // Adds c * d/dz^{axes}; axes in any order (sorted with the permutation sign,
    // repeated axes contribute zero).
    void add_term(std::vector<int> axes, const LaurentPoly& c);
    // Coefficient of a strictly increasing tuple (zero poly if absent).
    LaurentPoly coeff(const std::vector<int>& axes) const;

    Multivector operator+(const Multivector& o) const;
    Multivector operator-(const Multivector& o) const;
    Multivector operator-() const;
    Multivector operator*(const Rational& c) const;
    Multivector& operator+=(const Multivector& o);
    Multivector& operator-=(const Multivector& o);
    bool operator==(const Multivector& o) const;
    bool operator!=(const Multivector& o) const { return !(*this == o); }

    // Multiply every coefficient by a function (degree-0 wedge).
    Multivector scaled_by(const LaurentPoly& f) const;

    // Reinterpret coefficients in another context over the same variables.
    Multivector to_ctx(const Ctx& out) const;

    int max_abs_exponent() const;
    int max_param_degree() const;

    // "dz[1,3]: coeff; dz[2,3]: coeff" with 1-based axes; degree 0 prints the
    // bare polynomial; zero prints "0".
    std::string to_string() const;

private:
    void check_compatible(const Multivector& o) const;
    Ctx ctx_;
    int axis_dim_ = 0;
    int degree_ = 0;
    std::map<std::vector<int>, LaurentPoly> comps_;
};

// Exterior product. Degrees add; axis systems must agree.
Multivector wedge(const Multivector& P, const Multivector& Q);

// Schouten bracket of multivectors whose axes are the chart variables of their
// shared context. Degree of [P,Q] is p+q-1. Normalized so that:
//   - [P, f] evaluated on g equals P(f, g) for bivectors P and functions f, g,
//   - the graded antisymmetry / Jacobi / Leibniz identities hold,
//   - [Lambda, -] squares to zero whenever [Lambda, Lambda] = 0.
// Results are returned over a scratch (unbounded-window) context; callers convert.
Multivector schouten(const Multivector& P, const Multivector& Q);

// Evaluate a p-multivector on p functions: sum_A coeff_A det(d fns_k / d z^{A_l}).
LaurentPoly evaluate(const Multivector& P, const std::vector<LaurentPoly>& fns);

// Determinant of a small matrix of polynomials (permutation expansion).
LaurentPoly poly_det(const std::vector<std::vector<LaurentPoly>>& m, const Ctx& ctx);

// Polynomial map between charts: one component per TARGET variable, written in
// SOURCE variables.
struct ChartMap {
    Ctx src, tgt;
    std::vector<LaurentPoly> components;

    void check() const;
    // Pullback of a function on the target: g o phi, in source variables.
    LaurentPoly pullback(const LaurentPoly& g) const;
};

// (f o g): src = g.src, tgt = f.tgt.
ChartMap compose(const ChartMap& f, const ChartMap& g);

// True if phi o psi and psi o phi are the identity maps.
bool are_mutually_inverse(const ChartMap& phi, const ChartMap& psi);

// Inverse of phi when its parameter-degree-0 part has a known exact inverse
// `base_inverse`; the parameter-nilpotent correction is resolved by fixed-point
// iteration. Throws NoInverse if the result fails the exact two-sided check.
ChartMap formal_inverse(const ChartMap& phi, const ChartMap& base_inverse);

// Pushforward of a multivector along phi (with exact inverse psi):
// (phi_* P)_B = sum_A P_A det(d phi^{B_k} / d z^{A_l}) o psi, in target variables.
Multivector pushforward(const Multivector& P, const ChartMap& phi, const ChartMap& psi);

// Parse "dz[1,2]: x + y; dz[1,3]: 0" (1-based axes) / bare poly for degree 0 / "0".
Multivector parse_multivector(const std::string& text, const Ctx& ctx, int axis_dim,
                              int degree);

} // namespace pdeform
