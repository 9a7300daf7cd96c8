#pragma once

#include "pdeform/error.hpp"
#include "pdeform/rational.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pdeform {

// Truncated parameter ring Q[t1..tr] / (monomials of total degree > mu, ideal gens).
struct ParamRing {
    std::vector<std::string> params;
    int order = 0; // mu
    std::vector<std::vector<int>> ideal_gens; // monomial generators, exponent vectors

    int r() const { return static_cast<int>(params.size()); }
    bool allows(const std::vector<int>& pexp) const;
    // All allowed monomials (including 1), sorted in the global monomial order.
    std::vector<std::vector<int>> monomials() const;
    bool operator==(const ParamRing& o) const;
};

// Small extension 0 -> (tau) -> total -> quotient -> 0 with one-dimensional kernel.
struct SmallExtension {
    ParamRing total;
    ParamRing quotient;
    std::vector<int> tau; // the kernel-generating parameter monomial in `total`

    void check() const; // verifies (tau) is 1-dimensional and m·tau = 0
};

// Factors the climb k <- ... <- A into one-dimensional small extensions, ordered so
// that each step adds exactly one allowed monomial; monomials of lower grade first.
std::vector<SmallExtension> extension_chain(const ParamRing& A);

// Exponent vector: parameter exponents first, then chart-variable exponents.
using Mono = std::vector<int>;

struct VarContext;
using Ctx = std::shared_ptr<const VarContext>;

// Variable context: parameter ring + chart variables + per-variable exponent bounds.
struct VarContext {
    ParamRing ring;
    std::vector<std::string> vars;
    std::vector<int> lo, hi; // chart-variable exponent bounds, one per var
    bool strict = true;      // overflow throws (strict) vs silently truncates

    int nparams() const { return ring.r(); }
    int nvars() const { return static_cast<int>(vars.size()); }
    int width() const { return nparams() + nvars(); }
    bool same_shape(const VarContext& o) const {
        return ring == o.ring && vars == o.vars;
    }
    int var_index(const std::string& name) const; // -1 if absent (searches vars then params)
};

Ctx make_ctx(ParamRing ring, std::vector<std::string> vars, int window, bool strict = true);
Ctx make_ctx(ParamRing ring, std::vector<std::string> vars, std::vector<int> lo,
             std::vector<int> hi, bool strict = true);
// Same variables/ring, effectively unbounded window (for intermediate arithmetic).
Ctx scratch_ctx(const Ctx& c);
// Same variables/ring, bounds widened by `extra` on each side.
Ctx widened_ctx(const Ctx& c, int extra);

// Global monomial order: graded lexicographic on (parameter exponents, chart exponents).
struct MonoLess {
    int np; // number of parameter slots
    bool operator()(const Mono& a, const Mono& b) const;
};

class LaurentPoly {
public:
    LaurentPoly() = default;
    explicit LaurentPoly(Ctx ctx) : ctx_(std::move(ctx)) {}
    LaurentPoly(Ctx ctx, const Rational& c); // constant
    static LaurentPoly monomial(Ctx ctx, const Mono& m, const Rational& c = 1);
    static LaurentPoly variable(Ctx ctx, int var); // chart variable index
    static LaurentPoly parameter(Ctx ctx, int param);

    const Ctx& ctx() const { return ctx_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<Mono, Rational, MonoLess>& terms() const { return terms_; }
    int term_count() const { return static_cast<int>(terms_.size()); }

    // Adds c * monomial m, applying the context truncation policy.
    void add_term(const Mono& m, const Rational& c);

    LaurentPoly operator+(const LaurentPoly& o) const;
    LaurentPoly operator-(const LaurentPoly& o) const;
    LaurentPoly operator-() const;
    LaurentPoly operator*(const LaurentPoly& o) const;
    LaurentPoly operator*(const Rational& c) const;
    LaurentPoly& operator+=(const LaurentPoly& o);
    LaurentPoly& operator-=(const LaurentPoly& o);
    bool operator==(const LaurentPoly& o) const { return terms_ == o.terms_; }
    bool operator!=(const LaurentPoly& o) const { return !(*this == o); }

    LaurentPoly pow(int n) const; // n >= 0

    // d/d(var) for chart variable index `var` (Laurent rule k z^{k-1}).
    LaurentPoly derivative(int var) const;

    // Coefficient of the exact parameter-exponent vector pexp, as a polynomial in the
    // chart variables of `out` (a context over the same variables; typically param-free
    // or a smaller ring).
    LaurentPoly param_coeff(const std::vector<int>& pexp, const Ctx& out) const;

    // Reinterprets in another context over the same variable names; applies the target
    // truncation policy (parameter truncation silent, window per strict flag).
    LaurentPoly to_ctx(const Ctx& out) const;

    // Max |exponent| over chart variables and all terms (0 for constants).
    int max_abs_exponent() const;
    // Max total parameter degree over terms.
    int max_param_degree() const;

    std::string to_string() const;

private:
    void check_same(const LaurentPoly& o) const;
    Ctx ctx_;
    std::map<Mono, Rational, MonoLess> terms_{MonoLess{0}};
};

// Substitutes values[i] for chart variable i of p; parameters pass through.
// Negative exponents use invert(values[i]). Result in `out`.
LaurentPoly compose(const LaurentPoly& p, const std::vector<LaurentPoly>& values,
                    const Ctx& out);

// Formal inverse: requires the parameter-degree-0 part to be a single Laurent monomial;
// the rest (nilpotent in the truncated ring) is handled by a finite geometric series.
LaurentPoly invert(const LaurentPoly& p);

// Parse in the shared grammar: "+"/"-"-joined terms, factors "c", "name^exp", "name".
LaurentPoly parse_poly(const std::string& text, const Ctx& ctx);

} // namespace pdeform
