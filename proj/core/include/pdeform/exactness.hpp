#pragma once

#include "pdeform/pd.hpp"

namespace pdeform {

// Hypercohomology of the relative tangent complex: the subcomplex ker(F) of the
// total Cech complex of (T_X, [Lambda0, -]).
CohomologyReport rel_tangent_cohomology(const PoissonMapData& f, int degree,
                                        const HyperOptions& opt);

// Hypercohomology of the normal complex: the quotient coker(F) of the total Cech
// complex of (f*T_Y, pi). Class representatives live in the pullback cochains;
// two representatives are identified when they differ by an F-image.
CohomologyReport normal_cohomology(const PoissonMapData& f, int degree,
                                   const HyperOptions& opt);

struct ExactnessCheck {
    std::string name;
    bool ok = true;
    std::string detail;
};

struct ExactnessReport {
    std::map<std::string, int> dims;     // dimension of every term
    std::vector<ExactnessCheck> checks;  // per-arrow rank-nullity equalities

    bool ok() const;
    std::string to_string() const;
};

// Numerical audit of the four exact sequences relating the hypercohomology of
// T_X, f*T_Y, the relative tangent and normal complexes, PD and PD^1:
//   (a)  H^0(T_X) -> H^0(f*T_Y) -> PD  -> H^1(T_X) -> H^1(f*T_Y)
//   (b)  0 -> H^1(T_X/Y) -> PD  -> H^0(N_f) -> H^2(T_X/Y)
//   (c)  H^1(T_X) -> H^1(f*T_Y) -> PD^1 -> H^2(T_X) -> H^2(f*T_Y)
//   (d)  0 -> H^2(T_X/Y) -> PD^1 -> H^1(N_f) -> H^3(T_X/Y)
// Every arrow is materialized on basis representatives and the ranks are checked
// against the rank-nullity relations exactness imposes at every interior term.
ExactnessReport exactness_audit(const PoissonMapData& f, const HyperOptions& opt);

} // namespace pdeform
