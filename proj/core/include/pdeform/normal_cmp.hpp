#pragma once

#include "pdeform/cech.hpp"

namespace pdeform {

// ---------------------------------------------------------------------------
// The normal complex of a Poisson submanifold X = {w^1 = .. = w^r = 0} in
// adapted coordinates, and its comparison with the normal complex of the
// inclusion map.
//
//   N^p = N_{X/Y} (x) wedge^p T_Y|_X,  Gamma(U_i, N^p) ~ (+)_alpha Gamma(U_i,
//   wedge^p T_Y|_X) e_i^alpha  with e_i^alpha the class of d/dw_i^alpha.
//
// A cochain here is therefore r parallel pullback-style Cech cochains, one per
// frame direction. The column differential nabla acts per lead chart by
//
//   nabla(h e^alpha) = (-[h, Lambda_0]|_X) e^alpha
//                      + (-1)^p sum_beta (h ^ T^alpha_beta|_X) e^beta,
//
// where [Lambda_i, w_i^alpha] = sum_beta w_i^beta T^beta (the tangency data of
// the submanifold), and the Cech differential twists the k = 0 face by the
// normal frame transition F (w_i^alpha o phi_ik = sum_beta w_k^beta
// F^alpha_beta(z_k)). This module works with the column convention
// -[-, Lambda_0]|_X internally; the reconciliation with the global [Lambda_0, -]
// convention of the hypercohomology engine is confined to the degree signs of
// phi_map, and is pinned by the chain-map identity
//   (total normal differential) o phi_map = phi_map o (total pullback
//   differential), which the tests check on random cochains.
// ---------------------------------------------------------------------------

// One Cech cochain valued in N_{X/Y} (x) wedge^p T_Y|_X: copies[alpha] is the
// coefficient of e^alpha, a pullback-style cochain of slot {PullbackY, c, p}.
struct NormalCochain {
    int c = 0;
    int p = 0;
    std::vector<Cochain> copies;

    bool is_zero() const;
    std::string to_string() const;
};

// Precomputed geometry of the submanifold: the induced atlas of X, the
// inclusion map, the tangency fields T and the normal frame transitions F
// (expressed in the lead chart of each overlap).
struct NormalContext {
    SubmanifoldData sub;
    PoissonAtlas X;      // induced atlas: the z-variables of each ambient chart
    PoissonMapData incl; // inclusion X -> ambient (identity chart assignment)
    std::vector<std::vector<std::vector<Multivector>>> T; // [i][alpha][beta]
    std::vector<std::vector<int>> zpos; // per chart: ambient index of X var
    std::map<std::pair<int, int>, std::vector<std::vector<LaurentPoly>>> frames;
    // frames[{i,k}][alpha][beta] = F^alpha_{ik beta}(0, z_k) written in the
    // coordinates of X chart i.

    int r() const { return sub.codim(); }
    CechContext cx() const { return CechContext{nullptr, &incl}; }
};

// Builds the context; throws InvalidSubmanifold when the tangency validation
// fails and InvalidDatum when the induced atlas or inclusion fail validation.
NormalContext make_normal_context(const SubmanifoldData& s);

// The canonical inclusion map of the submanifold (standalone convenience).
PoissonMapData inclusion_map(const SubmanifoldData& s);

// Column differential nabla: (c, p) -> (c, p + 1).
NormalCochain nabla_d(const NormalContext& nx, const NormalCochain& v);

// Frame-twisted Cech differential: (c, p) -> (c + 1, p).
NormalCochain normal_delta(const NormalContext& nx, const NormalCochain& v);

// Total differential of the normal complex on one bidegree: the Cech part
// carries the alternating total-complex sign, the column part enters with +1.
std::vector<NormalCochain> normal_tot_op(const NormalContext& nx, const NormalCochain& v);

// Frame extraction phi: a pullback cochain g of slot (c, q) with q = p + 1 maps
// to the normal cochain with copies[alpha] = s(c, q) [g, w^alpha]|_X at (c, p).
// The sign s(c, q) makes phi a chain map from the pullback total complex (global
// conventions) to the normal total complex; tangential inputs map to zero.
NormalCochain phi_map(const NormalContext& nx, const Cochain& g);

struct NormalHyperReport {
    int degree = 0;
    int dim = 0;
    int window = 0;
    bool audit_ok = true;
    int dim_enlarged = -1;
    std::vector<std::vector<NormalCochain>> basis; // per class: one part per bidegree
    std::string summary() const;
};

// Hypercohomology of the normal complex Tot^n = (+)_{c+p=n} C^c(N (x) wedge^p).
NormalHyperReport normal_hyper(const NormalContext& nx, int degree, const HyperOptions& opt);

struct NormalComparisonReport {
    int h0_map = 0;    // H^0 of the normal complex of the inclusion map
    int h0_normal = 0; // H^0 of the normal complex of the submanifold
    int h1_map = 0;
    int h1_normal = 0;
    std::vector<std::vector<Rational>> phi0; // rows: images of the map-side basis
    std::vector<std::vector<Rational>> phi1;
    int phi0_rank = 0;
    int phi1_rank = 0;
    bool phi0_iso = false;
    bool phi1_injective = false;
    int window = 0;

    bool ok() const { return phi0_iso && phi1_injective; }
    std::string to_string() const;
};

// Computes H^0 and H^1 of both normal complexes and materializes the comparison
// map phi on basis representatives; checks that phi is an isomorphism in degree
// 0 and injective in degree 1. `i` must be the canonical inclusion of `s` (up to
// variable names); throws InvalidDatum otherwise and WindowInsufficient when a
// basis image cannot be placed at any escalated window.
NormalComparisonReport compare_normal_cohomology(const SubmanifoldData& s,
                                                 const PoissonMapData& i,
                                                 const HyperOptions& opt);

} // namespace pdeform
