#pragma once

#include "pdeform/exactness.hpp"

#include <variant>

namespace pdeform {

// Which parts of a deformation datum are allowed to move.
enum class DefMode {
    FixedBoth,   // source and target families trivial, only the map deforms
    FixedTarget, // target family trivial; source structure and map deform
    FixedSource, // source family trivial; target structure and map deform
    Free,        // everything deforms
};
std::string defmode_name(DefMode m);

// Chart coefficient context lifted to the parameter ring A. Deformation data use
// effectively unbounded chart windows: corrections composed with transitions can
// exceed the base window, and every identity check runs over scratch contexts.
Ctx ring_chart_ctx(const Chart& ch, const ParamRing& A);

// Deformation of one atlas over A: deformed transition maps and bivectors that
// reduce to the base data at parameters = 0.
struct AtlasDeformation {
    ParamRing ring;
    std::map<std::pair<int, int>, ChartMap> transitions;
    std::vector<Multivector> bivectors;
};

AtlasDeformation trivial_atlas_deformation(const PoissonAtlas& base, const ParamRing& A);

// The deformed atlas as a PoissonAtlas over A (charts re-contexted to the ring).
PoissonAtlas apply_atlas_deformation(const PoissonAtlas& base, const AtlasDeformation& d);

// A deformation of a Poisson map over A: families of source and target structure
// plus deformed map components, all reducing to `base` at parameters = 0.
struct DeformationDatum {
    PoissonMapData base; // over the trivial ring
    ParamRing ring;
    DefMode mode = DefMode::FixedBoth;
    AtlasDeformation source;
    AtlasDeformation target;
    std::vector<std::vector<LaurentPoly>> phi; // per source chart, over the ring

    PoissonAtlas source_atlas() const;
    PoissonAtlas target_atlas() const;
    PoissonMapData deformed_map() const;
};

DeformationDatum trivial_deformation(const PoissonMapData& base, const ParamRing& A,
                                     DefMode mode);

// Reduction along a quotient of the parameter ring (Q must allow a subset of the
// monomials of d.ring over the same parameters). Truncation is a ring map, so the
// result of truncating a valid datum is valid.
DeformationDatum truncate_deformation(const DeformationDatum& d, const ParamRing& Q);

// First-order datum over Q[t]/(t^2) assembled from a class representative:
// fixed_both expects a single cochain v in C^0(f*T_Y); fixed_target a tuple
// (v, t, lambda) in C^0(f*T_Y) + C^1(T_X) + C^0(^2 T_X) (the PD slot layout).
DeformationDatum datum_from_class(const PoissonMapData& base, DefMode mode,
                                  const CochainList& rep);

// Equivalence move on a first-order datum: the coboundary action of g in C^0(T_X)
// (reparametrization of the trivializations); the class is unchanged.
DeformationDatum apply_equivalence(const DeformationDatum& d, const Cochain& g);

// Structural checks, base recovery at parameters = 0, mode constraints, and the
// full atlas/map identities of the deformed data over the ring.
ValidationReport validate_deformation(const DeformationDatum& d);

struct FirstOrderClass {
    DefMode mode;
    CochainList rep;               // extracted cocycle tuple on the base cover
    std::vector<Rational> coords;  // canonical class coordinates
    bool is_zero() const;
    std::string summary() const;
};

// The first-order class of a datum over Q[t]/(t^2): an H^0(f*T_Y^.) class in
// fixed_both mode, a PD class in fixed_target mode.
FirstOrderClass first_order_class(const DeformationDatum& d, const HyperOptions& opt);

struct ObstructionClass {
    DefMode mode;
    CochainList raw;               // residual cocycle tuple of the chosen lift
    std::vector<Rational> coords;  // canonical class coordinates
    bool is_zero() const;
    std::string summary() const;
};

// Obstruction of d (valid over e.quotient) against the small extension e.
// lift_choice_seed = 0 takes the canonical monomial lift; other seeds add a
// seed-dependent order-tau perturbation (a different arbitrary lift); the class
// coordinates are independent of the seed.
ObstructionClass obstruction_class(const DeformationDatum& d, const SmallExtension& e,
                                   unsigned lift_choice_seed, const HyperOptions& opt);

struct LiftCertificate {
    DeformationDatum datum;      // the lifted datum
    ValidationReport residuals;  // independent re-substitution of every identity
};

using LiftOutcome = std::variant<LiftCertificate, ObstructionClass>;

// One small-extension lift: returns a certificate when the obstruction vanishes
// (corrections solved exactly over Q), otherwise the nonzero obstruction class.
LiftOutcome lift_step(const DeformationDatum& d, const SmallExtension& e,
                      const HyperOptions& opt, unsigned lift_choice_seed = 0);

// Rank data of one of the comparison arrows used by the smoothness theorems.
struct ArrowRankReport {
    std::string name;
    int rank = 0;
    int src_dim = 0;
    int tgt_dim = 0;
    bool surjective() const { return rank == tgt_dim; }
    bool injective() const { return rank == src_dim; }
    std::string to_string() const;
};

ArrowRankReport stability_h1_arrow(const PoissonMapData& f, const HyperOptions& opt);
ArrowRankReport stability_h2_arrow(const PoissonMapData& f, const HyperOptions& opt);
ArrowRankReport costability_h1_arrow(const PoissonMapData& f, const HyperOptions& opt);
ArrowRankReport costability_h2_arrow(const PoissonMapData& f, const HyperOptions& opt);
ArrowRankReport factor_h0_arrow(const PoissonMapData& f, const PoissonMapData& g,
                                const PoissonMapData& h, const HyperOptions& opt);
ArrowRankReport factor_h1_arrow(const PoissonMapData& f, const PoissonMapData& g,
                                const PoissonMapData& h, const HyperOptions& opt);

// Given a full deformation of the target of f (target_def has mode FixedSource),
// produces a source family and map over the same ring inducing f, climbing the
// one-dimensional small-extension chain and solving the two correction systems of
// each step exactly. hypotheses_check verifies the H^1/H^2 comparison ranks first.
LiftCertificate stability_lift(const PoissonMapData& f, const DeformationDatum& target_def,
                               bool hypotheses_check, const HyperOptions& opt);

// Mirror: given a full deformation of the source of f (source_def has mode
// FixedTarget), produces a target family and map over the same ring inducing f.
LiftCertificate costability_lift(const PoissonMapData& f, const DeformationDatum& source_def,
                                 bool hypotheses_check, const HyperOptions& opt);

struct FamilyMapLift {
    std::vector<std::vector<LaurentPoly>> psi; // per target-of-f chart, over the ring
    ValidationReport residuals;
};

// Factorization through a family: given a deformation upsilon of h = g o f and a
// deformation phi of f with the same source family, produces Psi deforming g with
// Psi o Phi = Upsilon exactly over the ring.
FamilyMapLift factor_through_family(const DeformationDatum& upsilon,
                                    const DeformationDatum& phi, const PoissonMapData& g,
                                    bool hypotheses_check, const HyperOptions& opt);

// Cover refinement along f: a cochain on the target atlas of f (TangentX over
// CechContext{&f.target} or PullbackY over a map g out of f.target) becomes a
// cochain on the source cover with the same axes, coefficients composed with f.
Cochain pullback_cochain(const PoissonMapData& f, const CechContext& tgt_cx,
                         const Cochain& c);

} // namespace pdeform
