#include <doctest.h>

#include "pdeform/deformation.hpp"
#include "pdeform/pd.hpp"

#include "fixtures.hpp"

using namespace pdeform;
using namespace fixtures;

namespace {

HyperOptions opts() { return HyperOptions{}; }

Cochain neg(Cochain c) {
    for (auto& [t, v] : c.values) v = v * Rational(-1);
    return c;
}

// diff = a - b as a cochain list (vectorize_exact sums same-key contributions).
CochainList tuple_diff(const CochainList& a, const CochainList& b) {
    CochainList out = a;
    for (const auto& c : b) out.push_back(neg(c));
    return out;
}

// True when `diff` lies in the span of the summed rows of `rows` over windowed
// cochain spaces on the given slots.
bool in_row_span(const CechContext& cx, const std::vector<CechSlot>& pre_slots,
                 const std::function<CochainList(const Cochain&)>& rows,
                 const CochainList& diff, int W) {
    KeyIndex cod;
    std::vector<SRow> cols;
    for (const auto& s : pre_slots) {
        Space sp = make_space(cx, {s}, W);
        for (int k = 0; k < sp.dim; ++k)
            cols.push_back(vectorize_exact(cod, rows(sp.basis_element(k))));
    }
    SRow b = vectorize_exact(cod, diff);
    SparseMat m(cod.dim());
    for (auto& c : cols) m.add_row(std::move(c));
    return solve(m.transpose(), srow_dense(b, cod.dim())).has_value();
}

const CechSlot FY01{SlotKind::PullbackY, 0, 1};
const CechSlot TX11{SlotKind::TangentX, 1, 1};
const CechSlot TX02{SlotKind::TangentX, 0, 2};

ParamRing eps_ring() { return ParamRing{{"t"}, 1, {}}; }

// Adds coef * t^pow to component p of chart i of phi.
void bump_phi(DeformationDatum& d, int i, int p, int pow, const Rational& coef = 1) {
    Ctx c = d.phi[i][p].ctx();
    Mono m(c->width(), 0);
    m[0] = pow;
    d.phi[i][p] += LaurentPoly::monomial(c, m, coef);
}

} // namespace

TEST_CASE("trivial deformations validate and have zero first-order class") {
    for (DefMode mode : {DefMode::FixedBoth, DefMode::FixedTarget}) {
        for (const PoissonMapData& f :
             {point_in_plane("dz[1,2]: x"), p1_identity(), line_in_p2()}) {
            DeformationDatum d = trivial_deformation(f, eps_ring(), mode);
            CHECK(validate_deformation(d).ok());
            FirstOrderClass fo = first_order_class(d, opts());
            CHECK(fo.is_zero());
        }
    }
}

TEST_CASE("PD basis round trip: datum_from_class inverts first_order_class") {
    PoissonMapData f = point_in_plane("dz[1,2]: x");
    PDReport pd = pd_space(f, opts());
    REQUIRE(pd.dim == 1);
    for (int k = 0; k < pd.dim; ++k) {
        DeformationDatum d = datum_from_class(f, DefMode::FixedTarget, pd.basis[k].parts);
        CHECK(validate_deformation(d).ok());
        FirstOrderClass fo = first_order_class(d, opts());
        for (int l = 0; l < pd.dim; ++l)
            CHECK(fo.coords[l] == (l == k ? Rational(1) : Rational(0)));
    }
}

TEST_CASE("fixed_both round trip through H^0(f*T_Y^.)") {
    for (const PoissonMapData& f : {point_in_plane("dz[1,2]: x"), p1_identity()}) {
        CechContext cx{nullptr, &f};
        CohomologyReport h0 = tot_cohomology(cx, SlotKind::PullbackY, 0, opts());
        REQUIRE(h0.dim >= 1);
        for (int k = 0; k < h0.dim; ++k) {
            DeformationDatum d = datum_from_class(f, DefMode::FixedBoth, h0.basis[k]);
            CHECK(validate_deformation(d).ok());
            FirstOrderClass fo = first_order_class(d, opts());
            for (int l = 0; l < h0.dim; ++l)
                CHECK(fo.coords[l] == (l == k ? Rational(1) : Rational(0)));
        }
    }
}

TEST_CASE("first_order_class is linear in the datum") {
    PoissonMapData f = point_in_plane("dz[1,2]: 0");
    PDReport pd = pd_space(f, opts());
    REQUIRE(pd.dim >= 2);
    SRow va = pd.dom.vectorize(pd.basis[0].parts);
    SRow vb = pd.dom.vectorize(pd.basis[1].parts);
    CochainList sum = pd.dom.devectorize(srow_axpy(va, Rational(1), vb));
    CochainList twice = pd.dom.devectorize(srow_axpy(va, Rational(1), va));
    auto coords_of = [&](const CochainList& rep) {
        DeformationDatum d = datum_from_class(f, DefMode::FixedTarget, rep);
        CHECK(validate_deformation(d).ok());
        return first_order_class(d, opts()).coords;
    };
    auto ca = coords_of(pd.basis[0].parts);
    auto cb = coords_of(pd.basis[1].parts);
    auto cs = coords_of(sum);
    auto c2 = coords_of(twice);
    REQUIRE(ca.size() == cs.size());
    for (size_t i = 0; i < cs.size(); ++i) {
        CHECK(cs[i] == ca[i] + cb[i]);
        CHECK(c2[i] == ca[i] * 2);
    }
}

TEST_CASE("mode degeneration: a fixed_both datum read as fixed_target has a PD class "
          "with zero structure parts") {
    PoissonMapData f = point_in_plane("dz[1,2]: x");
    CechContext cx{nullptr, &f};
    CohomologyReport h0 = tot_cohomology(cx, SlotKind::PullbackY, 0, opts());
    REQUIRE(h0.dim == 1);
    DeformationDatum d = datum_from_class(f, DefMode::FixedBoth, h0.basis[0]);
    DeformationDatum d2 = d;
    d2.mode = DefMode::FixedTarget;
    FirstOrderClass fo = first_order_class(d2, opts());
    CHECK(fo.mode == DefMode::FixedTarget);
    REQUIRE(fo.rep.size() == 3);
    CHECK(fo.rep[1].is_zero()); // transition part
    CHECK(fo.rep[2].is_zero()); // structure part
    CHECK(!fo.is_zero());
}

TEST_CASE("equivalence moves preserve the first-order class") {
    PoissonMapData f = p1_identity();
    CechContext cx{nullptr, &f};
    CohomologyReport h0 = tot_cohomology(cx, SlotKind::PullbackY, 0, opts());
    REQUIRE(h0.dim == 3);
    DeformationDatum d = datum_from_class(f, DefMode::FixedTarget, h0.basis[1]);
    FirstOrderClass before = first_order_class(d, opts());
    Cochain g{CechSlot{SlotKind::TangentX, 0, 1}, {}};
    Ctx c0 = scratch_ctx(f.source.charts[0].ctx);
    Ctx c1 = scratch_ctx(f.source.charts[1].ctx);
    Multivector g0(c0, 1, 1);
    g0.add_term({0}, parse_poly("1 + 2*z", c0));
    Multivector g1(c1, 1, 1);
    g1.add_term({0}, parse_poly("w - 2*w^2 - w^3", c1)); // not a global field
    g.add({0}, g0);
    g.add({1}, g1);
    DeformationDatum d2 = apply_equivalence(d, g);
    CHECK(validate_deformation(d2).ok());
    FirstOrderClass after = first_order_class(d2, opts());
    CHECK(before.coords == after.coords);
}

TEST_CASE("obstruction of a trivial datum vanishes and the lift climbs the chain") {
    PoissonMapData f = point_in_plane("dz[1,2]: x");
    auto chain = extension_chain(ParamRing{{"t"}, 2, {}});
    REQUIRE(chain.size() == 2);
    for (DefMode mode : {DefMode::FixedBoth, DefMode::FixedTarget}) {
        DeformationDatum d = trivial_deformation(f, chain[0].quotient, mode);
        for (const auto& e : chain) {
            ObstructionClass obs = obstruction_class(d, e, 0, opts());
            CHECK(obs.is_zero());
            LiftOutcome out = lift_step(d, e, opts(), 0);
            REQUIRE(std::holds_alternative<LiftCertificate>(out));
            d = std::get<LiftCertificate>(std::move(out)).datum;
        }
        CHECK(validate_deformation(d).ok());
    }
}

TEST_CASE("a genuinely obstructed datum: point in (A^2, x^2 dxdy)") {
    PoissonMapData f = point_in_plane("dz[1,2]: x^2");
    auto chain = extension_chain(ParamRing{{"t"}, 2, {}});
    DeformationDatum d = trivial_deformation(f, chain[1].quotient, DefMode::FixedBoth);
    bump_phi(d, 0, 0, 1); // Phi = (t, 0)
    CHECK(validate_deformation(d).ok());
    const SmallExtension& e = chain.back();
    ObstructionClass obs = obstruction_class(d, e, 0, opts());
    REQUIRE(obs.coords.size() == 1);
    CHECK(obs.coords[0] == Rational(1)); // P-residual is dxdy at t^2
    LiftOutcome out = lift_step(d, e, opts(), 0);
    REQUIRE(std::holds_alternative<ObstructionClass>(out));
    CHECK(!std::get<ObstructionClass>(out).is_zero());
    // scaling Phi = (2t, 0) squares the obstruction coefficient
    DeformationDatum d2 = trivial_deformation(f, chain[1].quotient, DefMode::FixedBoth);
    bump_phi(d2, 0, 0, 1, 2);
    ObstructionClass obs2 = obstruction_class(d2, e, 0, opts());
    CHECK(obs2.coords[0] == Rational(4));
}

TEST_CASE("lift-choice independence: coordinates agree and raw differences are "
          "coboundaries") {
    auto chain = extension_chain(ParamRing{{"t"}, 2, {}});
    SUBCASE("fixed_both, point in the plane") {
        PoissonMapData f = point_in_plane("dz[1,2]: x");
        CechContext cx{nullptr, &f};
        Op T = tot_op(cx);
        DeformationDatum d = trivial_deformation(f, chain[1].quotient, DefMode::FixedBoth);
        bump_phi(d, 0, 1, 1);
        CHECK(validate_deformation(d).ok());
        ObstructionClass base = obstruction_class(d, chain.back(), 0, opts());
        for (unsigned s : {1u, 2u, 3u, 4u, 5u}) {
            ObstructionClass o = obstruction_class(d, chain.back(), s, opts());
            CHECK(o.coords == base.coords);
            CHECK(in_row_span(cx, {FY01}, [&T](const Cochain& c) { return T(c); },
                              tuple_diff(o.raw, base.raw), opts().window + 2));
        }
    }
    SUBCASE("fixed_target, identity of P^1") {
        PoissonMapData f = p1_identity();
        CechContext cx{nullptr, &f};
        DeformationDatum d = trivial_deformation(f, chain[0].quotient, DefMode::FixedTarget);
        LiftOutcome o1 = lift_step(d, chain[0], opts(), 2);
        REQUIRE(std::holds_alternative<LiftCertificate>(o1));
        DeformationDatum d1 = std::get<LiftCertificate>(std::move(o1)).datum;
        ObstructionClass base = obstruction_class(d1, chain[1], 0, opts());
        for (unsigned s : {1u, 2u, 3u, 4u, 5u}) {
            ObstructionClass o = obstruction_class(d1, chain[1], s, opts());
            CHECK(o.coords == base.coords);
            CHECK(in_row_span(cx, {FY01, TX11, TX02},
                              [&cx](const Cochain& c) { return pd1_coboundary_rows(cx, c); },
                              tuple_diff(o.raw, base.raw), opts().window + 2));
        }
    }
}

TEST_CASE("lift_step is deterministic") {
    PoissonMapData f = p1_identity();
    auto chain = extension_chain(ParamRing{{"t"}, 2, {}});
    DeformationDatum d = trivial_deformation(f, chain[0].quotient, DefMode::FixedTarget);
    auto run = [&] {
        LiftOutcome o = lift_step(d, chain[0], opts(), 0);
        REQUIRE(std::holds_alternative<LiftCertificate>(o));
        return std::get<LiftCertificate>(std::move(o)).datum;
    };
    DeformationDatum a = run();
    DeformationDatum b = run();
    for (size_t i = 0; i < a.phi.size(); ++i)
        for (size_t p = 0; p < a.phi[i].size(); ++p)
            CHECK(a.phi[i][p].to_string() == b.phi[i][p].to_string());
    for (const auto& [key, t] : a.source.transitions)
        for (size_t p = 0; p < t.components.size(); ++p)
            CHECK(t.components[p].to_string() ==
                  b.source.transitions.at(key).components[p].to_string());
}

TEST_CASE("truncation along an intermediate quotient recovers the lower lift") {
    PoissonMapData f = point_in_plane("dz[1,2]: x");
    auto chain = extension_chain(ParamRing{{"t"}, 2, {}});
    DeformationDatum d = trivial_deformation(f, chain[1].quotient, DefMode::FixedBoth);
    bump_phi(d, 0, 1, 1);
    DeformationDatum d2 =
        std::get<LiftCertificate>(lift_step(d, chain[1], opts(), 0)).datum;
    DeformationDatum back = truncate_deformation(d2, chain[1].quotient);
    CHECK(validate_deformation(back).ok());
    for (size_t i = 0; i < back.phi.size(); ++i)
        for (size_t p = 0; p < back.phi[i].size(); ++p) {
            Ctx w = scratch_ctx(back.phi[i][p].ctx());
            CHECK((back.phi[i][p].to_ctx(w) - d.phi[i][p].to_ctx(w)).is_zero());
        }
}

TEST_CASE("validate_deformation localizes a broken Poisson identity") {
    PoissonMapData f = point_in_plane("dz[1,2]: x");
    DeformationDatum d = trivial_deformation(f, eps_ring(), DefMode::FixedBoth);
    bump_phi(d, 0, 0, 1); // Phi = (t, 0): Pi(Phi) = t != 0 = Lambda-side
    ValidationReport vr = validate_deformation(d);
    CHECK(!vr.ok());
    bool found = false;
    for (const auto& e : vr.entries)
        if (e.name == "map_map_poisson" && !e.pass) found = true;
    CHECK(found);
}

TEST_CASE("datum_from_class input checking") {
    PoissonMapData f = p1_identity();
    // a structure part is rejected in fixed_both mode
    Cochain t{TX11, {}};
    Ctx c0 = scratch_ctx(f.source.charts[0].ctx);
    Multivector v(c0, 1, 1);
    v.add_term({0}, LaurentPoly(c0, 1));
    t.add({0, 1}, v);
    CHECK_THROWS_AS(datum_from_class(f, DefMode::FixedBoth, {t}), Error);
    // first_order_class refuses higher-order rings
    DeformationDatum d = trivial_deformation(f, ParamRing{{"t"}, 2, {}}, DefMode::FixedBoth);
    CHECK_THROWS_AS(first_order_class(d, opts()), Error);
}

TEST_CASE("pullback_cochain is a chain map for the Cech differential") {
    PoissonMapData f = line_in_full_p2(true);
    CechContext cx{nullptr, &f};
    CechContext cy{&f.target, nullptr};
    // a 0-cochain of vector fields on P^2, not globally defined
    Cochain g{CechSlot{SlotKind::TangentX, 0, 1}, {}};
    for (int i = 0; i < 3; ++i) {
        Ctx c = scratch_ctx(f.target.charts[i].ctx);
        Multivector v(c, 2, 1);
        v.add_term({0}, parse_poly("1", c) * Rational(i + 1));
        v.add_term({1}, LaurentPoly::variable(c, 1) * Rational(i - 1));
        g.add({i}, v);
    }
    Cochain lhs = pullback_cochain(f, cy, cech_delta(cy, g));
    Cochain rhs = cech_delta(cx, pullback_cochain(f, cy, g));
    KeyIndex ki;
    CHECK(vectorize_exact(ki, tuple_diff({lhs}, {rhs})).empty());
}

TEST_CASE("stability: flagship line in P^2 with Pi_t = y(1+tx) (honest ranks, "
          "hypotheses off)") {
    PoissonMapData f = line_in_p2();
    ArrowRankReport a1 = stability_h1_arrow(f, opts());
    CHECK(a1.src_dim == 0);
    CHECK(a1.tgt_dim == 2);
    CHECK(!a1.surjective()); // the comparison hypothesis honestly fails here
    ParamRing t4{{"t"}, 4, {}};
    DeformationDatum tdef = trivial_deformation(f, t4, DefMode::FixedSource);
    Ctx c0 = tdef.target.bivectors[0].ctx();
    Ctx c1 = tdef.target.bivectors[1].ctx();
    tdef.target.bivectors[0] = parse_multivector("dz[1,2]: y + t*x*y", c0, 2, 2);
    tdef.target.bivectors[1] = parse_multivector("dz[1,2]: -u^2*v - t*u*v", c1, 2, 2);
    REQUIRE(validate_atlas(apply_atlas_deformation(f.target, tdef.target)).ok());
    LiftCertificate cert = stability_lift(f, tdef, false, opts());
    CHECK(cert.residuals.ok());
    PoissonAtlas T = cert.datum.target_atlas();
    CHECK((T.bivectors[0] - tdef.target.bivectors[0].to_ctx(T.bivectors[0].ctx()))
              .is_zero());
}

TEST_CASE("stability with verified hypotheses: identity of P^1, target moved by "
          "z = 1/w + t") {
    PoissonMapData f = p1_identity();
    CHECK(stability_h1_arrow(f, opts()).surjective());
    CHECK(stability_h2_arrow(f, opts()).injective());
    ParamRing t2{{"t"}, 2, {}};
    DeformationDatum tdef = trivial_deformation(f, t2, DefMode::FixedSource);
    auto& r01 = tdef.target.transitions.at({0, 1});
    Ctx tc1 = r01.components[0].ctx();
    Mono tm(tc1->width(), 0);
    tm[0] = 1;
    r01.components[0] += LaurentPoly::monomial(tc1, tm);
    Ctx tc0 = tdef.target.transitions.at({1, 0}).components[0].ctx();
    ChartMap binv{tc0, tc1, {f.target.transition(1, 0).components[0].to_ctx(tc0)}};
    tdef.target.transitions[{1, 0}] = formal_inverse(r01, binv);
    REQUIRE(validate_atlas(apply_atlas_deformation(f.target, tdef.target)).ok());
    LiftCertificate cert = stability_lift(f, tdef, true, opts());
    CHECK(cert.residuals.ok());
}

TEST_CASE("stability HypothesisFailed: point in (A^2, x^2 dxdy)") {
    PoissonMapData f = point_in_plane("dz[1,2]: x^2");
    ArrowRankReport a1 = stability_h1_arrow(f, opts());
    CHECK(!a1.surjective());
    ParamRing t2{{"t"}, 2, {}};
    DeformationDatum tdef = trivial_deformation(f, t2, DefMode::FixedSource);
    try {
        stability_lift(f, tdef, true, opts());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::HypothesisFailed);
        CHECK(std::string(e.what()).find("rank=" + std::to_string(a1.rank)) !=
              std::string::npos);
    }
}

TEST_CASE("costability: flagship line in full P^2(y), source moved by z = 1/w + t") {
    PoissonMapData f = line_in_full_p2(true);
    ArrowRankReport a1 = costability_h1_arrow(f, opts());
    CHECK(a1.surjective()); // rank 2 onto the 2-dim pullback cohomology
    CHECK(a1.rank == 2);
    ParamRing t2{{"t"}, 2, {}};
    DeformationDatum sdef = trivial_deformation(f, t2, DefMode::FixedTarget);
    auto& r01 = sdef.source.transitions.at({0, 1});
    Ctx c1 = r01.components[0].ctx();
    Mono tm(c1->width(), 0);
    tm[0] = 1;
    r01.components[0] += LaurentPoly::monomial(c1, tm);
    Ctx c0 = sdef.source.transitions.at({1, 0}).components[0].ctx();
    ChartMap binv{c0, c1, {f.source.transition(1, 0).components[0].to_ctx(c0)}};
    sdef.source.transitions[{1, 0}] = formal_inverse(r01, binv);
    REQUIRE(validate_atlas(apply_atlas_deformation(f.source, sdef.source)).ok());
    // H^2(P^2, T^.) is not window-stable (honest audit), so the full hypothesis
    // check cannot run; the certificate is verified by substitution instead.
    LiftCertificate cert = costability_lift(f, sdef, false, opts());
    CHECK(cert.residuals.ok());
}

TEST_CASE("costability with verified hypotheses: identity of P^1") {
    PoissonMapData f = p1_identity();
    CHECK(costability_h1_arrow(f, opts()).surjective());
    CHECK(costability_h2_arrow(f, opts()).injective());
    ParamRing t2{{"t"}, 2, {}};
    DeformationDatum sdef = trivial_deformation(f, t2, DefMode::FixedTarget);
    auto& r01 = sdef.source.transitions.at({0, 1});
    Ctx c1 = r01.components[0].ctx();
    Mono tm(c1->width(), 0);
    tm[0] = 1;
    r01.components[0] += LaurentPoly::monomial(c1, tm);
    Ctx c0 = sdef.source.transitions.at({1, 0}).components[0].ctx();
    ChartMap binv{c0, c1, {f.source.transition(1, 0).components[0].to_ctx(c0)}};
    sdef.source.transitions[{1, 0}] = formal_inverse(r01, binv);
    LiftCertificate cert = costability_lift(f, sdef, true, opts());
    CHECK(cert.residuals.ok());
}

TEST_CASE("costability HypothesisFailed: two points onto the origin of P^2") {
    PoissonMapData f = two_points_to_p2_origin();
    ArrowRankReport a1 = costability_h1_arrow(f, opts());
    CHECK(a1.rank == 1);
    CHECK(a1.tgt_dim == 2);
    CHECK(!a1.surjective());
    ParamRing t2{{"t"}, 2, {}};
    DeformationDatum sdef = trivial_deformation(f, t2, DefMode::FixedTarget);
    try {
        costability_lift(f, sdef, true, opts());
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::HypothesisFailed);
        CHECK(std::string(e.what()).find("rank=1") != std::string::npos);
    }
}

TEST_CASE("factorization through a family: point -> line -> plane") {
    FactorChain c = point_line_plane();
    ParamRing t2{{"t"}, 2, {}};
    DeformationDatum phi = trivial_deformation(c.f, t2, DefMode::FixedBoth);
    DeformationDatum ups = trivial_deformation(c.h, t2, DefMode::FixedBoth);
    bump_phi(phi, 0, 0, 1);      // point moves to t on the line
    bump_phi(ups, 0, 0, 1);      // and to (t, t^2) in the plane
    bump_phi(ups, 0, 1, 2);
    REQUIRE(validate_deformation(phi).ok());
    REQUIRE(validate_deformation(ups).ok());
    FamilyMapLift lift = factor_through_family(ups, phi, c.g, false, opts());
    CHECK(lift.residuals.ok());
    // the certificate checks Psi o Phi = Upsilon by independent substitution; also
    // pin that Psi reduces to g at t = 0
    Ctx w = scratch_ctx(lift.psi[0][0].ctx());
    CHECK((lift.psi[0][0].param_coeff({0}, w) - c.g.components[0][0].to_ctx(w)).is_zero());
    CHECK(lift.psi[0][1].param_coeff({0}, w).is_zero());
}

TEST_CASE("factorization rejects non-composing data") {
    FactorChain c = point_line_plane();
    ParamRing t2{{"t"}, 2, {}};
    DeformationDatum phi = trivial_deformation(c.f, t2, DefMode::FixedBoth);
    PoissonMapData h2 = c.h;
    // h no longer equals g o f
    h2.components[0][1] = LaurentPoly(h2.source.charts[0].ctx, 1);
    DeformationDatum ups = trivial_deformation(h2, t2, DefMode::FixedBoth);
    CHECK_THROWS_AS(factor_through_family(ups, phi, c.g, false, opts()), Error);
    // ring mismatch
    DeformationDatum ups3 = trivial_deformation(c.h, ParamRing{{"t"}, 3, {}},
                                                DefMode::FixedBoth);
    CHECK_THROWS_AS(factor_through_family(ups3, phi, c.g, false, opts()), Error);
}

TEST_CASE("factorization with all data trivial returns the trivial Psi") {
    FactorChain c = point_line_plane();
    ParamRing t2{{"t"}, 2, {}};
    DeformationDatum phi = trivial_deformation(c.f, t2, DefMode::FixedBoth);
    DeformationDatum ups = trivial_deformation(c.h, t2, DefMode::FixedBoth);
    FamilyMapLift lift = factor_through_family(ups, phi, c.g, false, opts());
    CHECK(lift.residuals.ok());
    Ctx w = scratch_ctx(lift.psi[0][0].ctx());
    CHECK((lift.psi[0][0].to_ctx(w) - c.g.components[0][0].to_ctx(w)).is_zero());
    CHECK(lift.psi[0][1].to_ctx(w).is_zero());
}
