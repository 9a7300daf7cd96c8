#include "pdeform/deformation.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace pdeform {

namespace {

const CechSlot FY01{SlotKind::PullbackY, 0, 1};
const CechSlot FY11{SlotKind::PullbackY, 1, 1};
const CechSlot FY02{SlotKind::PullbackY, 0, 2};
const CechSlot TX11{SlotKind::TangentX, 1, 1};
const CechSlot TX02{SlotKind::TangentX, 0, 2};
const CechSlot TX21{SlotKind::TangentX, 2, 1};
const CechSlot TX12{SlotKind::TangentX, 1, 2};
const CechSlot TX03{SlotKind::TangentX, 0, 3};

Cochain scaled(Cochain ch, const Rational& s) {
    for (auto& [t, v] : ch.values) v = v * s;
    return ch;
}

Cochain neg(Cochain ch) { return scaled(std::move(ch), -1); }

// Rings agree as quotients (same parameters, same allowed monomials) even when
// their order/ideal presentations differ.
bool same_ring(const ParamRing& a, const ParamRing& b) {
    return a.params == b.params && a.monomials() == b.monomials();
}

// tau as a full-width monomial of the ring context.
Mono param_mono(const std::vector<int>& tau, const Ctx& rc) {
    if (static_cast<int>(tau.size()) != rc->nparams())
        fail(Errc::ExtensionMismatch, "kernel monomial width does not match the ring");
    Mono m(rc->width(), 0);
    std::copy(tau.begin(), tau.end(), m.begin());
    return m;
}

// tau * p, reinterpreted over the ring context rc.
LaurentPoly times_tau(const LaurentPoly& p, const std::vector<int>& tau, const Ctx& rc) {
    return p.to_ctx(rc) * LaurentPoly::monomial(rc, param_mono(tau, rc));
}

Multivector times_tau_mv(const Multivector& v, const std::vector<int>& tau, const Ctx& rc) {
    Multivector out(rc, v.axis_dim(), v.degree());
    for (const auto& [A, c] : v.comps()) out.add_term(A, times_tau(c, tau, rc));
    return out;
}

// Exact division by the kernel generator: every term must carry the parameter
// monomial tau exactly; the quotient is parameter-free over `out`.
LaurentPoly div_tau(const LaurentPoly& p, const std::vector<int>& tau, const Ctx& out,
                    const char* what) {
    for (const auto& [m, c] : p.terms())
        if (!std::equal(tau.begin(), tau.end(), m.begin()))
            fail(Errc::InvalidDatum, std::string(what) +
                                         " is not a multiple of the extension kernel: " +
                                         p.to_string());
    return p.param_coeff(tau, out);
}

Ctx base_scratch(const PoissonAtlas& a, int i) { return scratch_ctx(a.charts[i].ctx); }

// Canonical lift of an atlas family to a larger ring: forward transitions are
// lifted verbatim; reverse transitions are recomputed as exact formal inverses
// (verbatim lifting of both directions would lose the inverse identity to the
// coarser truncation of the smaller ring).
AtlasDeformation lift_atlas_def(const PoissonAtlas& base, const AtlasDeformation& fam,
                                const ParamRing& A) {
    AtlasDeformation out;
    out.ring = A;
    std::vector<Ctx> ctxs;
    for (const auto& ch : base.charts) ctxs.push_back(ring_chart_ctx(ch, A));
    for (int i = 0; i < base.nchart(); ++i)
        out.bivectors.push_back(fam.bivectors[i].to_ctx(ctxs[i]));
    for (const auto& [key, t] : fam.transitions) {
        auto [i, j] = key;
        if (i >= j) continue;
        ChartMap lifted{ctxs[j], ctxs[i], {}};
        for (const auto& c : t.components) lifted.components.push_back(c.to_ctx(ctxs[j]));
        ChartMap base_inv{ctxs[i], ctxs[j], {}};
        for (const auto& c : base.transition(j, i).components)
            base_inv.components.push_back(c.to_ctx(ctxs[i]));
        out.transitions[{j, i}] = formal_inverse(lifted, base_inv);
        out.transitions[{i, j}] = std::move(lifted);
    }
    return out;
}

// Truncation to a smaller ring is a ring map: everything is mapped verbatim and
// all identities (including exact inverse pairs) survive.
AtlasDeformation truncate_atlas_def(const PoissonAtlas& base, const AtlasDeformation& fam,
                                    const ParamRing& Q) {
    AtlasDeformation out;
    out.ring = Q;
    std::vector<Ctx> ctxs;
    for (const auto& ch : base.charts) ctxs.push_back(ring_chart_ctx(ch, Q));
    for (int i = 0; i < base.nchart(); ++i)
        out.bivectors.push_back(fam.bivectors[i].to_ctx(ctxs[i]));
    for (const auto& [key, t] : fam.transitions) {
        auto [i, j] = key;
        ChartMap m{ctxs[j], ctxs[i], {}};
        for (const auto& c : t.components) m.components.push_back(c.to_ctx(ctxs[j]));
        out.transitions[key] = std::move(m);
    }
    return out;
}

DeformationDatum lift_datum(const DeformationDatum& d, const ParamRing& A) {
    DeformationDatum out;
    out.base = d.base;
    out.ring = A;
    out.mode = d.mode;
    out.source = lift_atlas_def(d.base.source, d.source, A);
    out.target = lift_atlas_def(d.base.target, d.target, A);
    out.phi.resize(d.phi.size());
    for (size_t i = 0; i < d.phi.size(); ++i) {
        Ctx ci = ring_chart_ctx(d.base.source.charts[i], A);
        for (const auto& p : d.phi[i]) out.phi[i].push_back(p.to_ctx(ci));
    }
    return out;
}

// Phi_i += tau * u_i for a parameter-free 0-cochain u of pullback vector fields.
void add_phi_correction(DeformationDatum& d, const Cochain& u, const std::vector<int>& tau) {
    for (const auto& [t, v] : u.values) {
        int i = t[0];
        for (size_t p = 0; p < d.phi[i].size(); ++p) {
            LaurentPoly c = v.coeff({static_cast<int>(p)});
            if (c.is_zero()) continue;
            d.phi[i][p] += times_tau(c, tau, d.phi[i][p].ctx());
        }
    }
}

AtlasDeformation def_of_atlas(const PoissonAtlas& A) {
    AtlasDeformation out;
    out.ring = A.ring;
    out.transitions = A.transitions;
    out.bivectors = A.bivectors;
    return out;
}

// r_ij += tau * (c_ij o phi_ij) for i < j (reverse transitions recomputed as exact
// inverses), Lambda_i += tau * m_i; c, m are parameter-free cochains on the base.
void add_atlas_correction(const PoissonAtlas& base, AtlasDeformation& fam, const Cochain* cc,
                          const Cochain* mm, const std::vector<int>& tau) {
    PoissonAtlas A = apply_atlas_deformation(base, fam);
    if (cc)
        for (const auto& [t, v] : cc->values) {
            int i = t[0], j = t[1];
            const Ctx& ci = A.charts[i].ctx;
            const Ctx& cj = A.charts[j].ctx;
            auto& rij = A.transitions.at({i, j});
            for (int p = 0; p < base.charts[i].ctx->nvars(); ++p) {
                LaurentPoly coef = v.coeff({p});
                if (coef.is_zero()) continue;
                // c_ij is a function of z_i; express it in z_j along the base transition
                LaurentPoly in_j =
                    compose(coef.to_ctx(ci), base.transition(i, j).components, cj);
                rij.components[p] += times_tau(in_j, tau, cj);
            }
            ChartMap base_inv{ci, cj, {}};
            for (const auto& c : base.transition(j, i).components)
                base_inv.components.push_back(c.to_ctx(ci));
            A.transitions[{j, i}] = formal_inverse(rij, base_inv);
        }
    if (mm)
        for (const auto& [t, v] : mm->values) {
            int i = t[0];
            A.bivectors[i] += times_tau_mv(v, tau, A.charts[i].ctx);
        }
    AtlasDeformation nd = def_of_atlas(A);
    nd.ring = fam.ring;
    fam = std::move(nd);
}

// ---------------------------------------------------------------------------
// Residual cochains of a lift, divided by the kernel generator.

struct MapResiduals {
    Cochain xi; // gluing residual, slot C^1(f*T_Y)
    Cochain P;  // Poisson residual, slot C^0(^2 f*T_Y)
};

MapResiduals map_residuals(const DeformationDatum& d, const std::vector<int>& tau) {
    const PoissonMapData& f = d.base;
    PoissonAtlas S = d.source_atlas();
    PoissonAtlas T = d.target_atlas();
    const int n = f.source.nchart();
    std::vector<std::vector<LaurentPoly>> phi(n);
    for (int i = 0; i < n; ++i)
        for (const auto& p : d.phi[i]) phi[i].push_back(p.to_ctx(S.charts[i].ctx));
    MapResiduals out;
    out.xi = Cochain{FY11, {}};
    out.P = Cochain{FY02, {}};
    for (int i = 0; i < n; ++i) {
        int ai = f.assignment[i];
        const Ctx& ci = S.charts[i].ctx;
        Ctx outc = base_scratch(f.source, i);
        const int m = f.target.charts[ai].ctx->nvars();
        Multivector val(outc, m, 2);
        const Multivector& Pi = T.bivectors[ai];
        for (int p = 0; p < m; ++p)
            for (int q = p + 1; q < m; ++q) {
                LaurentPoly lhs = compose(Pi.coeff({p, q}), phi[i], ci);
                LaurentPoly rhs = evaluate(S.bivectors[i], {phi[i][p], phi[i][q]});
                val.add_term({p, q},
                             div_tau(lhs - rhs.to_ctx(ci), tau, outc, "Poisson residual"));
            }
        if (!val.is_zero()) out.P.add({i}, val);
    }
    for (const auto& [key, r] : S.transitions) {
        auto [i, j] = key;
        if (i >= j) continue;
        int ai = f.assignment[i], aj = f.assignment[j];
        const Ctx& ci = S.charts[i].ctx;
        const Ctx& cj = S.charts[j].ctx;
        Ctx outc = base_scratch(f.source, i);
        const int m = f.target.charts[ai].ctx->nvars();
        Multivector val(outc, m, 1);
        for (int p = 0; p < m; ++p) {
            LaurentPoly lhs = compose(phi[i][p], r.components, cj);
            LaurentPoly rhs = ai == aj
                                  ? phi[j][p].to_ctx(lhs.ctx())
                                  : compose(T.transition(ai, aj).components[p], phi[j], cj)
                                        .to_ctx(lhs.ctx());
            LaurentPoly g = compose(lhs - rhs, S.transition(j, i).components, ci);
            val.add_term({p}, div_tau(g, tau, outc, "gluing residual"));
        }
        if (!val.is_zero()) out.xi.add({i, j}, val);
    }
    return out;
}

struct AtlasResiduals {
    Cochain eta; // cocycle residual, slot C^2(T)
    Cochain B;   // bivector gluing residual, slot C^1(^2 T)
    Cochain q;   // integrability residual, slot C^0(^3 T)
};

AtlasResiduals atlas_residuals(const PoissonAtlas& base, const PoissonAtlas& A,
                               const std::vector<int>& tau) {
    AtlasResiduals out;
    out.eta = Cochain{TX21, {}};
    out.B = Cochain{TX12, {}};
    out.q = Cochain{TX03, {}};
    for (const auto& T : nerve_tuples(base, 2)) {
        int i = T[0], j = T[1], k = T[2];
        const Ctx& ci = A.charts[i].ctx;
        Ctx outc = base_scratch(base, i);
        ChartMap comp = compose(A.transition(i, j), A.transition(j, k));
        Multivector val(outc, base.charts[i].ctx->nvars(), 1);
        for (size_t p = 0; p < comp.components.size(); ++p) {
            LaurentPoly diff =
                comp.components[p] -
                A.transition(i, k).components[p].to_ctx(comp.components[p].ctx());
            LaurentPoly g = compose(diff, A.transition(k, i).components, ci);
            val.add_term({static_cast<int>(p)}, div_tau(g, tau, outc, "cocycle residual"));
        }
        if (!val.is_zero()) out.eta.add(T, val);
    }
    for (const auto& [key, t] : A.transitions) {
        auto [i, j] = key;
        if (i >= j) continue;
        Ctx outc = base_scratch(base, i);
        Multivector pushed = pushforward(A.bivectors[j], t, A.transition(j, i));
        Multivector diff = pushed - A.bivectors[i].to_ctx(pushed.ctx());
        Multivector val(outc, base.charts[i].ctx->nvars(), 2);
        for (const auto& [axes, c] : diff.comps())
            val.add_term(axes, div_tau(c, tau, outc, "structure gluing residual"));
        if (!val.is_zero()) out.B.add({i, j}, val);
    }
    for (int i = 0; i < base.nchart(); ++i) {
        Ctx outc = base_scratch(base, i);
        Multivector br = schouten(A.bivectors[i], A.bivectors[i]);
        Multivector val(outc, base.charts[i].ctx->nvars(), 3);
        for (const auto& [axes, c] : br.comps())
            val.add_term(axes, div_tau(c, tau, outc, "integrability residual"));
        if (!val.is_zero()) out.q.add({i}, val);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Seeded lift perturbations: arbitrary order-tau changes of the mode-allowed parts.

LaurentPoly rnd_lin(const Ctx& c, std::mt19937& rng) {
    LaurentPoly p(c);
    Mono m(c->width(), 0);
    p.add_term(m, Rational(static_cast<int>(rng() % 5) - 2));
    for (int v = 0; v < c->nvars(); ++v) {
        Mono mv = m;
        mv[c->nparams() + v] = 1;
        p.add_term(mv, Rational(static_cast<int>(rng() % 5) - 2));
    }
    return p;
}

void perturb_lift(DeformationDatum& d, const std::vector<int>& tau, unsigned seed) {
    std::mt19937 rng(seed);
    const PoissonMapData& f = d.base;
    Cochain u{FY01, {}};
    for (int i = 0; i < f.source.nchart(); ++i) {
        Ctx outc = base_scratch(f.source, i);
        const int m = f.target.charts[f.assignment[i]].ctx->nvars();
        Multivector v(outc, m, 1);
        for (int p = 0; p < m; ++p) v.add_term({p}, rnd_lin(outc, rng));
        u.add({i}, v);
    }
    add_phi_correction(d, u, tau);
    if (d.mode != DefMode::FixedTarget && d.mode != DefMode::Free) return;
    Cochain c{TX11, {}};
    for (const auto& [key, t] : f.source.transitions) {
        auto [i, j] = key;
        if (i >= j) continue;
        Ctx outc = base_scratch(f.source, i);
        const int m = f.source.charts[i].ctx->nvars();
        Multivector v(outc, m, 1);
        for (int p = 0; p < m; ++p) v.add_term({p}, rnd_lin(outc, rng));
        c.add({i, j}, v);
    }
    Cochain mm{TX02, {}};
    for (int i = 0; i < f.source.nchart(); ++i) {
        Ctx outc = base_scratch(f.source, i);
        const int m = f.source.charts[i].ctx->nvars();
        Multivector v(outc, m, 2);
        for (int p = 0; p < m; ++p)
            for (int q = p + 1; q < m; ++q) v.add_term({p, q}, rnd_lin(outc, rng));
        mm.add({i}, v);
    }
    add_atlas_correction(f.source, d.source, c.is_zero() ? nullptr : &c,
                         mm.is_zero() ? nullptr : &mm, tau);
}

// ---------------------------------------------------------------------------
// Exact block solver: unknowns are windowed cochain spaces, equations are the
// summed operator rows in exact coordinates. Free variables are set to zero, so
// the solution is the minimum-support one in the basis order.

using RowFn = std::function<CochainList(const Cochain&)>;

std::optional<std::vector<CochainList>> solve_blocks(
    const std::vector<std::pair<Space, RowFn>>& blocks, const CochainList& rhs) {
    KeyIndex cod;
    std::vector<SRow> cols;
    for (const auto& [sp, rows] : blocks)
        for (int k = 0; k < sp.dim; ++k)
            cols.push_back(vectorize_exact(cod, rows(sp.basis_element(k))));
    SRow b = vectorize_exact(cod, rhs);
    SparseMat colmat(cod.dim());
    for (auto& c : cols) colmat.add_row(std::move(c));
    auto sol = solve(colmat.transpose(), srow_dense(b, cod.dim()));
    if (!sol) return std::nullopt;
    std::vector<CochainList> out;
    int off = 0;
    for (const auto& [sp, rows] : blocks) {
        SRow local;
        for (int k = 0; k < sp.dim; ++k)
            if ((*sol)[off + k] != 0) local.emplace_back(k, (*sol)[off + k]);
        out.push_back(sp.devectorize(local));
        off += sp.dim;
    }
    return out;
}

// Checks that the summed operator rows of a tuple vanish identically.
void check_relations(const std::string& what, const CechContext& cx, const CochainList& tuple,
                     const std::function<CochainList(const CechContext&, const Cochain&)>& T) {
    KeyIndex ki;
    SRow acc;
    for (const auto& ch : tuple) acc = srow_axpy(acc, 1, vectorize_exact(ki, T(cx, ch)));
    if (!srow_normalize(std::move(acc)).empty())
        fail(Errc::NotACocycle, what + ": residual tuple fails its cocycle relations");
}

// Class coordinates with window-escalation on NotInSpace (residual support may
// exceed the default window).
std::vector<Rational> retry_coords(const std::function<std::vector<Rational>(int)>& fn) {
    for (int extra = 0;; extra += 2) {
        try {
            return fn(extra);
        } catch (const Error& e) {
            if (e.code() != Errc::NotInSpace || extra >= 6) throw;
        }
    }
}

std::vector<Rational> tot_class_coords(const CechContext& cx, SlotKind kind, int degree,
                                       const CochainList& rep, const HyperOptions& opt) {
    return retry_coords([&](int extra) {
        HyperOptions o = opt;
        o.window += extra;
        CohomologyReport r = tot_cohomology(cx, kind, degree, o);
        auto cc = r.detail.class_coords(r.dom.vectorize(rep));
        if (!cc) fail(Errc::NotACocycle, "tuple is not a cocycle class of the total complex");
        return *cc;
    });
}

std::vector<Rational> pd_class_coords(const PoissonMapData& f, const CochainList& rep,
                                      bool first, const HyperOptions& opt) {
    return retry_coords([&](int extra) {
        HyperOptions o = opt;
        o.window += extra;
        PDReport r = first ? pd_space(f, o) : pd1_space(f, o);
        auto cc = r.detail.class_coords(r.dom.vectorize(rep));
        if (!cc)
            fail(Errc::NotACocycle,
                 std::string("tuple is not a cocycle class of ") + (first ? "PD" : "PD1"));
        return *cc;
    });
}

bool all_zero(const std::vector<Rational>& v) {
    return std::all_of(v.begin(), v.end(), [](const Rational& c) { return c == 0; });
}

std::string coords_str(const std::vector<Rational>& v) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << rational_to_string(v[i]);
    }
    os << "]";
    return os.str();
}

// ---------------------------------------------------------------------------
// First-order extraction.

Cochain extract_phi_part(const DeformationDatum& d, const std::vector<int>& tau) {
    const PoissonMapData& f = d.base;
    Cochain v{FY01, {}};
    for (int i = 0; i < f.source.nchart(); ++i) {
        Ctx outc = base_scratch(f.source, i);
        const int m = f.target.charts[f.assignment[i]].ctx->nvars();
        Multivector val(outc, m, 1);
        for (int p = 0; p < m; ++p) {
            LaurentPoly diff =
                d.phi[i][p] - f.components[i][p].to_ctx(d.phi[i][p].ctx());
            val.add_term({p}, div_tau(diff, tau, outc, "map correction"));
        }
        if (!val.is_zero()) v.add({i}, val);
    }
    return v;
}

std::pair<Cochain, Cochain> extract_source_part(const DeformationDatum& d,
                                                const std::vector<int>& tau) {
    const PoissonAtlas& base = d.base.source;
    PoissonAtlas S = d.source_atlas();
    Cochain c{TX11, {}}, l{TX02, {}};
    for (const auto& [key, r] : S.transitions) {
        auto [i, j] = key;
        if (i >= j) continue;
        Ctx outj = base_scratch(base, j);
        Ctx outi = base_scratch(base, i);
        const int m = base.charts[i].ctx->nvars();
        Multivector val(outi, m, 1);
        for (int p = 0; p < m; ++p) {
            LaurentPoly diff =
                r.components[p] - base.transition(i, j).components[p].to_ctx(r.components[p].ctx());
            LaurentPoly hp = div_tau(diff, tau, outj, "transition correction");
            val.add_term({p}, compose(hp, base.transition(j, i).components, outi));
        }
        if (!val.is_zero()) c.add({i, j}, val);
    }
    for (int i = 0; i < base.nchart(); ++i) {
        Ctx outc = base_scratch(base, i);
        Multivector diff = S.bivectors[i] - base.bivectors[i].to_ctx(S.bivectors[i].ctx());
        Multivector val(outc, base.charts[i].ctx->nvars(), 2);
        for (const auto& [axes, co] : diff.comps())
            val.add_term(axes, div_tau(co, tau, outc, "structure correction"));
        if (!val.is_zero()) l.add({i}, val);
    }
    return {c, l};
}

// ---------------------------------------------------------------------------
// Raw obstruction tuples and their classes.

struct RawData {
    MapResiduals mr;
    AtlasResiduals ar; // only meaningful in fixed_target mode
};

RawData all_residuals(const DeformationDatum& L, const std::vector<int>& tau) {
    RawData out;
    out.mr = map_residuals(L, tau);
    if (L.mode == DefMode::FixedTarget || L.mode == DefMode::Free)
        out.ar = atlas_residuals(L.base.source, L.source_atlas(), tau);
    return out;
}

ObstructionClass obstruction_of_lift(const DeformationDatum& L, const RawData& rd,
                                     const HyperOptions& opt) {
    ObstructionClass out;
    out.mode = L.mode;
    CechContext cx{nullptr, &L.base};
    if (L.mode == DefMode::FixedBoth) {
        out.raw = {neg(rd.mr.xi), rd.mr.P};
        Op T = tot_op(cx);
        check_relations("fixed_both obstruction", cx, out.raw,
                        [&T](const CechContext&, const Cochain& ch) { return T(ch); });
        out.coords = tot_class_coords(cx, SlotKind::PullbackY, 1, out.raw, opt);
        return out;
    }
    if (L.mode == DefMode::FixedTarget) {
        out.raw = {neg(rd.mr.xi), rd.mr.P, neg(rd.ar.eta), neg(rd.ar.B),
                   scaled(rd.ar.q, Rational(-1) / 2)};
        check_relations("fixed_target obstruction", cx, out.raw, pd1_relation_rows);
        out.coords = pd_class_coords(L.base, out.raw, /*first=*/false, opt);
        return out;
    }
    fail(Errc::InvalidDatum, "obstruction classes are defined in fixed_both and "
                             "fixed_target modes");
}

// ---------------------------------------------------------------------------
// Comparison arrows.

struct ArrowData {
    ArrowRankReport rep;
    CohomologyReport tgt;
    SparseMat images{0};
};

ArrowData make_arrow(const std::string& name, const CechContext& src_cx, SlotKind src_kind,
                     const PoissonMapData* tgt_map, const CechContext& tgt_cx, int degree,
                     const std::function<Cochain(const Cochain&)>& part_map,
                     const HyperOptions& opt) {
    (void)tgt_map;
    CohomologyReport src = tot_cohomology(src_cx, src_kind, degree, opt);
    int bump = opt.bump >= 0 ? opt.bump : default_bump(tgt_cx.atlas());
    for (int extra = 0;; extra += 2) {
        try {
            HyperOptions o2 = opt;
            o2.window += bump + extra;
            CohomologyReport tgt = tot_cohomology(tgt_cx, SlotKind::PullbackY, degree, o2);
            SparseMat images(tgt.dim);
            for (const auto& rep : src.basis) {
                CochainList mapped;
                for (const auto& ch : rep) mapped.push_back(part_map(ch));
                auto cc = tgt.detail.class_coords(tgt.dom.vectorize(mapped));
                if (!cc)
                    fail(Errc::NotACocycle, name + ": image is not a cocycle class");
                images.add_row(srow_from_dense(*cc));
            }
            ArrowData out;
            out.rep = ArrowRankReport{name, rank(images), src.dim, tgt.dim};
            out.tgt = std::move(tgt);
            out.images = std::move(images);
            return out;
        } catch (const Error& e) {
            if (e.code() != Errc::NotInSpace || extra >= 6) throw;
        }
    }
}

ArrowData stability_arrow(const PoissonMapData& f, int degree, const HyperOptions& opt) {
    CechContext cx{nullptr, &f};
    std::ostringstream nm;
    nm << "F: H^" << degree << "(T_X) -> H^" << degree << "(f*T_Y)";
    return make_arrow(nm.str(), cx, SlotKind::TangentX, &f, cx, degree,
                      [cx](const Cochain& ch) { return apply_F(cx, ch); }, opt);
}

ArrowData costability_arrow(const PoissonMapData& f, int degree, const HyperOptions& opt) {
    CechContext cx{nullptr, &f};
    CechContext cy{&f.target, nullptr};
    std::ostringstream nm;
    nm << "f*: H^" << degree << "(T_Y) -> H^" << degree << "(f*T_Y)";
    return make_arrow(nm.str(), cy, SlotKind::TangentX, &f, cx, degree,
                      [&f, cy](const Cochain& ch) { return pullback_cochain(f, cy, ch); },
                      opt);
}

ArrowData factor_arrow(const PoissonMapData& f, const PoissonMapData& g,
                       const PoissonMapData& h, int degree, const HyperOptions& opt) {
    CechContext cg{nullptr, &g};
    CechContext ch{nullptr, &h};
    std::ostringstream nm;
    nm << "f*: H^" << degree << "(g*T_Z) -> H^" << degree << "(h*T_Z)";
    return make_arrow(nm.str(), cg, SlotKind::PullbackY, &h, ch, degree,
                      [&f, cg](const Cochain& c) { return pullback_cochain(f, cg, c); },
                      opt);
}

// Diagnosis of a failed stage-2 solve: the residual class must lie in the image
// span of the comparison arrow; outside the span the theorem hypothesis fails,
// inside it the windows were too small.
[[noreturn]] void diagnose_map_stage(const ArrowData& arrow, const CochainList& rhs_class,
                                     const std::string& stage) {
    auto cc = arrow.tgt.detail.class_coords(arrow.tgt.dom.vectorize(rhs_class));
    if (!cc) fail(Errc::NotACocycle, stage + ": residual tuple is not a cocycle class");
    if (all_zero(*cc) || coords_in_span(arrow.images, srow_from_dense(*cc)))
        fail(Errc::WindowInsufficient,
             stage + ": class lies in the comparison image but no windowed solution "
                     "was found");
    fail(Errc::HypothesisFailed,
         stage + ": residual class " + coords_str(*cc) + " is outside the image of " +
             arrow.rep.name + " (" + arrow.rep.to_string() + ")");
}

// Solves the stage systems with window escalation; on persistent failure calls
// the supplied diagnosis (which throws).
std::vector<CochainList> solve_with_escalation(
    const std::function<std::vector<std::pair<Space, RowFn>>(int)>& blocks_at,
    const CochainList& rhs, int w0, const std::function<void()>& diagnose) {
    for (int extra = 0; extra <= 4; extra += 2) {
        try {
            auto sol = solve_blocks(blocks_at(w0 + extra), rhs);
            if (sol) return *sol;
        } catch (const Error& e) {
            if (e.code() != Errc::WindowOverflow) throw;
        }
    }
    diagnose();
    fail(Errc::Internal, "diagnosis did not raise");
}

void require(bool cond, Errc code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

// Component-wise equality of two chart maps' component lists over scratch.
bool same_components(const std::vector<LaurentPoly>& a, const std::vector<LaurentPoly>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        Ctx w = scratch_ctx(a[i].ctx());
        if (!(a[i].to_ctx(w) - b[i].to_ctx(w)).is_zero()) return false;
    }
    return true;
}

} // namespace

// ---------------------------------------------------------------------------
// Public API.

std::string defmode_name(DefMode m) {
    switch (m) {
        case DefMode::FixedBoth: return "fixed_both";
        case DefMode::FixedTarget: return "fixed_target";
        case DefMode::FixedSource: return "fixed_source";
        case DefMode::Free: return "free";
    }
    return "unknown";
}

Ctx ring_chart_ctx(const Chart& ch, const ParamRing& A) {
    return scratch_ctx(make_ctx(A, ch.ctx->vars, ch.window));
}

AtlasDeformation trivial_atlas_deformation(const PoissonAtlas& base, const ParamRing& A) {
    AtlasDeformation out;
    out.ring = A;
    std::vector<Ctx> ctxs;
    for (const auto& ch : base.charts) ctxs.push_back(ring_chart_ctx(ch, A));
    for (int i = 0; i < base.nchart(); ++i)
        out.bivectors.push_back(base.bivectors[i].to_ctx(ctxs[i]));
    for (const auto& [key, t] : base.transitions) {
        auto [i, j] = key;
        ChartMap m{ctxs[j], ctxs[i], {}};
        for (const auto& c : t.components) m.components.push_back(c.to_ctx(ctxs[j]));
        out.transitions[key] = std::move(m);
    }
    return out;
}

PoissonAtlas apply_atlas_deformation(const PoissonAtlas& base, const AtlasDeformation& d) {
    require(static_cast<int>(d.bivectors.size()) == base.nchart(), Errc::InvalidDatum,
            "atlas deformation must carry one bivector per chart");
    PoissonAtlas a;
    a.ring = d.ring;
    for (const auto& ch : base.charts)
        a.charts.push_back({ch.id, ring_chart_ctx(ch, d.ring), ch.window});
    for (int i = 0; i < base.nchart(); ++i)
        a.bivectors.push_back(d.bivectors[i].to_ctx(a.charts[i].ctx));
    for (const auto& [key, t] : base.transitions) {
        auto [i, j] = key;
        auto it = d.transitions.find(key);
        require(it != d.transitions.end(), Errc::InvalidDatum,
                "atlas deformation misses a base transition");
        ChartMap m{a.charts[j].ctx, a.charts[i].ctx, {}};
        for (const auto& c : it->second.components)
            m.components.push_back(c.to_ctx(a.charts[j].ctx));
        a.transitions[key] = std::move(m);
    }
    return a;
}

PoissonAtlas DeformationDatum::source_atlas() const {
    return apply_atlas_deformation(base.source, source);
}

PoissonAtlas DeformationDatum::target_atlas() const {
    return apply_atlas_deformation(base.target, target);
}

PoissonMapData DeformationDatum::deformed_map() const {
    PoissonMapData f;
    f.source = source_atlas();
    f.target = target_atlas();
    f.assignment = base.assignment;
    f.components.resize(phi.size());
    for (size_t i = 0; i < phi.size(); ++i)
        for (const auto& p : phi[i])
            f.components[i].push_back(p.to_ctx(f.source.charts[i].ctx));
    return f;
}

DeformationDatum trivial_deformation(const PoissonMapData& base, const ParamRing& A,
                                     DefMode mode) {
    DeformationDatum d;
    d.base = base;
    d.ring = A;
    d.mode = mode;
    d.source = trivial_atlas_deformation(base.source, A);
    d.target = trivial_atlas_deformation(base.target, A);
    d.phi.resize(base.source.nchart());
    for (int i = 0; i < base.source.nchart(); ++i) {
        Ctx ci = ring_chart_ctx(base.source.charts[i], A);
        for (const auto& p : base.components[i]) d.phi[i].push_back(p.to_ctx(ci));
    }
    return d;
}

DeformationDatum truncate_deformation(const DeformationDatum& d, const ParamRing& Q) {
    require(Q.params == d.ring.params, Errc::WrongRing,
            "truncation must keep the parameter list");
    DeformationDatum out;
    out.base = d.base;
    out.ring = Q;
    out.mode = d.mode;
    out.source = truncate_atlas_def(d.base.source, d.source, Q);
    out.target = truncate_atlas_def(d.base.target, d.target, Q);
    out.phi.resize(d.phi.size());
    for (size_t i = 0; i < d.phi.size(); ++i) {
        Ctx ci = ring_chart_ctx(d.base.source.charts[i], Q);
        for (const auto& p : d.phi[i]) out.phi[i].push_back(p.to_ctx(ci));
    }
    return out;
}

DeformationDatum datum_from_class(const PoissonMapData& base, DefMode mode,
                                  const CochainList& rep) {
    ParamRing A{{"t"}, 1, {}};
    DeformationDatum d = trivial_deformation(base, A, mode);
    std::vector<int> tau{1};
    const Cochain *v = nullptr, *t = nullptr, *l = nullptr;
    for (const auto& ch : rep) {
        if (ch.slot == FY01)
            v = &ch;
        else if (ch.slot == TX11)
            t = &ch;
        else if (ch.slot == TX02)
            l = &ch;
        else
            fail(Errc::InvalidDatum,
                 "unexpected slot in class representative: " + ch.slot.to_string());
    }
    if (v) add_phi_correction(d, *v, tau);
    bool structural = (t && !t->is_zero()) || (l && !l->is_zero());
    if (structural)
        require(mode == DefMode::FixedTarget || mode == DefMode::Free, Errc::InvalidDatum,
                "structure corrections require a mode with a movable source");
    if (structural || ((t || l) && mode != DefMode::FixedBoth)) {
        Cochain ct = t ? neg(*t) : Cochain{TX11, {}};
        Cochain cl = l ? neg(*l) : Cochain{TX02, {}};
        add_atlas_correction(base.source, d.source, ct.is_zero() ? nullptr : &ct,
                             cl.is_zero() ? nullptr : &cl, tau);
    }
    return d;
}

DeformationDatum apply_equivalence(const DeformationDatum& d, const Cochain& g) {
    require(d.ring.r() == 1 && d.ring.monomials().size() == 2, Errc::WrongRing,
            "equivalence moves act on first-order data");
    require(g.slot == CechSlot{SlotKind::TangentX, 0, 1}, Errc::InvalidDatum,
            "equivalence generator must be a 0-cochain of vector fields");
    std::vector<int> tau{1};
    DeformationDatum out = d;
    Cochain u{FY01, {}};
    for (const auto& [t, v] : g.values) u.add(t, chain_map_F(v, d.base.chart_map(t[0])));
    add_phi_correction(out, u, tau);
    CechContext cx{&d.base.source, nullptr};
    Cochain dg = cech_delta(cx, g);
    Cochain m{TX02, {}};
    for (const auto& [t, v] : g.values)
        m.add(t, schouten(d.base.source.bivectors[t[0]], v) * Rational(-1));
    if (d.mode == DefMode::FixedBoth) {
        require(dg.is_zero() && m.is_zero(), Errc::InvalidDatum,
                "fixed_both equivalences must preserve the source structure");
        return out;
    }
    add_atlas_correction(d.base.source, out.source, dg.is_zero() ? nullptr : &dg,
                         m.is_zero() ? nullptr : &m, tau);
    return out;
}

ValidationReport validate_deformation(const DeformationDatum& d) {
    ValidationReport rep;
    bool rings_ok = d.source.ring == d.ring && d.target.ring == d.ring;
    rep.add("ring_agreement", {}, rings_ok,
            rings_ok ? "" : "component rings differ from the datum ring");
    if (!rings_ok) return rep;
    auto addpref = [&rep](const std::string& pre, const ValidationReport& r) {
        for (auto e : r.entries) {
            e.name = pre + e.name;
            rep.entries.push_back(std::move(e));
        }
    };
    PoissonAtlas S = d.source_atlas();
    PoissonAtlas T = d.target_atlas();
    addpref("source_", validate_atlas(S));
    addpref("target_", validate_atlas(T));
    addpref("map_", validate_map(d.deformed_map()));

    // base recovery at parameters = 0
    std::vector<int> z(d.ring.r(), 0);
    auto poly_at0 = [&](const LaurentPoly& p, const LaurentPoly& bp, const Ctx& bc) {
        Ctx w = scratch_ctx(bc);
        return (p.param_coeff(z, w) - bp.to_ctx(w)).is_zero();
    };
    auto map_at0 = [&](const ChartMap& m, const ChartMap& bm, const Ctx& bc) {
        for (size_t p = 0; p < m.components.size(); ++p)
            if (!poly_at0(m.components[p], bm.components[p], bc)) return false;
        return true;
    };
    auto mv_at0 = [&](const Multivector& v, const Multivector& bv, const Ctx& bc) {
        Ctx w = scratch_ctx(bc);
        Multivector r(w, v.axis_dim(), v.degree());
        for (const auto& [A, c] : v.comps()) r.add_term(A, c.param_coeff(z, w));
        return (r - bv.to_ctx(w)).is_zero();
    };
    auto atlas_recovery = [&](const std::string& pre, const PoissonAtlas& base,
                              const PoissonAtlas& fam) {
        for (const auto& [key, t] : base.transitions) {
            auto [i, j] = key;
            bool ok = map_at0(fam.transition(i, j), t, base.charts[j].ctx);
            rep.add(pre + "base_recovery_transition", {i, j}, ok,
                    ok ? "" : "transition does not reduce to the base");
        }
        for (int i = 0; i < base.nchart(); ++i) {
            bool ok = mv_at0(fam.bivectors[i], base.bivectors[i], base.charts[i].ctx);
            rep.add(pre + "base_recovery_bivector", {i}, ok,
                    ok ? "" : "structure does not reduce to the base");
        }
    };
    atlas_recovery("source_", d.base.source, S);
    atlas_recovery("target_", d.base.target, T);
    for (int i = 0; i < d.base.source.nchart(); ++i) {
        bool ok = true;
        for (size_t p = 0; p < d.phi[i].size(); ++p)
            ok = ok && poly_at0(d.phi[i][p], d.base.components[i][p],
                                d.base.source.charts[i].ctx);
        rep.add("map_base_recovery", {i}, ok, ok ? "" : "map does not reduce to the base");
    }

    // mode constraints: the frozen sides must equal the trivial family
    auto atlas_trivial = [&](const std::string& pre, const PoissonAtlas& base,
                             const PoissonAtlas& fam) {
        bool ok = true;
        for (const auto& [key, t] : base.transitions)
            ok = ok && same_components(fam.transition(key.first, key.second).components,
                                       [&] {
                                           std::vector<LaurentPoly> lifted;
                                           for (const auto& c : t.components)
                                               lifted.push_back(c.to_ctx(
                                                   fam.charts[key.second].ctx));
                                           return lifted;
                                       }());
        for (int i = 0; ok && i < base.nchart(); ++i)
            ok = (fam.bivectors[i] - base.bivectors[i].to_ctx(fam.bivectors[i].ctx()))
                     .is_zero();
        rep.add(pre + "mode_frozen", {}, ok, ok ? "" : "frozen side carries corrections");
    };
    if (d.mode == DefMode::FixedBoth || d.mode == DefMode::FixedSource)
        atlas_trivial("source_", d.base.source, S);
    if (d.mode == DefMode::FixedBoth || d.mode == DefMode::FixedTarget)
        atlas_trivial("target_", d.base.target, T);
    return rep;
}

bool FirstOrderClass::is_zero() const { return all_zero(coords); }

std::string FirstOrderClass::summary() const {
    std::ostringstream os;
    os << "first_order mode=" << defmode_name(mode) << " coords=" << coords_str(coords);
    for (const auto& ch : rep)
        if (!ch.is_zero()) os << "\n  " << ch.to_string();
    return os.str();
}

FirstOrderClass first_order_class(const DeformationDatum& d, const HyperOptions& opt) {
    require(d.ring.r() == 1 && d.ring.monomials().size() == 2, Errc::WrongRing,
            "first-order classes require one parameter with square zero");
    std::vector<int> tau{1};
    FirstOrderClass out;
    out.mode = d.mode;
    CechContext cx{nullptr, &d.base};
    if (d.mode == DefMode::FixedBoth) {
        out.rep = {extract_phi_part(d, tau)};
        out.coords = tot_class_coords(cx, SlotKind::PullbackY, 0, out.rep, opt);
        return out;
    }
    if (d.mode == DefMode::FixedTarget) {
        Cochain v = extract_phi_part(d, tau);
        auto [c, l] = extract_source_part(d, tau);
        out.rep = {v, neg(c), neg(l)};
        check_relations("first-order tuple", cx, out.rep, pd_relation_rows);
        out.coords = pd_class_coords(d.base, out.rep, /*first=*/true, opt);
        return out;
    }
    fail(Errc::InvalidDatum,
         "first-order classification supports fixed_both and fixed_target modes");
}

bool ObstructionClass::is_zero() const { return all_zero(coords); }

std::string ObstructionClass::summary() const {
    std::ostringstream os;
    os << "obstruction mode=" << defmode_name(mode) << " coords=" << coords_str(coords);
    for (const auto& ch : raw)
        if (!ch.is_zero()) os << "\n  " << ch.to_string();
    return os.str();
}

ObstructionClass obstruction_class(const DeformationDatum& d, const SmallExtension& e,
                                   unsigned lift_choice_seed, const HyperOptions& opt) {
    e.check();
    require(same_ring(d.ring, e.quotient), Errc::ExtensionMismatch,
            "datum ring is not the quotient of the extension");
    DeformationDatum L = lift_datum(d, e.total);
    if (lift_choice_seed) perturb_lift(L, e.tau, lift_choice_seed);
    return obstruction_of_lift(L, all_residuals(L, e.tau), opt);
}

std::string ArrowRankReport::to_string() const {
    std::ostringstream os;
    os << name << ": rank=" << rank << " dim(source)=" << src_dim
       << " dim(target)=" << tgt_dim;
    return os.str();
}

ArrowRankReport stability_h1_arrow(const PoissonMapData& f, const HyperOptions& opt) {
    return stability_arrow(f, 1, opt).rep;
}
ArrowRankReport stability_h2_arrow(const PoissonMapData& f, const HyperOptions& opt) {
    return stability_arrow(f, 2, opt).rep;
}
ArrowRankReport costability_h1_arrow(const PoissonMapData& f, const HyperOptions& opt) {
    return costability_arrow(f, 1, opt).rep;
}
ArrowRankReport costability_h2_arrow(const PoissonMapData& f, const HyperOptions& opt) {
    return costability_arrow(f, 2, opt).rep;
}
ArrowRankReport factor_h0_arrow(const PoissonMapData& f, const PoissonMapData& g,
                                const PoissonMapData& h, const HyperOptions& opt) {
    return factor_arrow(f, g, h, 0, opt).rep;
}
ArrowRankReport factor_h1_arrow(const PoissonMapData& f, const PoissonMapData& g,
                                const PoissonMapData& h, const HyperOptions& opt) {
    return factor_arrow(f, g, h, 1, opt).rep;
}

LiftOutcome lift_step(const DeformationDatum& d, const SmallExtension& e,
                      const HyperOptions& opt, unsigned lift_choice_seed) {
    e.check();
    require(same_ring(d.ring, e.quotient), Errc::ExtensionMismatch,
            "datum ring is not the quotient of the extension");
    DeformationDatum L = lift_datum(d, e.total);
    if (lift_choice_seed) perturb_lift(L, e.tau, lift_choice_seed);
    RawData rd = all_residuals(L, e.tau);
    ObstructionClass obs = obstruction_of_lift(L, rd, opt);
    if (!obs.is_zero()) return obs;

    CechContext cx{nullptr, &L.base};
    int bump = opt.bump >= 0 ? opt.bump : default_bump(cx.atlas());
    const int w0 = opt.window + bump;
    if (L.mode == DefMode::FixedBoth) {
        CochainList rhs{rd.mr.xi, rd.mr.P};
        auto blocks_at = [&](int W) {
            std::vector<std::pair<Space, RowFn>> b;
            b.emplace_back(make_space(cx, {FY01}, W), [cx](const Cochain& ch) {
                return CochainList{cech_delta(cx, ch), sheaf_d(cx, ch)};
            });
            return b;
        };
        auto sol = solve_with_escalation(blocks_at, rhs, w0, [] {
            fail(Errc::WindowInsufficient,
                 "lift solve failed although the obstruction class vanishes");
        });
        add_phi_correction(L, sol[0][0], e.tau);
    } else {
        auto blocks_at = [&](int W) {
            std::vector<std::pair<Space, RowFn>> b;
            for (const CechSlot& s : {FY01, TX11, TX02})
                b.emplace_back(make_space(cx, {s}, W), [cx](const Cochain& ch) {
                    return pd1_coboundary_rows(cx, ch);
                });
            return b;
        };
        auto sol = solve_with_escalation(blocks_at, obs.raw, w0, [] {
            fail(Errc::WindowInsufficient,
                 "lift solve failed although the obstruction class vanishes");
        });
        add_phi_correction(L, sol[0][0], e.tau);
        const Cochain& u = sol[1][0];
        const Cochain& c = sol[2][0];
        add_atlas_correction(L.base.source, L.source, u.is_zero() ? nullptr : &u,
                             c.is_zero() ? nullptr : &c, e.tau);
    }
    LiftCertificate cert;
    cert.residuals = validate_deformation(L);
    if (!cert.residuals.ok())
        fail(Errc::Internal, "lifted datum failed independent re-substitution:\n" +
                                 cert.residuals.to_string());
    cert.datum = std::move(L);
    return cert;
}

LiftCertificate stability_lift(const PoissonMapData& f, const DeformationDatum& target_def,
                               bool hypotheses_check, const HyperOptions& opt) {
    require(target_def.mode == DefMode::FixedSource, Errc::InvalidDatum,
            "stability input must be a fixed_source datum carrying the target family");
    if (hypotheses_check) {
        ArrowRankReport a1 = stability_arrow(f, 1, opt).rep;
        if (!a1.surjective())
            fail(Errc::HypothesisFailed, "H^1 comparison not surjective: " + a1.to_string());
        ArrowRankReport a2 = stability_arrow(f, 2, opt).rep;
        if (!a2.injective())
            fail(Errc::HypothesisFailed, "H^2 comparison not injective: " + a2.to_string());
    }
    const ParamRing& A = target_def.ring;
    auto chain = extension_chain(A);
    CechContext cx{nullptr, &f};
    int bump = opt.bump >= 0 ? opt.bump : default_bump(f.source);
    Op totX = tot_op(cx);

    DeformationDatum cur;
    bool have_cur = false;
    for (const auto& e : chain) {
        DeformationDatum L;
        L.base = f;
        L.ring = e.total;
        L.mode = DefMode::Free;
        L.target = truncate_atlas_def(f.target, target_def.target, e.total);
        if (have_cur) {
            L.source = lift_atlas_def(f.source, cur.source, e.total);
            L.phi.resize(cur.phi.size());
            for (size_t i = 0; i < cur.phi.size(); ++i) {
                Ctx ci = ring_chart_ctx(f.source.charts[i], e.total);
                for (const auto& p : cur.phi[i]) L.phi[i].push_back(p.to_ctx(ci));
            }
        } else {
            DeformationDatum t0 = trivial_deformation(f, e.total, DefMode::Free);
            L.source = std::move(t0.source);
            L.phi = std::move(t0.phi);
        }

        // stage 1: correct the source structure
        AtlasResiduals ar = atlas_residuals(f.source, L.source_atlas(), e.tau);
        CochainList rhs1{neg(ar.eta), neg(ar.B), scaled(ar.q, Rational(-1) / 2)};
        auto blocks1 = [&](int W) {
            std::vector<std::pair<Space, RowFn>> b;
            for (const CechSlot& s : {TX11, TX02})
                b.emplace_back(make_space(cx, {s}, W),
                               [&totX](const Cochain& ch) { return totX(ch); });
            return b;
        };
        auto sol1 = solve_with_escalation(blocks1, rhs1, opt.window + bump, [&] {
            auto coords = tot_class_coords(cx, SlotKind::TangentX, 2, rhs1, opt);
            if (all_zero(coords))
                fail(Errc::WindowInsufficient,
                     "source-structure solve failed with a vanishing class");
            fail(Errc::HypothesisFailed,
                 "source-structure obstruction is a nonzero class in H^2(T_X): " +
                     coords_str(coords));
        });
        {
            const Cochain& c = sol1[0][0];
            const Cochain& m = sol1[1][0];
            add_atlas_correction(f.source, L.source, c.is_zero() ? nullptr : &c,
                                 m.is_zero() ? nullptr : &m, e.tau);
        }

        // stage 2: correct the map; structure corrections constrained to cocycles
        MapResiduals mr = map_residuals(L, e.tau);
        CochainList rhs2{mr.xi, mr.P};
        auto blocks2 = [&](int W) {
            std::vector<std::pair<Space, RowFn>> b;
            for (const CechSlot& s : {FY01, TX11, TX02})
                b.emplace_back(make_space(cx, {s}, W), [cx](const Cochain& ch) {
                    return pd_relation_rows(cx, ch);
                });
            return b;
        };
        auto sol2 = solve_with_escalation(blocks2, rhs2, opt.window + bump, [&] {
            ArrowData arrow = stability_arrow(f, 1, opt);
            diagnose_map_stage(arrow, CochainList{neg(mr.xi), mr.P}, "map-stage solve");
        });
        add_phi_correction(L, sol2[0][0], e.tau);
        {
            Cochain c2 = neg(sol2[1][0]);
            Cochain m2 = neg(sol2[2][0]);
            add_atlas_correction(f.source, L.source, c2.is_zero() ? nullptr : &c2,
                                 m2.is_zero() ? nullptr : &m2, e.tau);
        }
        cur = std::move(L);
        have_cur = true;
    }
    LiftCertificate cert;
    cert.residuals = validate_deformation(cur);
    if (!cert.residuals.ok())
        fail(Errc::Internal, "stability lift failed independent re-substitution:\n" +
                                 cert.residuals.to_string());
    cert.datum = std::move(cur);
    return cert;
}

LiftCertificate costability_lift(const PoissonMapData& f, const DeformationDatum& source_def,
                                 bool hypotheses_check, const HyperOptions& opt) {
    require(source_def.mode == DefMode::FixedTarget, Errc::InvalidDatum,
            "costability input must be a fixed_target datum carrying the source family");
    if (hypotheses_check) {
        ArrowRankReport a1 = costability_arrow(f, 1, opt).rep;
        if (!a1.surjective())
            fail(Errc::HypothesisFailed, "H^1 comparison not surjective: " + a1.to_string());
        ArrowRankReport a2 = costability_arrow(f, 2, opt).rep;
        if (!a2.injective())
            fail(Errc::HypothesisFailed, "H^2 comparison not injective: " + a2.to_string());
    }
    const ParamRing& A = source_def.ring;
    auto chain = extension_chain(A);
    CechContext cx{nullptr, &f};
    CechContext cy{&f.target, nullptr};
    int bump =
        opt.bump >= 0 ? opt.bump : std::max(default_bump(f.source), default_bump(f.target));
    Op totY = tot_op(cy);

    DeformationDatum cur;
    bool have_cur = false;
    for (const auto& e : chain) {
        DeformationDatum L;
        L.base = f;
        L.ring = e.total;
        L.mode = DefMode::Free;
        L.source = truncate_atlas_def(f.source, source_def.source, e.total);
        if (have_cur) {
            L.target = lift_atlas_def(f.target, cur.target, e.total);
            L.phi.resize(cur.phi.size());
            for (size_t i = 0; i < cur.phi.size(); ++i) {
                Ctx ci = ring_chart_ctx(f.source.charts[i], e.total);
                for (const auto& p : cur.phi[i]) L.phi[i].push_back(p.to_ctx(ci));
            }
        } else {
            DeformationDatum t0 = trivial_deformation(f, e.total, DefMode::Free);
            L.target = std::move(t0.target);
            L.phi = std::move(t0.phi);
        }

        // stage 1: correct the target structure
        AtlasResiduals ar = atlas_residuals(f.target, L.target_atlas(), e.tau);
        CochainList rhs1{neg(ar.eta), neg(ar.B), scaled(ar.q, Rational(-1) / 2)};
        auto blocks1 = [&](int W) {
            std::vector<std::pair<Space, RowFn>> b;
            for (const CechSlot& s : {TX11, TX02})
                b.emplace_back(make_space(cy, {s}, W),
                               [&totY](const Cochain& ch) { return totY(ch); });
            return b;
        };
        auto sol1 = solve_with_escalation(blocks1, rhs1, opt.window + bump, [&] {
            auto coords = tot_class_coords(cy, SlotKind::TangentX, 2, rhs1, opt);
            if (all_zero(coords))
                fail(Errc::WindowInsufficient,
                     "target-structure solve failed with a vanishing class");
            fail(Errc::HypothesisFailed,
                 "target-structure obstruction is a nonzero class in H^2(T_Y): " +
                     coords_str(coords));
        });
        {
            const Cochain& c = sol1[0][0];
            const Cochain& m = sol1[1][0];
            add_atlas_correction(f.target, L.target, c.is_zero() ? nullptr : &c,
                                 m.is_zero() ? nullptr : &m, e.tau);
        }

        // stage 2: correct the map and the target structure jointly
        MapResiduals mr = map_residuals(L, e.tau);
        CochainList rhs2{mr.xi, mr.P};
        auto blocks2 = [&](int W) {
            std::vector<std::pair<Space, RowFn>> b;
            b.emplace_back(make_space(cx, {FY01}, W), [cx](const Cochain& ch) {
                return CochainList{cech_delta(cx, ch), sheaf_d(cx, ch)};
            });
            b.emplace_back(make_space(cy, {TX11}, W), [&f, cy](const Cochain& ch) {
                return CochainList{pullback_cochain(f, cy, ch), cech_delta(cy, ch),
                                   sheaf_d(cy, ch)};
            });
            b.emplace_back(make_space(cy, {TX02}, W), [&f, cy](const Cochain& ch) {
                return CochainList{scaled(pullback_cochain(f, cy, ch), -1),
                                   cech_delta(cy, ch), sheaf_d(cy, ch)};
            });
            return b;
        };
        auto sol2 = solve_with_escalation(blocks2, rhs2, opt.window + bump, [&] {
            ArrowData arrow = costability_arrow(f, 1, opt);
            diagnose_map_stage(arrow, CochainList{neg(mr.xi), mr.P}, "map-stage solve");
        });
        add_phi_correction(L, sol2[0][0], e.tau);
        {
            const Cochain& cY = sol2[1][0];
            const Cochain& mY = sol2[2][0];
            add_atlas_correction(f.target, L.target, cY.is_zero() ? nullptr : &cY,
                                 mY.is_zero() ? nullptr : &mY, e.tau);
        }
        cur = std::move(L);
        have_cur = true;
    }
    LiftCertificate cert;
    cert.residuals = validate_deformation(cur);
    if (!cert.residuals.ok())
        fail(Errc::Internal, "costability lift failed independent re-substitution:\n" +
                                 cert.residuals.to_string());
    cert.datum = std::move(cur);
    return cert;
}

FamilyMapLift factor_through_family(const DeformationDatum& upsilon,
                                    const DeformationDatum& phi, const PoissonMapData& g,
                                    bool hypotheses_check, const HyperOptions& opt) {
    const PoissonMapData& f = phi.base;
    const PoissonMapData& h = upsilon.base;
    require(same_ring(upsilon.ring, phi.ring), Errc::ExtensionMismatch,
            "the two deformations live over different rings");
    require(h.source.nchart() == f.source.nchart() &&
                g.source.nchart() == f.target.nchart(),
            Errc::CompositionMismatch, "chart counts of f, g, h do not compose");
    for (int i = 0; i < f.source.nchart(); ++i) {
        require(h.assignment[i] == g.assignment[f.assignment[i]], Errc::CompositionMismatch,
                "chart assignments of h do not factor through f and g");
        ChartMap comp = compose(g.chart_map(f.assignment[i]), f.chart_map(i));
        require(same_components(comp.components, h.components[i]), Errc::CompositionMismatch,
                "h is not the composition of g and f");
    }
    // the two deformations must share the source family
    {
        PoissonAtlas a = phi.source_atlas();
        PoissonAtlas b = upsilon.source_atlas();
        for (const auto& [key, t] : a.transitions)
            require(same_components(t.components,
                                    b.transition(key.first, key.second).components),
                    Errc::CompositionMismatch,
                    "the two deformations carry different source families");
        for (int i = 0; i < a.nchart(); ++i)
            require((a.bivectors[i] - b.bivectors[i].to_ctx(a.bivectors[i].ctx())).is_zero(),
                    Errc::CompositionMismatch,
                    "the two deformations carry different source structures");
    }
    if (hypotheses_check) {
        ArrowRankReport a0 = factor_arrow(f, g, h, 0, opt).rep;
        if (!a0.surjective())
            fail(Errc::HypothesisFailed, "H^0 comparison not surjective: " + a0.to_string());
        ArrowRankReport a1 = factor_arrow(f, g, h, 1, opt).rep;
        if (!a1.injective())
            fail(Errc::HypothesisFailed, "H^1 comparison not injective: " + a1.to_string());
    }

    const ParamRing& A = upsilon.ring;
    auto chain = extension_chain(A);
    CechContext cg{nullptr, &g};
    int bump =
        opt.bump >= 0 ? opt.bump : std::max(default_bump(f.target), default_bump(f.source));

    std::vector<std::vector<LaurentPoly>> psi; // current, over the current ring
    bool have_cur = false;
    for (const auto& e : chain) {
        // canonical lift of Psi to e.total
        std::vector<std::vector<LaurentPoly>> psiL(g.source.nchart());
        for (int a = 0; a < g.source.nchart(); ++a) {
            Ctx ca = ring_chart_ctx(f.target.charts[a], e.total);
            const auto& src = have_cur ? psi[a] : g.components[a];
            for (const auto& p : src) psiL[a].push_back(p.to_ctx(ca));
        }
        // map residuals of Psi as a deformation of g with both structures frozen
        DeformationDatum Dg;
        Dg.base = g;
        Dg.ring = e.total;
        Dg.mode = DefMode::FixedBoth;
        Dg.source = trivial_atlas_deformation(g.source, e.total);
        Dg.target = trivial_atlas_deformation(g.target, e.total);
        Dg.phi = psiL;
        MapResiduals mr = map_residuals(Dg, e.tau);

        // composition residual gamma_i = (Upsilon_i - Psi o Phi_i) / tau
        DeformationDatum ups = truncate_deformation(upsilon, e.total);
        DeformationDatum ph = truncate_deformation(phi, e.total);
        Cochain gamma{FY01, {}};
        for (int i = 0; i < f.source.nchart(); ++i) {
            int a = f.assignment[i];
            Ctx ci = ph.phi[i].empty() ? ring_chart_ctx(f.source.charts[i], e.total)
                                       : ph.phi[i][0].ctx();
            Ctx outc = base_scratch(f.source, i);
            const int mz = g.target.charts[h.assignment[i]].ctx->nvars();
            Multivector val(outc, mz, 1);
            for (int p = 0; p < mz; ++p) {
                LaurentPoly composed = compose(psiL[a][p], ph.phi[i], ci);
                LaurentPoly diff = ups.phi[i][p].to_ctx(composed.ctx()) - composed;
                val.add_term({p}, div_tau(diff, e.tau, outc, "composition residual"));
            }
            if (!val.is_zero()) gamma.add({i}, val);
        }

        CochainList rhs{mr.xi, mr.P, gamma};
        auto blocks = [&](int W) {
            std::vector<std::pair<Space, RowFn>> b;
            b.emplace_back(make_space(cg, {FY01}, W), [&f, cg](const Cochain& ch) {
                return CochainList{cech_delta(cg, ch), sheaf_d(cg, ch),
                                   pullback_cochain(f, cg, ch)};
            });
            return b;
        };
        auto sol = solve_with_escalation(blocks, rhs, opt.window + bump, [&] {
            ArrowData arrow = factor_arrow(f, g, h, 0, opt);
            (void)arrow;
            fail(Errc::HypothesisFailed,
                 "factorization solve failed; " + arrow.rep.to_string());
        });
        // Psi_a += tau * W_a
        for (const auto& [t, v] : sol[0][0].values) {
            int a = t[0];
            for (size_t p = 0; p < psiL[a].size(); ++p) {
                LaurentPoly c = v.coeff({static_cast<int>(p)});
                if (!c.is_zero()) psiL[a][p] += times_tau(c, e.tau, psiL[a][p].ctx());
            }
        }
        psi = std::move(psiL);
        have_cur = true;
    }

    // independent re-substitution over A
    FamilyMapLift out;
    out.psi = psi;
    PoissonMapData gA;
    gA.source = apply_atlas_deformation(f.target, trivial_atlas_deformation(f.target, A));
    gA.target = apply_atlas_deformation(g.target, trivial_atlas_deformation(g.target, A));
    gA.assignment = g.assignment;
    gA.components.resize(psi.size());
    for (size_t a = 0; a < psi.size(); ++a)
        for (const auto& p : psi[a])
            gA.components[a].push_back(p.to_ctx(gA.source.charts[a].ctx));
    {
        ValidationReport vm = validate_map(gA);
        for (auto entry : vm.entries) {
            entry.name = "psi_" + entry.name;
            out.residuals.entries.push_back(std::move(entry));
        }
    }
    for (int i = 0; i < f.source.nchart(); ++i) {
        int a = f.assignment[i];
        Ctx ci = phi.phi[i].empty() ? ring_chart_ctx(f.source.charts[i], A)
                                    : phi.phi[i][0].ctx();
        bool ok = true;
        for (size_t p = 0; p < psi[a].size(); ++p) {
            LaurentPoly composed = compose(psi[a][p], phi.phi[i], ci);
            if (!(upsilon.phi[i][p].to_ctx(composed.ctx()) - composed).is_zero()) ok = false;
        }
        out.residuals.add("composition", {i}, ok,
                          ok ? "" : "Psi o Phi differs from Upsilon");
    }
    if (!out.residuals.ok())
        fail(Errc::Internal, "factorization failed independent re-substitution:\n" +
                                 out.residuals.to_string());
    return out;
}

Cochain pullback_cochain(const PoissonMapData& f, const CechContext& tgt_cx,
                         const Cochain& c) {
    const PoissonAtlas& Y = tgt_cx.atlas();
    require(Y.nchart() == f.target.nchart(), Errc::ChartMismatch,
            "pullback context does not cover the target of the map");
    Cochain out{CechSlot{SlotKind::PullbackY, c.slot.c, c.slot.q}, {}};
    for (const auto& S : nerve_tuples(f.source, c.slot.c)) {
        std::vector<int> T;
        T.reserve(S.size());
        for (int s : S) T.push_back(f.assignment[s]);
        // alternating cochain: repeated charts contribute zero
        std::vector<int> sorted = T;
        int sign = 1;
        for (size_t a = 0; a + 1 < sorted.size(); ++a)
            for (size_t b = 0; b + 1 < sorted.size() - a; ++b)
                if (sorted[b] > sorted[b + 1]) {
                    std::swap(sorted[b], sorted[b + 1]);
                    sign = -sign;
                }
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
        auto it = c.values.find(sorted);
        if (it == c.values.end()) continue;
        Multivector v = it->second;
        if (T[0] != sorted[0]) v = transport(tgt_cx, c.slot.kind, v, T[0], sorted[0]);
        Ctx w = scratch_ctx(f.source.charts[S[0]].ctx);
        Multivector r(w, v.axis_dim(), v.degree());
        for (const auto& [A, coef] : v.comps())
            r.add_term(A, compose(coef, f.components[S[0]], w));
        if (sign == -1) r = -r;
        if (!r.is_zero()) out.add(S, r);
    }
    return out;
}

} // namespace pdeform
