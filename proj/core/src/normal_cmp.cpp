#include "pdeform/normal_cmp.hpp"

#include "pdeform/exactness.hpp"

#include <algorithm>
#include <sstream>

namespace pdeform {

namespace {

// Cech sign of the total differential at bidegree (c, p); the column part
// always enters with +1 (same scheme as the hypercohomology engine).
int eps_cech(int c, int p) {
    if (c == 0) return p % 2 ? -1 : 1;
    return p % 2 ? 1 : -1;
}

// Sign of phi on a pullback cochain at (Cech degree c, multivector degree q):
// the product of the frame-extraction degree sign (-1)^{q-1}, the column
// reconciliation (-1)^{(q-1)/2 rounds}, and the Cech-degree sign (-1)^c that
// absorbs the shift of the total-complex Cech signs under p = q - 1.
int phi_sign(int c, int q) {
    int s = (c % 2) ? -1 : 1;
    if (((q - 1) / 2) % 2) s = -s;
    if ((q - 1) % 2) s = -s;
    return s;
}

Cochain scaled(Cochain ch, int s) {
    if (s == 1) return ch;
    for (auto& [t, v] : ch.values) v = v * Rational(s);
    return ch;
}

int ambient_axis_dim(const NormalContext& nx) {
    return nx.sub.ambient.charts[0].ctx->nvars();
}

// Lift a multivector whose coefficients live on X chart i (functions of the
// z-variables) to the ambient chart, constant in the defining variables.
Multivector ambient_lift(const NormalContext& nx, int i, const Multivector& v, const Ctx& amb) {
    std::vector<LaurentPoly> vals;
    vals.reserve(nx.zpos[i].size());
    for (int a : nx.zpos[i]) vals.push_back(LaurentPoly::variable(amb, a));
    Multivector out(amb, v.axis_dim(), v.degree());
    for (const auto& [A, c] : v.comps()) out.add_term(A, compose(c, vals, amb));
    return out;
}

// Substitution ambient chart i -> X chart i (defining variables to zero).
std::vector<LaurentPoly> restrict_values(const NormalContext& nx, int i, const Ctx& out) {
    const int m = nx.sub.ambient.charts[i].ctx->nvars();
    std::vector<LaurentPoly> vals(m, LaurentPoly(out, Rational(0)));
    for (size_t l = 0; l < nx.zpos[i].size(); ++l)
        vals[nx.zpos[i][l]] = LaurentPoly::variable(out, static_cast<int>(l));
    return vals;
}

Multivector x_restrict(const NormalContext& nx, int i, const Multivector& v) {
    Ctx xs = scratch_ctx(nx.X.charts[i].ctx);
    auto vals = restrict_values(nx, i, xs);
    Multivector out(xs, v.axis_dim(), v.degree());
    for (const auto& [A, c] : v.comps()) out.add_term(A, compose(c, vals, xs));
    return out;
}

Cochain zero_cochain(int c, int p) { return Cochain{CechSlot{SlotKind::PullbackY, c, p}, {}}; }

NormalCochain zero_normal(const NormalContext& nx, int c, int p) {
    return NormalCochain{c, p, std::vector<Cochain>(nx.r(), zero_cochain(c, p))};
}

} // namespace

bool NormalCochain::is_zero() const {
    for (const auto& ch : copies)
        if (!ch.is_zero()) return false;
    return true;
}

std::string NormalCochain::to_string() const {
    std::ostringstream os;
    os << "(c=" << c << ", p=" << p << ")";
    for (size_t a = 0; a < copies.size(); ++a)
        os << "\n  e^" << a + 1 << ": " << copies[a].to_string();
    return os.str();
}

PoissonMapData inclusion_map(const SubmanifoldData& s) {
    return make_normal_context(s).incl;
}

NormalContext make_normal_context(const SubmanifoldData& s) {
    auto val = validate_submanifold(s);
    if (!val.report.ok())
        fail(Errc::InvalidSubmanifold, "tangency validation failed:\n" + val.report.to_string());
    NormalContext nx;
    nx.sub = s;
    nx.T = val.T;
    const PoissonAtlas& A = s.ambient;
    const int n = A.nchart();

    // Induced atlas: the non-defining variables of every chart.
    nx.X.ring = A.ring;
    for (int i = 0; i < n; ++i) {
        std::vector<int> zp;
        std::vector<std::string> names;
        const auto& def = s.defining[i];
        for (int m = 0; m < A.charts[i].ctx->nvars(); ++m) {
            if (std::find(def.begin(), def.end(), m) != def.end()) continue;
            zp.push_back(m);
            names.push_back(A.charts[i].ctx->vars[m]);
        }
        nx.zpos.push_back(zp);
        Ctx xc = make_ctx(A.ring, names, A.charts[i].window);
        nx.X.charts.push_back({A.charts[i].id, xc, A.charts[i].window});
    }
    for (const auto& [key, tr] : A.transitions) {
        auto [i, j] = key;
        Ctx xj = nx.X.charts[j].ctx;
        auto vals = restrict_values(nx, j, xj);
        std::vector<LaurentPoly> comps;
        comps.reserve(nx.zpos[i].size());
        for (int a : nx.zpos[i]) comps.push_back(compose(tr.components[a], vals, xj));
        nx.X.transitions[key] = ChartMap{xj, nx.X.charts[i].ctx, std::move(comps)};
    }
    for (int i = 0; i < n; ++i) {
        Ctx xc = nx.X.charts[i].ctx;
        auto vals = restrict_values(nx, i, xc);
        std::vector<int> pos(A.charts[i].ctx->nvars(), -1);
        for (size_t l = 0; l < nx.zpos[i].size(); ++l) pos[nx.zpos[i][l]] = static_cast<int>(l);
        Multivector lx(xc, static_cast<int>(nx.zpos[i].size()), 2);
        for (const auto& [ax, c] : A.bivectors[i].comps()) {
            if (pos[ax[0]] < 0 || pos[ax[1]] < 0) continue; // mixed terms vanish on X
            lx.add_term({pos[ax[0]], pos[ax[1]]}, compose(c, vals, xc));
        }
        nx.X.bivectors.push_back(lx);
    }
    auto ra = validate_atlas(nx.X);
    if (!ra.ok()) fail(Errc::InvalidDatum, "induced atlas fails validation:\n" + ra.to_string());

    nx.incl.source = nx.X;
    nx.incl.target = A;
    for (int i = 0; i < n; ++i) {
        nx.incl.assignment.push_back(i);
        Ctx xc = nx.X.charts[i].ctx;
        nx.incl.components.push_back(restrict_values(nx, i, xc));
    }
    auto rm = validate_map(nx.incl);
    if (!rm.ok()) fail(Errc::InvalidDatum, "inclusion map fails validation:\n" + rm.to_string());

    // Normal frame transitions, written in the coordinates of the lead chart.
    const int R = nx.r();
    for (const auto& [key, tr] : A.transitions) {
        auto [i, k] = key;
        auto F = frame_transition(s, i, k); // [alpha][beta], functions on ambient chart k
        Ctx xk = scratch_ctx(nx.X.charts[k].ctx);
        Ctx xi = scratch_ctx(nx.X.charts[i].ctx);
        auto vals_k = restrict_values(nx, k, xk);
        const ChartMap& tki = nx.X.transition(k, i); // chart i coords -> chart k coords
        std::vector<std::vector<LaurentPoly>> out(R, std::vector<LaurentPoly>(R));
        for (int a = 0; a < R; ++a)
            for (int b = 0; b < R; ++b)
                out[a][b] = compose(compose(F[a][b], vals_k, xk), tki.components, xi);
        nx.frames[key] = std::move(out);
    }
    return nx;
}

NormalCochain nabla_d(const NormalContext& nx, const NormalCochain& v) {
    const int R = nx.r();
    const int p = v.p;
    const int tsign = (p % 2) ? -1 : 1;
    NormalCochain out = zero_normal(nx, v.c, p + 1);
    // Collect the tuples carrying a value in any copy.
    std::vector<std::vector<int>> tuples;
    for (const auto& ch : v.copies)
        for (const auto& [t, mv] : ch.values)
            if (std::find(tuples.begin(), tuples.end(), t) == tuples.end()) tuples.push_back(t);
    for (const auto& t : tuples) {
        const int i = t[0];
        Ctx amb = scratch_ctx(nx.sub.ambient.charts[i].ctx);
        const Multivector& lam = nx.sub.ambient.bivectors[i];
        std::vector<const Multivector*> h(R, nullptr);
        std::vector<Multivector> hamb(R);
        for (int b = 0; b < R; ++b) {
            auto it = v.copies[b].values.find(t);
            if (it == v.copies[b].values.end()) continue;
            h[b] = &it->second;
            hamb[b] = ambient_lift(nx, i, it->second, amb);
        }
        for (int a = 0; a < R; ++a) {
            Multivector acc(amb, ambient_axis_dim(nx), p + 1);
            if (h[a]) acc += schouten(hamb[a], lam) * Rational(-1);
            for (int b = 0; b < R; ++b)
                if (h[b]) acc += wedge(hamb[b], nx.T[i][a][b].to_ctx(amb)) * Rational(tsign);
            Multivector res = x_restrict(nx, i, acc);
            if (!res.is_zero()) out.copies[a].add(t, res);
        }
    }
    return out;
}

NormalCochain normal_delta(const NormalContext& nx, const NormalCochain& v) {
    const int R = nx.r();
    CechContext cx = nx.cx();
    const int adim = ambient_axis_dim(nx);
    NormalCochain out = zero_normal(nx, v.c + 1, v.p);
    for (const auto& S : nerve_tuples(nx.X, v.c + 1)) {
        Ctx acc_ctx = scratch_ctx(nx.X.charts[S[0]].ctx);
        std::vector<Multivector> acc(R, Multivector(acc_ctx, adim, v.p));
        bool any = false;
        for (size_t k = 0; k < S.size(); ++k) {
            std::vector<int> face;
            for (size_t l = 0; l < S.size(); ++l)
                if (l != k) face.push_back(S[l]);
            const int sgn = (k % 2) ? -1 : 1;
            if (k == 0) {
                const auto& F = nx.frames.at({S[0], S[1]});
                for (int b = 0; b < R; ++b) {
                    auto it = v.copies[b].values.find(face);
                    if (it == v.copies[b].values.end()) continue;
                    any = true;
                    Multivector tb =
                        transport(cx, SlotKind::PullbackY, it->second, S[0], S[1]).to_ctx(acc_ctx);
                    for (int a = 0; a < R; ++a)
                        acc[a] += tb.scaled_by(F[a][b].to_ctx(acc_ctx)) * Rational(sgn);
                }
            } else {
                for (int a = 0; a < R; ++a) {
                    auto it = v.copies[a].values.find(face);
                    if (it == v.copies[a].values.end()) continue;
                    any = true;
                    acc[a] += it->second.to_ctx(acc_ctx) * Rational(sgn);
                }
            }
        }
        if (!any) continue;
        for (int a = 0; a < R; ++a)
            if (!acc[a].is_zero()) out.copies[a].add(S, acc[a]);
    }
    return out;
}

std::vector<NormalCochain> normal_tot_op(const NormalContext& nx, const NormalCochain& v) {
    std::vector<NormalCochain> out;
    NormalCochain d = normal_delta(nx, v);
    const int e = eps_cech(v.c, v.p);
    if (e != 1)
        for (auto& ch : d.copies) ch = scaled(std::move(ch), e);
    out.push_back(std::move(d));
    out.push_back(nabla_d(nx, v));
    return out;
}

NormalCochain phi_map(const NormalContext& nx, const Cochain& g) {
    if (g.slot.kind != SlotKind::PullbackY || g.slot.q < 1)
        fail(Errc::InvalidDatum, "phi_map expects a pullback cochain of degree >= 1");
    const int c = g.slot.c, q = g.slot.q, p = q - 1;
    const int R = nx.r();
    const Rational sgn(phi_sign(c, q));
    NormalCochain out = zero_normal(nx, c, p);
    for (const auto& [t, v] : g.values) {
        const int i = t[0];
        Ctx amb = scratch_ctx(nx.sub.ambient.charts[i].ctx);
        Multivector va = ambient_lift(nx, i, v, amb);
        for (int a = 0; a < R; ++a) {
            Multivector wv(amb, ambient_axis_dim(nx), 0);
            wv.add_term({}, LaurentPoly::variable(amb, nx.sub.defining[i][a]));
            Multivector br = x_restrict(nx, i, schouten(va, wv) * sgn);
            if (!br.is_zero()) out.copies[a].add(t, br);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Windowed presentation of the hypercohomology of the normal complex. The r
// frame copies are enumerated copy-major over one shared windowed space; exact
// vectorization keeps one key index per copy, flattened so that the domain
// coordinates come first (the layout subquotient_core expects).

namespace {

std::vector<CechSlot> normal_slots(const NormalContext& nx, int n) {
    std::vector<CechSlot> out;
    const int adim = ambient_axis_dim(nx);
    for (int c = 0; c <= std::min(n, nx.X.nchart() - 1); ++c) {
        int p = n - c;
        if (p < 0 || p > adim) continue;
        out.push_back(CechSlot{SlotKind::PullbackY, c, p});
    }
    return out;
}

struct NormalPres {
    Space dom;
    int R = 0;
    SubquotientResult sq;
    std::vector<std::vector<NormalCochain>> basis;
    std::vector<std::optional<std::vector<Rational>>> query_coords;
};

// Applies the total differential to the cochain `e` sitting in copy `a` and
// vectorizes the result into the per-copy key indexes.
std::vector<SRow> op_row(const NormalContext& nx, int a, const Cochain& e,
                         std::vector<KeyIndex>& ki) {
    const int R = nx.r();
    NormalCochain v = zero_normal(nx, e.slot.c, e.slot.q);
    v.copies[a] = e;
    auto outs = normal_tot_op(nx, v);
    std::vector<SRow> row(R);
    for (int g = 0; g < R; ++g) {
        CochainList parts;
        for (const auto& o : outs) parts.push_back(o.copies[g]);
        row[g] = vectorize_exact(ki[g], parts);
    }
    return row;
}

std::vector<SRow> query_row(const NormalContext& nx, const std::vector<NormalCochain>& q,
                            std::vector<KeyIndex>& ki) {
    const int R = nx.r();
    std::vector<SRow> row(R);
    for (int g = 0; g < R; ++g) {
        CochainList parts;
        for (const auto& part : q) parts.push_back(part.copies[g]);
        row[g] = vectorize_exact(ki[g], parts);
    }
    return row;
}

NormalPres normal_pres(const NormalContext& nx, int n, int W, int b,
                       const std::vector<std::vector<NormalCochain>>& queries) {
    CechContext cx = nx.cx();
    const int R = nx.r();
    auto slots = normal_slots(nx, n);
    Space dom = make_space(cx, slots, W);

    std::vector<KeyIndex> cod(R);
    std::vector<std::vector<SRow>> cols;
    cols.reserve(static_cast<size_t>(R) * dom.dim);
    for (int a = 0; a < R; ++a)
        for (int k = 0; k < dom.dim; ++k) cols.push_back(op_row(nx, a, dom.basis_element(k), cod));

    std::vector<KeyIndex> emb(R);
    for (int g = 0; g < R; ++g) seed_keys(emb[g], dom);
    std::vector<std::vector<SRow>> im;
    if (n > 0) {
        Space pre = make_space(cx, normal_slots(nx, n - 1), W + b);
        for (int a = 0; a < R; ++a)
            for (int k = 0; k < pre.dim; ++k) im.push_back(op_row(nx, a, pre.basis_element(k), emb));
    }
    std::vector<std::vector<SRow>> qr;
    qr.reserve(queries.size());
    for (const auto& q : queries) qr.push_back(query_row(nx, q, emb));

    // Flatten. Codomain: plain per-copy blocks. Embedding: the R * dom.dim
    // domain coordinates first, per-copy overflow keys after.
    std::vector<int> cod_off(R + 1, 0), emb_extra(R + 1, 0);
    for (int g = 0; g < R; ++g) cod_off[g + 1] = cod_off[g] + cod[g].dim();
    for (int g = 0; g < R; ++g) emb_extra[g + 1] = emb_extra[g] + (emb[g].dim() - dom.dim);
    const int base = R * dom.dim;
    auto flat_cod = [&](const std::vector<SRow>& row) {
        SRow out;
        for (int g = 0; g < R; ++g)
            for (const auto& [k, c] : row[g]) out.emplace_back(cod_off[g] + k, c);
        return srow_normalize(std::move(out));
    };
    auto flat_emb = [&](const std::vector<SRow>& row) {
        SRow out;
        for (int g = 0; g < R; ++g)
            for (const auto& [k, c] : row[g])
                out.emplace_back(k < dom.dim ? g * dom.dim + k : base + emb_extra[g] + (k - dom.dim),
                                 c);
        return srow_normalize(std::move(out));
    };
    std::vector<SRow> fcols, fim;
    fcols.reserve(cols.size());
    fim.reserve(im.size());
    for (const auto& r : cols) fcols.push_back(flat_cod(r));
    for (const auto& r : im) fim.push_back(flat_emb(r));

    NormalPres p;
    p.dom = std::move(dom);
    p.R = R;
    p.sq = subquotient_core(fcols, fim, base + emb_extra[R]);
    for (const auto& rep : p.sq.reps) {
        std::vector<SRow> per(R);
        for (const auto& [k, c] : rep) {
            if (k >= base) fail(Errc::Internal, "normal representative outside the domain");
            per[k / p.dom.dim].emplace_back(k % p.dom.dim, c);
        }
        std::vector<NormalCochain> cls;
        for (const auto& s : slots) cls.push_back(zero_normal(nx, s.c, s.q));
        for (int g = 0; g < R; ++g) {
            for (Cochain& ch : p.dom.devectorize(srow_normalize(std::move(per[g])))) {
                for (size_t si = 0; si < slots.size(); ++si)
                    if (ch.slot == slots[si]) cls[si].copies[g] = std::move(ch);
            }
        }
        p.basis.push_back(std::move(cls));
    }
    for (const auto& r : qr) p.query_coords.push_back(p.sq.class_coords(flat_emb(r)));
    return p;
}

int derive_bump(const NormalContext& nx, const HyperOptions& opt) {
    if (opt.bump >= 0) return opt.bump;
    int b = default_bump(nx.sub.ambient);
    for (const auto& ti : nx.T)
        for (const auto& ta : ti)
            for (const auto& tb : ta) b = std::max(b, tb.max_abs_exponent());
    return b;
}

} // namespace

std::string NormalHyperReport::summary() const {
    std::ostringstream os;
    os << "H^" << degree << "(N) dim=" << dim;
    for (size_t k = 0; k < basis.size(); ++k) {
        os << "\nclass " << k + 1 << ":";
        for (const auto& part : basis[k])
            if (!part.is_zero()) os << "\n" << part.to_string();
    }
    return os.str();
}

NormalHyperReport normal_hyper(const NormalContext& nx, int degree, const HyperOptions& opt) {
    const int b = derive_bump(nx, opt);
    NormalPres p = normal_pres(nx, degree, opt.window, b, {});
    NormalHyperReport rep;
    rep.degree = degree;
    rep.dim = p.sq.dim;
    rep.window = opt.window;
    rep.basis = std::move(p.basis);
    if (opt.audit) {
        NormalPres big = normal_pres(nx, degree, opt.window + 2, b, {});
        rep.dim_enlarged = big.sq.dim;
        rep.audit_ok = (big.sq.dim == rep.dim);
        if (!rep.audit_ok && opt.throw_on_audit)
            fail(Errc::WindowInsufficient,
                 "H^" + std::to_string(degree) + "(N) unstable under window enlargement: " +
                     std::to_string(rep.dim) + " vs " + std::to_string(rep.dim_enlarged));
    }
    return rep;
}

std::string NormalComparisonReport::to_string() const {
    std::ostringstream os;
    os << "normal comparison (window " << window << ")\n";
    os << "H^0: map-side " << h0_map << ", submanifold-side " << h0_normal << ", phi^0 rank "
       << phi0_rank << " -> " << (phi0_iso ? "isomorphism" : "NOT an isomorphism") << "\n";
    os << "H^1: map-side " << h1_map << ", submanifold-side " << h1_normal << ", phi^1 rank "
       << phi1_rank << " -> " << (phi1_injective ? "injective" : "NOT injective");
    return os.str();
}

NormalComparisonReport compare_normal_cohomology(const SubmanifoldData& s,
                                                 const PoissonMapData& i,
                                                 const HyperOptions& opt) {
    NormalContext nx = make_normal_context(s);

    // The supplied map must be the canonical inclusion (variable names aside).
    if (i.source.nchart() != nx.X.nchart() || i.target.nchart() != s.ambient.nchart() ||
        i.assignment != nx.incl.assignment)
        fail(Errc::InvalidDatum, "map is not the inclusion of the submanifold");
    for (int k = 0; k < nx.X.nchart(); ++k) {
        if (i.source.charts[k].ctx->nvars() != nx.X.charts[k].ctx->nvars())
            fail(Errc::InvalidDatum, "map source has the wrong chart dimensions");
        const auto& def = s.defining[k];
        for (int m = 0; m < s.ambient.charts[k].ctx->nvars(); ++m) {
            const LaurentPoly& comp = i.components[k][m];
            if (std::find(def.begin(), def.end(), m) != def.end()) {
                if (!comp.is_zero())
                    fail(Errc::InvalidDatum, "map does not kill the defining variables");
                continue;
            }
            int pos = -1;
            for (size_t l = 0; l < nx.zpos[k].size(); ++l)
                if (nx.zpos[k][l] == m) pos = static_cast<int>(l);
            LaurentPoly want = LaurentPoly::variable(i.source.charts[k].ctx, pos);
            if (comp.terms() != want.terms())
                fail(Errc::InvalidDatum, "map is not the identity on the induced coordinates");
        }
    }

    const int b = derive_bump(nx, opt);
    auto m0 = normal_cohomology(nx.incl, 0, opt);
    auto m1 = normal_cohomology(nx.incl, 1, opt);

    auto images_of = [&](const CohomologyReport& rep) {
        std::vector<std::vector<NormalCochain>> out;
        for (const auto& cls : rep.basis) {
            std::vector<NormalCochain> img;
            for (const auto& part : cls)
                if (part.slot.kind == SlotKind::PullbackY && !part.is_zero())
                    img.push_back(phi_map(nx, part));
            out.push_back(std::move(img));
        }
        return out;
    };
    auto q0 = images_of(m0);
    auto q1 = images_of(m1);

    NormalComparisonReport rep;
    rep.h0_map = m0.dim;
    rep.h1_map = m1.dim;

    auto place = [&](int degree, const std::vector<std::vector<NormalCochain>>& queries,
                     int& ndim, std::vector<std::vector<Rational>>& rows, int& rk) {
        for (int extra = 0; extra <= 4; extra += 2) {
            const int W = opt.window + extra;
            NormalPres p = normal_pres(nx, degree, W, b, queries);
            if (opt.audit) {
                NormalPres big = normal_pres(nx, degree, W + 2, b, {});
                if (big.sq.dim != p.sq.dim) {
                    if (extra < 4) continue;
                    if (opt.throw_on_audit)
                        fail(Errc::WindowInsufficient,
                             "H^" + std::to_string(degree) +
                                 "(N) unstable under window enlargement: " +
                                 std::to_string(p.sq.dim) + " vs " + std::to_string(big.sq.dim));
                }
            }
            bool all = true;
            for (const auto& qc : p.query_coords)
                if (!qc) all = false;
            if (!all) {
                if (extra < 4) continue;
                fail(Errc::WindowInsufficient,
                     "a comparison image lies outside every escalated window");
            }
            ndim = p.sq.dim;
            rows.clear();
            for (const auto& qc : p.query_coords) rows.push_back(*qc);
            SparseMat m(ndim);
            for (const auto& row : rows) {
                SRow sr;
                for (int k = 0; k < ndim; ++k)
                    if (row[k] != Rational(0)) sr.emplace_back(k, row[k]);
                m.add_row(std::move(sr));
            }
            rk = rank(m);
            rep.window = W;
            return;
        }
    };

    place(0, q0, rep.h0_normal, rep.phi0, rep.phi0_rank);
    place(1, q1, rep.h1_normal, rep.phi1, rep.phi1_rank);
    rep.phi0_iso = (rep.h0_map == rep.h0_normal && rep.phi0_rank == rep.h0_map);
    rep.phi1_injective = (rep.phi1_rank == rep.h1_map);
    return rep;
}

} // namespace pdeform
